"""Stability matrices and verdicts.

The stability matrix of a network bounds |dF_j / dx_i| over the domain
box, entry (row j, column i); its spectral radius below 1 certifies a
globally attracting fixed point.  Delayed networks are de-delayed first,
so the matrix lives over the augmented coordinate list and delay-line
rows carry a single 1.

``jacobian_matrix``/``local_spectral_radius`` evaluate the signed
Jacobian at a single point instead of bounding over the box; that is the
local linearization used to certify that a fixed point repels (a spectral
radius below 1 here proves nothing global).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .delays import dedelay
from .errors import UnboundedDerivativeError
from .network import TimeDelayedNetwork
from .spectral import NonnegMatrix, spectral_radius

__all__ = [
    "StabilityReport",
    "stability_matrix",
    "analyze",
    "jacobian_matrix",
    "local_spectral_radius",
    "VERDICT_GUARD",
]

VERDICT_GUARD = 1e-12


@dataclass(frozen=True)
class StabilityReport:
    matrix: NonnegMatrix
    rho: float
    verdict: str  # "stable" | "inconclusive"
    boundary: bool
    provenance: dict[str, str]
    cg_criterion: float | None = None
    network_name: str = ""

    def to_json_dict(self) -> dict:
        out = {
            "schema": "netstab-report/1",
            "name": self.network_name,
            "rho": self.rho,
            "verdict": self.verdict,
            "boundary": self.boundary,
            "provenance": self.provenance,
        }
        out.update(self.matrix.to_json_dict())
        if self.cg_criterion is not None:
            out["cg_criterion"] = self.cg_criterion
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


def _undelayed_view(net: TimeDelayedNetwork):
    """(working net with T == 1, display labels, base-point map)."""
    if net.T == 1:
        return net, tuple(net.nodes), {n: (n, 0) for n in net.nodes}
    aug = dedelay(net)
    labels = tuple(idx.label() for idx in aug.indices)
    return aug.net, labels, dict(aug.projection)


def stability_matrix(net: TimeDelayedNetwork) -> NonnegMatrix:
    """Bound |dF_j/dx_i| entrywise over the domain box.

    Every variable ranges over its node's declared domain at every delay.
    Raises when a required sup is not finite, naming the offending term.
    """
    matrix, _ = _assemble(net)
    return matrix


def _assemble(net: TimeDelayedNetwork):
    work, labels, projection = _undelayed_view(net)
    pos = {node: i for i, node in enumerate(work.nodes)}
    box = {(node, 0): work.domains[node] for node in work.nodes}
    data = np.zeros((work.size, work.size))
    provenance: dict[str, str] = {}
    for target in work.nodes:
        update = work.updates[target]
        j = pos[target]
        for source, _ in sorted(ex.references(update)):
            i = pos[source]
            partial = ex.differentiate(update, (source, 0))
            interval = ex.eval_interval(partial, box)
            sup = interval.sup_abs()
            if not math.isfinite(sup):
                orig_node, orig_delay = projection[source]
                ref = orig_node if orig_delay == 0 else f"{orig_node}[-{orig_delay}]"
                raise UnboundedDerivativeError(
                    f"|d({target})/d({ref})| is unbounded over the domain box "
                    f"(term: {ex.to_text(partial)})"
                )
            data[j, i] = sup
            provenance[f"{labels[j]}<-{labels[i]}"] = ex.to_text(partial)
    return NonnegMatrix(data, labels), provenance


def analyze(net: TimeDelayedNetwork) -> StabilityReport:
    """Assemble the stability matrix and render the rho < 1 verdict.

    rho >= 1 is inconclusive by design: it does not certify instability.
    Values within the guard band of 1 are flagged as boundary cases.
    Networks built by the Cohen-Grossberg constructor also report the
    closed-form criterion |1 - eps| + L * rho(|W|).
    """
    matrix, provenance = _assemble(net)
    rho = spectral_radius(matrix)
    boundary = abs(rho - 1.0) <= VERDICT_GUARD
    verdict = "stable" if rho < 1.0 - VERDICT_GUARD else "inconclusive"
    cg_criterion = None
    if net.cg is not None:
        absW = np.abs(np.array(net.cg.weights))
        cg_criterion = abs(1.0 - net.cg.epsilon) + net.cg.lipschitz * spectral_radius(absW)
    return StabilityReport(
        matrix=matrix,
        rho=rho,
        verdict=verdict,
        boundary=boundary,
        provenance=provenance,
        cg_criterion=cg_criterion,
        network_name=net.name,
    )


def jacobian_matrix(net: TimeDelayedNetwork, point) -> tuple[np.ndarray, tuple[str, ...]]:
    """Signed Jacobian of the (de-delayed) map at a constant state.

    ``point`` assigns one value per base node; delay-line coordinates
    take the same value, which is exactly the augmented image of a fixed
    point.  Returns (J, labels) with J[j, i] = dF_j/dx_i at the point.
    """
    work, labels, projection = _undelayed_view(net)
    base = np.asarray(point, dtype=np.float64)
    if base.shape != (net.size,):
        raise ValueError(f"point must have {net.size} entries")
    node_value = {node: base[i] for i, node in enumerate(net.nodes)}
    assignment = {
        (coord, 0): node_value[projection[coord][0]] for coord in work.nodes
    }
    pos = {node: i for i, node in enumerate(work.nodes)}
    J = np.zeros((work.size, work.size))
    for target in work.nodes:
        update = work.updates[target]
        for source, _ in ex.references(update):
            partial = ex.differentiate(update, (source, 0))
            J[pos[target], pos[source]] = ex.eval_point(partial, assignment)
    return J, labels


def local_spectral_radius(net: TimeDelayedNetwork, point) -> float:
    """Max eigenvalue modulus of the signed Jacobian at ``point``."""
    J, _ = jacobian_matrix(net, point)
    return float(np.max(np.abs(np.linalg.eigvals(J))))
