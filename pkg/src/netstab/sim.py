"""Orbit simulation, fixed points, and empirical attraction checks."""

from __future__ import annotations

import io
import json
import os
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .delays import dedelay
from .errors import ConvergenceError, NetworkError
from .network import TimeDelayedNetwork

__all__ = [
    "Trajectory",
    "AttractionVerdict",
    "iterate_orbit",
    "find_fixed_point",
    "verify_global_attraction",
    "conjugacy_check",
]


def _iteration_cap(default: int = 100_000) -> int:
    raw = os.environ.get("NETSTAB_MAX_ITERS", "")
    try:
        return int(raw) if raw else default
    except ValueError:
        return default


@dataclass(frozen=True)
class Trajectory:
    """Snapshots x^{-T+1}, ..., x^0, x^1, ..., x^K in chronological order."""

    nodes: tuple[str, ...]
    T: int
    states: np.ndarray  # (T + completed steps, n)
    left_domain: bool = False
    diverged_at: int | None = None

    @property
    def steps(self) -> int:
        return self.states.shape[0] - self.T

    def snapshot(self, k: int) -> np.ndarray:
        """State x^k; k ranges over -T+1 .. steps."""
        return self.states[k + self.T - 1]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step," + ",".join(self.nodes) + "\n")
        for row_index, row in enumerate(self.states):
            step = row_index - self.T + 1
            buf.write(str(step) + "," + ",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()


@dataclass(frozen=True)
class AttractionVerdict:
    converged: bool
    witness: np.ndarray | None
    final_diameter: float
    iterations_used: int
    trials: int
    seed: int
    diverged_trials: int = 0
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "schema": "netstab-report/1",
            "converged": self.converged,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "final_diameter": self.final_diameter,
            "iterations_used": self.iterations_used,
            "trials": self.trials,
            "seed": self.seed,
            "diverged_trials": self.diverged_trials,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2)


def _as_history(net: TimeDelayedNetwork, history) -> np.ndarray:
    arr = np.asarray(history, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.shape != (net.T, net.size):
        raise NetworkError(
            f"history must provide {net.T} snapshots of {net.size} values, got shape {arr.shape}"
        )
    if not np.isfinite(arr).all():
        raise NetworkError("history snapshots must be finite")
    return arr


def iterate_orbit(
    net: TimeDelayedNetwork, history, steps: int, backend: str | None = None
) -> Trajectory:
    """Forward orbit of ``net`` from T chronological snapshots.

    Snapshots that leave a node's declared domain set ``left_domain`` but
    iteration continues on the real line; a non-finite value stops the
    orbit and records the offending step in ``diverged_at``.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    hist = _as_history(net, history)
    program = engine.compile_network(net)
    states, steps_done, diverged = engine.run_orbit(program, hist, steps, backend=backend)
    states = states[: net.T + steps_done]

    left = False
    for i, node in enumerate(net.nodes):
        dom = net.domains[node]
        col = states[:, i]
        if (col < dom.lo).any() or (col > dom.hi).any():
            left = True
            break
    return Trajectory(
        nodes=net.nodes,
        T=net.T,
        states=states,
        left_domain=left,
        diverged_at=steps_done + 1 if diverged else None,
    )


def find_fixed_point(
    net: TimeDelayedNetwork, guess, tol: float = 1e-12, backend: str | None = None
) -> np.ndarray:
    """Point x with d_max(x, H(x, ..., x)) <= tol, by damped iteration.

    Damping halves when the residual stops contracting; failure after the
    iteration cap (NETSTAB_MAX_ITERS, default 100000) raises.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.asarray(guess, dtype=np.float64).copy()
    if x.shape != (net.size,):
        raise NetworkError(f"guess must have {net.size} entries")
    program = engine.compile_network(net)
    cap = _iteration_cap()
    alpha = 1.0
    prev_res = np.inf
    for _ in range(cap):
        fx = engine.apply_undelayed(program, x, backend=backend)
        if not np.isfinite(fx).all():
            raise ConvergenceError("fixed-point iteration produced a non-finite value")
        res = float(np.max(np.abs(fx - x)))
        if res <= tol:
            return x
        if res > prev_res:
            alpha = max(alpha * 0.5, 1.0 / 256.0)
        prev_res = res
        x = x + alpha * (fx - x)
    raise ConvergenceError(
        f"no fixed point within {cap} iterations (last residual {prev_res:.3e})"
    )


def _box_diameter(segment: np.ndarray) -> float:
    if segment.shape[0] == 0:
        return 0.0
    return float(np.max(segment.max(axis=0) - segment.min(axis=0)))


def verify_global_attraction(
    net: TimeDelayedNetwork,
    trials: int = 20,
    steps: int = 5000,
    sample_box: dict[str, tuple[float, float]] | None = None,
    tol: float = 1e-8,
    seed: int = 0,
    backend: str | None = None,
) -> AttractionVerdict:
    """Sample random histories, iterate, and report empirical convergence.

    Converged means every trial ends within ``tol`` (max-norm) of the
    others and each trial's tail diameter is non-increasing.  A pass is
    evidence of a globally attracting fixed point, not a proof.
    """
    if trials < 2:
        raise ValueError("need at least 2 trials")
    rng = np.random.default_rng(seed)

    lo = np.empty(net.size)
    hi = np.empty(net.size)
    for i, node in enumerate(net.nodes):
        dom = net.domains[node]
        if sample_box and node in sample_box:
            lo[i], hi[i] = sample_box[node]
        else:
            lo[i] = dom.lo if np.isfinite(dom.lo) else -10.0
            hi[i] = dom.hi if np.isfinite(dom.hi) else 10.0
    histories = rng.uniform(lo, hi, size=(trials, net.T, net.size))

    program = engine.compile_network(net)
    states, steps_done, diverged = engine.run_orbit_batch(
        program,
        histories,
        steps,
        stop_delta=tol * 1e-3,
        stop_streak=8,
        backend=backend,
    )

    notes: list[str] = []
    n_div = int(diverged.sum())
    endpoints = np.empty((trials, net.size))
    shrinking = True
    for t in range(trials):
        length = net.T + int(steps_done[t])
        endpoints[t] = states[t, length - 1]
        tail = states[t, max(0, length - max(8, length // 4)) : length]
        half = tail.shape[0] // 2
        d1 = _box_diameter(tail[:half])
        d2 = _box_diameter(tail[half:])
        if d2 > d1 * (1.0 + 1e-9) + 1e-15:
            shrinking = False

    spread = _box_diameter(endpoints) if n_div == 0 else np.inf
    converged = n_div == 0 and shrinking and spread <= tol
    if n_div:
        notes.append(f"{n_div} trial(s) diverged to non-finite values")
    if not shrinking:
        notes.append("tail diameter increased in at least one trial")
    witness = endpoints.mean(axis=0) if converged else None
    return AttractionVerdict(
        converged=converged,
        witness=witness,
        final_diameter=float(spread),
        iterations_used=int(steps_done.max()),
        trials=trials,
        seed=seed,
        diverged_trials=n_div,
        notes=tuple(notes),
    )


def conjugacy_check(
    net: TimeDelayedNetwork,
    history,
    steps: int,
    tol: float = 1e-12,
    backend: str | None = None,
) -> bool:
    """True iff the delayed orbit and the projected orbit of the
    de-delayed augmentation agree coordinatewise within ``tol``."""
    hist = _as_history(net, history)
    aug = dedelay(net)

    traj = iterate_orbit(net, hist, steps, backend=backend)

    x0 = np.empty(len(aug.coords))
    for j, coord in enumerate(aug.coords):
        node, delay = aug.projection[coord]
        i = net.nodes.index(node)
        x0[j] = hist[net.T - 1 - delay, i]
    aug_traj = iterate_orbit(aug.net, x0[None, :], steps, backend=backend)

    if traj.steps != aug_traj.steps:
        return False
    n = net.size
    for k in range(1, traj.steps + 1):
        delayed = traj.states[net.T - 1 + k]
        projected = aug_traj.states[k, :n]
        if np.max(np.abs(delayed - projected)) > tol:
            return False
    return True
