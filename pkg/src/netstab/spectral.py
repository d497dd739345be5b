"""Nonnegative-matrix spectral machinery.

Spectral radii are computed per strongly connected component: the
component matrix is shifted by the identity so its Perron root becomes
strictly dominant (delay cycles make these matrices periodic), power
iteration with Collatz-Wielandt brackets pins the root, and the shift is
subtracted back out.  Trivial components (single vertex, no loop)
contribute 0 and the component results are maximized.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

__all__ = [
    "NonnegMatrix",
    "Component",
    "strongly_connected_components",
    "spectral_radius",
    "is_irreducible",
    "perron_eigenvector",
    "theta_extension",
]


def _iteration_cap(default: int = 100_000) -> int:
    raw = os.environ.get("NETSTAB_MAX_ITERS", "")
    try:
        return int(raw) if raw else default
    except ValueError:
        return default


@dataclass(frozen=True)
class NonnegMatrix:
    """Square nonnegative matrix over an ordered index list."""

    data: np.ndarray
    index: tuple[str, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"matrix must be square, got shape {data.shape}")
        if data.shape[0] != len(self.index):
            raise ValueError("index list length must match the dimension")
        if not np.isfinite(data).all():
            raise ValueError("entries must be finite")
        if (data < 0).any():
            raise ValueError("entries must be nonnegative")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    def entry(self, row_label: str, col_label: str) -> float:
        return float(self.data[self.index.index(row_label), self.index.index(col_label)])

    def to_json_dict(self) -> dict:
        return {
            "indices": list(self.index),
            "matrix": [[float(v) for v in row] for row in self.data],
        }


def _as_array(M) -> np.ndarray:
    if isinstance(M, NonnegMatrix):
        return M.data
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be square, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class Component:
    indices: tuple[int, ...]
    trivial: bool


def strongly_connected_components(M) -> list[Component]:
    """SCCs of the digraph with edge i -> j iff M_ij > 0.

    Returned in reverse-topological order of the condensation (sinks
    first); a component is trivial when it is a single vertex without a
    loop.
    """
    A = _as_array(M)
    n = A.shape[0]
    adjacency = [np.nonzero(A[i] > 0)[0] for i in range(n)]

    index_of = [-1] * n
    lowlink = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = [0]
    components: list[Component] = []

    for start in range(n):
        if index_of[start] != -1:
            continue
        # iterative Tarjan: (vertex, next-child position)
        work = [(start, 0)]
        while work:
            v, child = work[-1]
            if child == 0:
                index_of[v] = lowlink[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            neighbors = adjacency[v]
            while child < len(neighbors):
                w = int(neighbors[child])
                child += 1
                if index_of[w] == -1:
                    work[-1] = (v, child)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    lowlink[v] = min(lowlink[v], index_of[w])
            if advanced:
                continue
            work.pop()
            if lowlink[v] == index_of[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                comp = tuple(sorted(comp))
                trivial = bool(len(comp) == 1 and A[comp[0], comp[0]] == 0.0)
                components.append(Component(indices=comp, trivial=trivial))
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[v])
    return components


def _cw_radius(A: np.ndarray, cap: int) -> float:
    """Perron root of an irreducible nonnegative matrix via power
    iteration on A + I with Collatz-Wielandt bracketing."""
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0])
    B = A + np.eye(n)
    v = np.ones(n)
    prev_mid = np.inf
    stagnant = 0
    for _ in range(cap):
        w = B @ v
        ratios = w / v
        lower = float(ratios.min())
        upper = float(ratios.max())
        mid = 0.5 * (lower + upper)
        if upper - lower <= 1e-12 * max(1.0, upper):
            return mid - 1.0
        if abs(mid - prev_mid) <= 1e-12 * max(1.0, abs(mid)):
            stagnant += 1
            if stagnant >= 3:
                return mid - 1.0
        else:
            stagnant = 0
        prev_mid = mid
        v = w / w.max()
    raise ConvergenceError(
        f"power iteration did not converge within {cap} iterations"
    )


def spectral_radius(M) -> float:
    """rho(M) for nonnegative M, exact to about 1e-10 absolute."""
    A = _as_array(M)
    if not np.isfinite(A).all() or (A < 0).any():
        raise ValueError("spectral_radius requires a finite nonnegative matrix")
    cap = _iteration_cap()
    rho = 0.0
    for comp in strongly_connected_components(A):
        if comp.trivial:
            continue
        sub = A[np.ix_(comp.indices, comp.indices)]
        rho = max(rho, _cw_radius(sub, cap))
    return rho


def is_irreducible(M) -> bool:
    """True iff the dependency digraph is strongly connected (a single
    vertex counts as strongly connected, loop or not)."""
    return len(strongly_connected_components(M)) == 1


def perron_eigenvector(M) -> tuple[float, np.ndarray]:
    """(rho, v) with v > 0, max-entry 1, and ||Mv - rho v||_inf <= 1e-8.

    Requires irreducible input.
    """
    A = _as_array(M)
    if not is_irreducible(A):
        raise ValueError("perron_eigenvector requires an irreducible matrix")
    n = A.shape[0]
    if n == 1:
        return float(A[0, 0]), np.ones(1)
    cap = _iteration_cap()
    B = A + np.eye(n)
    v = np.ones(n)
    for _ in range(cap):
        w = B @ v
        v = w / w.max()
        ratios = (A @ v) / v
        rho = 0.5 * float(ratios.min() + ratios.max())
        residual = float(np.max(np.abs(A @ v - rho * v)))
        if residual <= 1e-10 * max(1.0, rho):
            break
    else:
        raise ConvergenceError(f"no Perron pair within {cap} iterations")
    if residual > 1e-8:
        raise ConvergenceError(f"Perron residual {residual:.3e} above 1e-8")
    if (v <= 0).any():
        raise ConvergenceError("Perron vector failed to stay positive")
    return rho, v


def theta_extension(M, row: int, col: int, alpha: float, lip: float, theta: float):
    """Split entry (row, col) through a fresh vertex.

    The new vertex is prepended at position 0: it receives weight theta
    from ``row``, forwards alpha to ``col``, and the original entry drops
    to ``lip``; alpha + lip must equal the original entry.  The sign of
    rho(result) - theta matches the sign of rho(M) - theta.
    """
    labeled = isinstance(M, NonnegMatrix)
    A = _as_array(M)
    n = A.shape[0]
    if not (0 <= row < n and 0 <= col < n):
        raise ValueError("row/col out of range")
    if alpha < 0 or lip < 0:
        raise ValueError("alpha and lip must be nonnegative")
    if theta <= 0:
        raise ValueError("theta must be positive")
    if abs(alpha + lip - A[row, col]) > 1e-12:
        raise ValueError(
            f"alpha + lip = {alpha + lip} does not match entry {A[row, col]}"
        )
    out = np.zeros((n + 1, n + 1))
    out[1:, 1:] = A
    out[1 + row, 1 + col] = lip
    out[0, 1 + col] = alpha
    out[1 + row, 0] = theta
    if labeled:
        taken = set(M.index)
        aux = "aux"
        k = 0
        while aux in taken:
            k += 1
            aux = f"aux{k}"
        return NonnegMatrix(out, (aux,) + M.index)
    return NonnegMatrix(out, tuple(["aux"] + [str(i) for i in range(n)]))
