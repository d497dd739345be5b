"""Bundled reference networks.

Small networks with known closed-form spectral radii, used by the CLI
regression command and the test suite.
"""

from __future__ import annotations

import numpy as np

from .expr import Interval
from .network import TimeDelayedNetwork, build_network, make_cohen_grossberg

__all__ = [
    "cg_ring",
    "delayed_pair",
    "undelayed_pair",
    "distributed_pair",
    "tanh_ring",
    "six_node",
    "even_vertices",
]


def _ring_weights(m: int, a: float) -> np.ndarray:
    W = np.zeros((m, m))
    for j in range(m):
        W[(j - 1) % m, j] = a
        W[(j + 1) % m, j] = a
    return W


def cg_ring(m: int, a: float, b: float, eps: float, c: float = 0.0) -> TimeDelayedNetwork:
    """Ring of m nodes, each reading both neighbors through tanh(b*.).

    Node j updates to (1-eps)*xj + a*tanh(b*x_{j-1}) + a*tanh(b*x_{j+1}) + c.
    The weight matrix has constant row sums 2|a|.
    """
    if m < 3:
        raise ValueError("ring needs at least 3 nodes")
    return make_cohen_grossberg(
        _ring_weights(m, a), eps, activation="tanh", b=b, c=np.full(m, c),
        name=f"cg_ring{m}",
    )


def delayed_pair(
    eps: float, a: float, b: float, c1: float = 0.0, c2: float = 0.0
) -> TimeDelayedNetwork:
    """Two cross-coupled nodes: self read at delay 1, neighbor at delay 3.

    xj updates to (1-eps)*xj[-1] + 2a*tanh(b*x_other[-3]) + cj, so T = 4.
    """
    W = np.array([[0.0, 2 * a], [2 * a, 0.0]])
    delays = np.array([[0, 3], [3, 0]])
    return make_cohen_grossberg(
        W, eps, activation="tanh", b=b, c=np.array([c1, c2]),
        delays=delays, self_delays=np.array([1, 1]),
        name="delayed_pair",
    )


def undelayed_pair(
    eps: float, a: float, b: float, c1: float = 0.0, c2: float = 0.0
) -> TimeDelayedNetwork:
    """The delayed pair with every delay removed (T = 1)."""
    W = np.array([[0.0, 2 * a], [2 * a, 0.0]])
    return make_cohen_grossberg(
        W, eps, activation="tanh", b=b, c=np.array([c1, c2]),
        name="undelayed_pair",
    )


def distributed_pair(eps: float = 0.5, b: float = 1.0) -> TimeDelayedNetwork:
    """Two nodes reading each other at delays 0 and 1 with opposite signs.

    The delayed reads cancel when all delays are set to zero, so the
    undelayed version is the plain contraction (1-eps)*x even though the
    delayed network has a repelling fixed point at the origin for
    eps = 1/2, b = 1.
    """
    leak = repr(1.0 - eps)
    bb = repr(float(b))
    decls = [("x1", Interval.whole()), ("x2", Interval.whole())]
    rules = [
        ("x1", f"{leak}*x1 + tanh({bb}*x2) - tanh({bb}*x2[-1])"),
        ("x2", f"{leak}*x2 + tanh({bb}*x1) - tanh({bb}*x1[-1])"),
    ]
    return build_network(decls, rules, name="distributed_pair")


def tanh_ring(m: int, c: float) -> TimeDelayedNetwork:
    """Ring of m nodes with xj updating to tanh(x_{j-1}) + tanh(x_{j+1}) + c.

    A Cohen-Grossberg variant with full leak (eps = 1) and unit weights;
    its stability matrix has constant row sums 2 regardless of c.
    """
    if m < 3 or m % 2:
        raise ValueError("tanh_ring wants an even node count >= 4")
    return make_cohen_grossberg(
        _ring_weights(m, 1.0), 1.0, activation="tanh", b=1.0, c=np.full(m, c),
        name=f"tanh_ring{m}",
    )


def even_vertices(net: TimeDelayedNetwork) -> tuple[str, ...]:
    """Every second node of a ring built here (x2, x4, ...)."""
    return tuple(net.nodes[1::2])


def six_node() -> TimeDelayedNetwork:
    """Six nodes whose dependency graph has cycles through x1, x3, x5 only.

    {x1, x3, x5} is a complete structural set; it is not basic because x3
    hears x5 both directly and through x6.
    """
    decls = [(f"x{i}", Interval.whole()) for i in range(1, 7)]
    rules = [
        ("x1", "0.4*tanh(x6)"),
        ("x2", "0.3*tanh(x1)"),
        ("x3", "0.3*tanh(x2) + 0.2*tanh(x5) + 0.1*tanh(x6)"),
        ("x4", "0.5*tanh(x3)"),
        ("x5", "0.2*tanh(x2) + 0.3*tanh(x3) + 0.2*tanh(x4)"),
        ("x6", "0.4*tanh(x5)"),
    ]
    return build_network(decls, rules, name="six_node")
