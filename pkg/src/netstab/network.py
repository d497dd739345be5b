"""Network model: nodes with domains, delayed update rules, and the
derived interaction graph.

A network holds one update expression per node.  ``T`` is always
``1 + max referenced delay``; a network with ``T == 1`` is undelayed.
Networks are immutable after construction and all queries are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expr as ex
from .errors import NetworkError, ParseError
from .expr import Const, Expr, Interval, Var

__all__ = [
    "TimeDelayedNetwork",
    "InteractionGraph",
    "CohenGrossbergParams",
    "build_network",
    "network_from_exprs",
    "make_cohen_grossberg",
    "interaction_graph",
    "is_non_distributed",
    "max_delay_profile",
    "load_network",
    "dump_network",
]

DEFAULT_DELAY_CAP = 64


@dataclass(frozen=True)
class CohenGrossbergParams:
    """Parameters a Cohen-Grossberg builder call was made with.

    Kept on the network so the analyzer can also report the closed-form
    criterion |1 - eps| + L * rho(|W|).
    """

    weights: tuple[tuple[float, ...], ...]
    epsilon: float
    lipschitz: float


@dataclass(frozen=True)
class TimeDelayedNetwork:
    nodes: tuple[str, ...]
    domains: dict[str, Interval]
    updates: dict[str, Expr]
    T: int
    name: str = ""
    cg: CohenGrossbergParams | None = field(default=None, compare=False)

    def update(self, node: str) -> Expr:
        return self.updates[node]

    def domain(self, node: str) -> Interval:
        return self.domains[node]

    @property
    def size(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class InteractionGraph:
    """Directed dependency graph; edge (i, j) means update j reads node i,
    labeled with the set of delays at which it does."""

    vertices: tuple[str, ...]
    edges: dict[tuple[str, str], frozenset[int]]

    def successors(self, v: str) -> list[str]:
        return sorted(t for (s, t) in self.edges if s == v)

    def predecessors(self, v: str) -> list[str]:
        return sorted(s for (s, t) in self.edges if t == v)

    def has_edge(self, src: str, tgt: str) -> bool:
        return (src, tgt) in self.edges


def _validate(nodes, domains, updates, T, delay_cap):
    declared = set(nodes)
    max_delay = 0
    for node in nodes:
        for ref_node, delay in ex.references(updates[node]):
            if ref_node not in declared:
                raise NetworkError(
                    f"update of {node!r} references undeclared node {ref_node!r}"
                )
            if delay > delay_cap:
                raise NetworkError(
                    f"update of {node!r} references {ref_node!r} at delay "
                    f"{delay}, above the cap {delay_cap}"
                )
            max_delay = max(max_delay, delay)
    if T != max_delay + 1:
        raise NetworkError(f"T = {T} but maximum referenced delay is {max_delay}")
    for node in nodes:
        dom = domains[node]
        if dom.lo == math.inf or dom.hi == -math.inf:
            raise NetworkError(f"empty domain for node {node!r}")


def network_from_exprs(
    nodes: tuple[str, ...] | list[str],
    domains: dict[str, Interval],
    updates: dict[str, Expr],
    name: str = "",
    cg: CohenGrossbergParams | None = None,
    run_normalize: bool = True,
    delay_cap: int = DEFAULT_DELAY_CAP,
) -> TimeDelayedNetwork:
    """Assemble a network from already-built expression trees.

    Updates are normalized by default so that terms multiplied by a
    literal zero (and exactly cancelling terms) drop out and the
    interaction graph reflects true dependence.
    """
    nodes = tuple(nodes)
    if run_normalize:
        updates = {n: ex.normalize(u) for n, u in updates.items()}
    max_delay = 0
    for u in updates.values():
        for _, d in ex.references(u):
            max_delay = max(max_delay, d)
    net = TimeDelayedNetwork(
        nodes=nodes,
        domains=dict(domains),
        updates=dict(updates),
        T=max_delay + 1,
        name=name,
        cg=cg,
    )
    _validate(net.nodes, net.domains, net.updates, net.T, delay_cap)
    return net


def build_network(
    declarations: list[tuple[str, Interval]],
    rules: list[tuple[str, str]],
    name: str = "",
    delay_cap: int = DEFAULT_DELAY_CAP,
) -> TimeDelayedNetwork:
    """Parse and validate a network from per-node rule text.

    ``declarations`` lists (node id, domain) in order; ``rules`` must
    cover each declared node exactly once.
    """
    nodes = tuple(n for n, _ in declarations)
    if len(set(nodes)) != len(nodes):
        raise NetworkError("duplicate node declaration")
    domains = {n: dom for n, dom in declarations}
    declared = set(nodes)

    seen: set[str] = set()
    updates: dict[str, Expr] = {}
    for node, text in rules:
        if node not in declared:
            raise NetworkError(f"rule for undeclared node {node!r}")
        if node in seen:
            raise NetworkError(f"duplicate rule for node {node!r}")
        seen.add(node)
        try:
            updates[node] = ex.parse_expression(text, declared)
        except ParseError as err:
            raise NetworkError(f"rule for {node!r}: {err}") from err
    missing = declared - seen
    if missing:
        raise NetworkError(f"missing rules for nodes {sorted(missing)}")
    return network_from_exprs(nodes, domains, updates, name=name, delay_cap=delay_cap)


def make_cohen_grossberg(
    W,
    epsilon: float,
    activation: str = "tanh",
    b: float = 1.0,
    c=None,
    delays=None,
    self_delays=None,
    name: str = "",
) -> TimeDelayedNetwork:
    """Discrete-time Cohen-Grossberg network, optionally with delays.

    Node j updates to ``(1-eps)*xj[-sj] + sum_i W[i,j]*phi(xi[-tau[i,j]]) + cj``
    where phi is ``tanh(b*.)`` or the scaled identity ``b*.`` and ``sj`` is
    the j-th self-delay.  Terms with zero weight are omitted, so the
    interaction graph matches the mathematical dependency set.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise NetworkError(f"weight matrix must be square, got shape {W.shape}")
    n = W.shape[0]
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float)
    delays = np.zeros((n, n), dtype=int) if delays is None else np.asarray(delays, dtype=int)
    self_delays = (
        np.zeros(n, dtype=int) if self_delays is None else np.asarray(self_delays, dtype=int)
    )
    if c.shape != (n,) or delays.shape != (n, n) or self_delays.shape != (n,):
        raise NetworkError("c, delays and self_delays must match the weight shape")
    if activation not in ("tanh", "identity"):
        raise NetworkError(f"unknown activation {activation!r}")

    def phi(arg: Expr) -> Expr:
        scaled = ex.BinOp("*", Const(b), arg) if b != 1.0 else arg
        if activation == "tanh":
            return ex.Call("tanh", scaled)
        return scaled

    nodes = tuple(f"x{j + 1}" for j in range(n))
    updates: dict[str, Expr] = {}
    for j in range(n):
        terms: list[Expr] = []
        leak = 1.0 - epsilon
        if leak != 0.0:
            terms.append(
                ex.BinOp("*", Const(leak), Var(nodes[j], int(self_delays[j])))
            )
        for i in range(n):
            if W[i, j] == 0.0:
                continue
            terms.append(
                ex.BinOp(
                    "*", Const(W[i, j]), phi(Var(nodes[i], int(delays[i, j])))
                )
            )
        if c[j] != 0.0:
            terms.append(Const(c[j]))
        if not terms:
            updates[nodes[j]] = Const(0.0)
        else:
            update = terms[0]
            for t in terms[1:]:
                update = ex.BinOp("+", update, t)
            updates[nodes[j]] = update

    domains = {node: Interval.whole() for node in nodes}
    cg = CohenGrossbergParams(
        weights=tuple(tuple(row) for row in W),
        epsilon=float(epsilon),
        lipschitz=abs(b),
    )
    return network_from_exprs(nodes, domains, updates, name=name, cg=cg)


def interaction_graph(net: TimeDelayedNetwork) -> InteractionGraph:
    """Edge (i, j) with its exact delay set, for every read of i by j."""
    edges: dict[tuple[str, str], set[int]] = {}
    for target in net.nodes:
        for source, delay in ex.references(net.updates[target]):
            edges.setdefault((source, target), set()).add(delay)
    return InteractionGraph(
        vertices=net.nodes,
        edges={k: frozenset(v) for k, v in edges.items()},
    )


def is_non_distributed(net: TimeDelayedNetwork) -> bool:
    """True iff every update reads each source node at a single delay."""
    for target in net.nodes:
        delays_by_source: dict[str, set[int]] = {}
        for source, delay in ex.references(net.updates[target]):
            delays_by_source.setdefault(source, set()).add(delay)
        if any(len(ds) > 1 for ds in delays_by_source.values()):
            return False
    return True


def max_delay_profile(net: TimeDelayedNetwork) -> dict[str, int]:
    """Per source node, the maximum delay at which anything reads it."""
    profile = {node: 0 for node in net.nodes}
    for target in net.nodes:
        for source, delay in ex.references(net.updates[target]):
            profile[source] = max(profile[source], delay)
    return profile


# ---------------------------------------------------------------------------
# network file format


def _fmt_bound(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(v)


def dump_network(net: TimeDelayedNetwork) -> str:
    """Serialize to the text format accepted by :func:`load_network`."""
    lines = [f"network {net.name or 'unnamed'}"]
    for node in net.nodes:
        dom = net.domains[node]
        lines.append(f"node {node} domain [{_fmt_bound(dom.lo)},{_fmt_bound(dom.hi)}]")
    for node in net.nodes:
        lines.append(f"update {node} = {ex.to_text(net.updates[node])}")
    return "\n".join(lines) + "\n"


def _parse_bound(text: str, lineno: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise NetworkError(f"line {lineno}: bad domain bound {text!r}") from None


def load_network(text: str, name_hint: str = "") -> TimeDelayedNetwork:
    """Parse the network file format.

    Lines: ``network <name>``, then ``node <id> domain [<lo>,<hi>]`` per
    node (``-inf``/``inf`` allowed), then ``update <id> = <expression>``.
    ``#`` starts a comment.
    """
    name = name_hint
    declarations: list[tuple[str, Interval]] = []
    rules: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 1)
        keyword = parts[0]
        rest = parts[1] if len(parts) > 1 else ""
        if keyword == "network":
            name = rest.strip()
        elif keyword == "node":
            fields = rest.split()
            if len(fields) != 3 or fields[1] != "domain":
                raise NetworkError(f"line {lineno}: expected 'node <id> domain [lo,hi]'")
            ident, _, dom_text = fields
            dom_text = dom_text.strip()
            if not (dom_text.startswith("[") and dom_text.endswith("]")):
                raise NetworkError(f"line {lineno}: domain must look like [lo,hi]")
            bounds = dom_text[1:-1].split(",")
            if len(bounds) != 2:
                raise NetworkError(f"line {lineno}: domain must have two bounds")
            lo = _parse_bound(bounds[0].strip(), lineno)
            hi = _parse_bound(bounds[1].strip(), lineno)
            try:
                declarations.append((ident, Interval(lo, hi)))
            except ValueError as err:
                raise NetworkError(f"line {lineno}: {err}") from None
        elif keyword == "update":
            if "=" not in rest:
                raise NetworkError(f"line {lineno}: expected 'update <id> = <expr>'")
            ident, expr_text = rest.split("=", 1)
            rules.append((ident.strip(), expr_text.strip()))
        else:
            raise NetworkError(f"line {lineno}: unknown keyword {keyword!r}")
    if not declarations:
        raise NetworkError("no node declarations found")
    return build_network(declarations, rules, name=name)
