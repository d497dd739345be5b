"""Restriction and expansion of undelayed networks over a structural set.

All three transforms share one inlining pass: starting from the update of
an S node, every read of a non-S node is replaced by that node's update,
depth-first and leftmost-innermost, until only S-variable leaves remain.
Each leaf then carries the branch (the S-to-S dependency chain) it came
through, and the transforms differ only in what the leaf reads:

* restrict: the source node directly (delay 0),
* delayed expansion: the source node at delay |branch| - 2,
* expand: a chain of identity coordinates keyed by the full branch.
"""

from __future__ import annotations

from dataclasses import dataclass

from .delays import AugmentedNetwork, StateIndex
from .errors import TransformError
from .expr import BinOp, Call, Expr, Var
from .network import TimeDelayedNetwork, interaction_graph, network_from_exprs
from .structural import admissible_sequences, is_complete_structural

__all__ = ["InlineTrace", "inline_traces", "restrict", "expand", "delayed_expansion"]


@dataclass(frozen=True)
class InlineTrace:
    """Branch carried by each leaf of one inlined component, in
    depth-first traversal order."""

    component: str
    leaves: tuple[tuple[str, ...], ...]


def _check_preconditions(net: TimeDelayedNetwork, S) -> tuple[str, ...]:
    if net.T != 1:
        raise TransformError(
            f"network has T = {net.T}; restriction and expansion are defined "
            "for undelayed networks (undelay or dedelay first)"
        )
    requested = set(S)
    unknown = requested - set(net.nodes)
    if unknown:
        raise TransformError(f"not nodes of the network: {sorted(unknown)}")
    S = tuple(n for n in net.nodes if n in requested)
    graph = interaction_graph(net)
    if not is_complete_structural(graph, S):
        raise TransformError(
            f"{{{', '.join(S)}}} is not a complete structural set; inlining "
            "would not terminate"
        )
    return S


def _inline_component(
    net: TimeDelayedNetwork,
    in_s: set[str],
    target: str,
    leaf_reader,
    leaves: list[tuple[str, ...]],
) -> Expr:
    def subst(e: Expr, chain: tuple[str, ...]) -> Expr:
        if isinstance(e, Var):
            if e.node in in_s:
                branch = (e.node,) + chain
                leaves.append(branch)
                return leaf_reader(branch)
            if e.node in chain:
                raise TransformError(
                    f"cycle through {e.node!r} avoids S; set is not complete"
                )
            return subst(net.updates[e.node], (e.node,) + chain)
        if isinstance(e, Call):
            return Call(e.func, subst(e.arg, chain))
        if isinstance(e, BinOp):
            return BinOp(e.op, subst(e.left, chain), subst(e.right, chain))
        return e

    return subst(net.updates[target], (target,))


def inline_traces(net: TimeDelayedNetwork, S) -> tuple[InlineTrace, ...]:
    """Branches encountered while inlining each S component."""
    S = _check_preconditions(net, S)
    in_s = set(S)
    traces = []
    for target in S:
        leaves: list[tuple[str, ...]] = []
        _inline_component(net, in_s, target, lambda br: Var(br[0], 0), leaves)
        traces.append(InlineTrace(component=target, leaves=tuple(leaves)))
    return tuple(traces)


def restrict(net: TimeDelayedNetwork, S) -> TimeDelayedNetwork:
    """Inline every non-S node away; the result lives on S with T = 1."""
    S = _check_preconditions(net, S)
    in_s = set(S)
    updates = {
        target: _inline_component(net, in_s, target, lambda br: Var(br[0], 0), [])
        for target in S
    }
    domains = {n: net.domains[n] for n in S}
    return network_from_exprs(
        S, domains, updates, name=f"{net.name}|restricted" if net.name else ""
    )


def delayed_expansion(net: TimeDelayedNetwork, S) -> TimeDelayedNetwork:
    """Like restrict, but each leaf reads its source |branch| - 2 steps in
    the past (length-2 branches read the present).  Removing these delays
    again recovers the restriction exactly."""
    S = _check_preconditions(net, S)
    in_s = set(S)
    updates = {
        target: _inline_component(
            net, in_s, target, lambda br: Var(br[0], len(br) - 2), []
        )
        for target in S
    }
    domains = {n: net.domains[n] for n in S}
    return network_from_exprs(
        S, domains, updates, name=f"{net.name}|delayed" if net.name else ""
    )


def expand(net: TimeDelayedNetwork, S) -> AugmentedNetwork:
    """Inlined network on S plus identity delay chains, one chain of
    |branch| - 2 coordinates per admissible branch.

    Distinct branches with the same source get distinct chains, so the
    state dimension is |S| + sum over admissible branches of (length - 2).
    """
    S = _check_preconditions(net, S)
    in_s = set(S)
    graph = interaction_graph(net)
    admissible = admissible_sequences(graph, S)

    taken = set(net.nodes)
    coord_name: dict[tuple[tuple[str, ...], int], str] = {}
    for br in admissible:
        gamma = br.vertices
        for i in range(2, len(gamma)):
            base = "_".join(gamma) + f"_s{i}"
            name = base
            k = 2
            while name in taken:
                name = f"{base}_{k}"
                k += 1
            taken.add(name)
            coord_name[(gamma, i)] = name

    def leaf_reader(branch: tuple[str, ...]) -> Expr:
        if len(branch) == 2:
            return Var(branch[0], 0)
        key = (branch, len(branch) - 1)
        if key not in coord_name:
            raise TransformError(
                f"inlining produced branch {'->'.join(branch)} outside the "
                "admissible set"
            )
        return Var(coord_name[key], 0)

    coords: list[str] = list(S)
    indices: list[StateIndex] = [StateIndex(n, 0) for n in S]
    projection: dict[str, tuple[str, int]] = {n: (n, 0) for n in S}
    updates: dict[str, Expr] = {}
    domains = {n: net.domains[n] for n in S}

    for target in S:
        updates[target] = _inline_component(net, in_s, target, leaf_reader, [])

    for br in admissible:
        gamma = br.vertices
        for i in range(2, len(gamma)):
            name = coord_name[(gamma, i)]
            coords.append(name)
            indices.append(StateIndex(gamma[0], i - 1))
            projection[name] = (gamma[0], i - 1)
            domains[name] = net.domains[gamma[0]]
            updates[name] = (
                Var(gamma[0], 0) if i == 2 else Var(coord_name[(gamma, i - 1)], 0)
            )

    expanded = network_from_exprs(
        tuple(coords),
        domains,
        updates,
        name=f"{net.name}|expanded" if net.name else "",
    )
    return AugmentedNetwork(
        net=expanded,
        coords=tuple(coords),
        indices=tuple(indices),
        projection=projection,
    )
