"""General APD engine: enumerate invisible reticulations only, blob by blob."""

from __future__ import annotations

from fractions import Fraction

from .errors import PreconditionError, ResourceError
from .network import (
    Edge,
    PhyloNetwork,
    biconnected_components,
    dead_nodes,
    invisible_reticulations,
    require_valid,
)
from .rv import apd_rv
from .switching import enumerate_switchings, switching_cap, switching_count

__all__ = [
    "apd_by_invisible_switching",
    "apd_decomposed",
    "blob_switching_cost",
    "pendant_part",
    "switch_residue",
]


def _check(net: PhyloNetwork) -> None:
    require_valid(net)
    dead = dead_nodes(net)
    if dead:
        names = ", ".join(net.name(v) for v in dead)
        raise PreconditionError(
            f"nodes without a leaf below them: {names}; induce the network first"
        )


def switch_residue(net: PhyloNetwork, choices: dict[int, int]) -> PhyloNetwork:
    """Keep one in-edge per switched node (with probability 1), then drop
    every node left without a path to a leaf."""
    dropped = {
        e for r, keep in choices.items() for e in net.in_edges[r] if e != keep
    }
    alive = [False] * net.n_nodes
    for v in reversed(net.topological_order):
        if not net.out_edges[v]:
            alive[v] = v in net.taxa
            continue
        alive[v] = any(
            alive[net.edges[e].head] for e in net.out_edges[v] if e not in dropped
        )
    nodes = [v for v in range(net.n_nodes) if alive[v]]
    edges = [
        i
        for i, e in enumerate(net.edges)
        if i not in dropped and alive[e.tail] and alive[e.head]
    ]
    probs = {keep: Fraction(1) for keep in choices.values()}
    return net.restrict(nodes, edges, probs)[0]


def apd_by_invisible_switching(
    net: PhyloNetwork, cap: int | None = None, _checked: bool = False
) -> Fraction:
    """Sum of P(sigma) * APD(residue) over switchings of the invisible
    reticulations; each residue is handled by the visible-only engine."""
    if not _checked:
        _check(net)
    hidden = sorted(invisible_reticulations(net))
    if not hidden:
        return apd_rv(net)
    count = switching_count(net, hidden)
    limit = switching_cap(cap)
    if count > limit:
        raise ResourceError(
            f"{count} partial switchings of invisible reticulations exceed the cap {limit}"
        )
    total = Fraction(0)
    for sigma in enumerate_switchings(net, hidden):
        assert sigma.scope == frozenset(hidden)
        choices = sigma.as_dict()
        prob = Fraction(1)
        for e in choices.values():
            prob *= net.edges[e].prob
        if not prob:
            continue
        residue = switch_residue(net, choices)
        # residues are expected to be reticulation-visible; recurse if not
        total += prob * apd_by_invisible_switching(residue, cap, _checked=True)
    return total


def _descendants(net: PhyloNetwork, starts) -> set[int]:
    seen = set(starts)
    stack = list(starts)
    while stack:
        for c in net.children(stack.pop()):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return seen


def pendant_part(net: PhyloNetwork, blob) -> tuple[PhyloNetwork, set[int]]:
    """The blob with everything hanging below it, rooted at the blob root.

    Returns the sub-network and the set of its nodes other than the root.
    """
    below = _descendants(net, [v for v in blob.nodes if v != blob.root])
    edges = [
        i
        for i, e in enumerate(net.edges)
        if e.head in below and (e.tail in below or i in blob.edges)
    ]
    sub, _ = net.restrict(below | {blob.root}, edges)
    return sub, below


def blob_switching_cost(net: PhyloNetwork) -> int:
    """Largest number of partial switchings any single blob needs."""
    worst = 1
    for blob in biconnected_components(net):
        if blob.trivial:
            continue
        part, _ = pendant_part(net, blob)
        hidden = invisible_reticulations(part)
        worst = max(worst, switching_count(part, hidden))
    return worst


def _fresh_taxon(net: PhyloNetwork, k: int) -> str:
    name = f"_blob{k}"
    while name in net.taxon_node:
        name += "_"
    return name


def apd_decomposed(net: PhyloNetwork, cap: int | None = None) -> Fraction:
    """APD of all leaves, peeling off lowest blobs one at a time.

    Each lowest blob is evaluated together with the trees hanging below it,
    then replaced by a leaf at its root: the root itself when nothing else
    hangs from it, otherwise a new zero-weight pendant leaf so that the root
    still reaches a leaf in every switching of the remainder.
    """
    _check(net)
    total = Fraction(0)
    cur = net
    k = 0
    while True:
        blobs = [b for b in biconnected_components(cur) if not b.trivial]
        if not blobs:
            return total + sum((e.weight for e in cur.edges), Fraction(0))
        blob = blobs[0]
        part, below = pendant_part(cur, blob)
        total += apd_by_invisible_switching(part, cap, _checked=True)
        rho = blob.root
        keep = [v for v in range(cur.n_nodes) if v not in below]
        remaining = [
            i for i, e in enumerate(cur.edges) if e.tail not in below and e.head not in below
        ]
        name = _fresh_taxon(cur, k)
        k += 1
        if any(cur.edges[i].tail == rho for i in remaining):
            sub, remap = cur.restrict(keep, remaining)
            edges = list(sub.edges) + [Edge(remap[rho], sub.n_nodes, Fraction(0), Fraction(1))]
            taxa = dict(sub.taxa)
            taxa[sub.n_nodes] = name
            cur = PhyloNetwork(sub.n_nodes + 1, edges, taxa, sub.labels)
        else:
            cur, _ = cur.restrict(keep, remaining, extra_taxa={rho: name})
