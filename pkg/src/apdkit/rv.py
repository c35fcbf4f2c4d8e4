"""Linear-time APD on reticulation-visible networks.

If the head of ``uv`` is visible, the edge reaches a leaf exactly when it is
present, so its routing probability is ``p_I(uv)``.  An invisible node is a
tree node whose tree-node descendants are all invisible and end in
reticulations; it reaches a leaf unless every edge into such a reticulation
from its tree component is switched off, independently per reticulation.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import NotReticulationVisibleError, PreconditionError
from .network import PhyloNetwork, dead_nodes, require_valid, visible_nodes

__all__ = ["apd_rv", "edge_gammas_rv", "gamma_rv", "gamma_rv_reference"]


def _prepare(net: PhyloNetwork, counter):
    require_valid(net)
    dead = dead_nodes(net)
    if dead:
        names = ", ".join(net.name(v) for v in dead)
        raise PreconditionError(
            f"nodes without a leaf below them: {names}; induce the network first"
        )
    vis = visible_nodes(net, counter)
    hidden = sorted(r for r in net.reticulations if r not in vis)
    if hidden:
        names = ", ".join(net.name(r) for r in hidden)
        raise NotReticulationVisibleError(hidden, f"invisible reticulations: {names}")
    return vis


def edge_gammas_rv(net: PhyloNetwork, counter: list[int] | None = None) -> list[Fraction]:
    """Routing probability of every edge, in one bottom-up sweep.

    Each invisible node keeps a map from the reticulations below its tree
    component to the summed probability of edges entering them from that
    component, together with the product of ``1 - sum`` over the map.
    Child maps are merged into the largest one.  ``counter[0]`` is
    incremented by the number of elementary steps taken.
    """
    steps = [0]
    vis = _prepare(net, steps)
    edges = net.edges
    one = Fraction(1)
    state: dict[int, tuple[dict[int, Fraction], Fraction]] = {}
    miss = [one] * net.n_nodes  # probability that an invisible node reaches no leaf
    for v in reversed(net.topological_order):
        steps[0] += 1
        if v in vis:
            continue
        big: dict[int, Fraction] = {}
        prod = one
        for e in net.out_edges[v]:
            steps[0] += 1
            c = edges[e].head
            if net.indegree(c) >= 2:
                small = {c: edges[e].prob}
                sprod = one - edges[e].prob
            else:
                small, sprod = state.pop(c)
            if len(small) > len(big):
                big, small, prod, sprod = small, big, sprod, prod
            for r, s in small.items():
                steps[0] += 1
                old = big.get(r)
                if old is None:
                    big[r] = s
                    prod *= one - s
                else:
                    prod = prod / (one - old) * (one - old - s)
                    big[r] = old + s
        state[v] = (big, prod)
        miss[v] = prod
    gam = []
    for e in edges:
        steps[0] += 1
        h = e.head
        gam.append(e.prob if h in vis else e.prob * (one - miss[h]))
    if counter is not None:
        counter[0] += steps[0]
    return gam


def gamma_rv(net: PhyloNetwork, edge: int) -> Fraction:
    return edge_gammas_rv(net)[edge]


def apd_rv(net: PhyloNetwork, counter: list[int] | None = None) -> Fraction:
    """APD of all leaves of a reticulation-visible network."""
    gam = edge_gammas_rv(net, counter)
    return sum((e.weight * g for e, g in zip(net.edges, gam)), Fraction(0))


def gamma_rv_reference(net: PhyloNetwork, edge: int) -> Fraction:
    """The same closed form, evaluated per edge by explicit tree-path search."""
    vis = _prepare(net, None)
    e = net.edges[edge]
    v = e.head
    if v in vis:
        return e.prob
    into: dict[int, Fraction] = {}
    stack = [v]
    while stack:
        x = stack.pop()
        for i in net.out_edges[x]:
            c = net.edges[i].head
            if net.indegree(c) >= 2:
                into[c] = into.get(c, Fraction(0)) + net.edges[i].prob
            else:
                stack.append(c)
    prod = Fraction(1)
    for s in into.values():
        prod *= 1 - s
    return e.prob * (1 - prod)
