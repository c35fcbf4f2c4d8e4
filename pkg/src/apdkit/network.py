"""Rooted phylogenetic networks with exact edge data, plus structural queries.

Nodes are dense integers ``0..n-1``.  Edges are identified by their index in
``PhyloNetwork.edges`` so parallel edges are representable.  A network object
is never mutated after construction; derived data is computed lazily and
cached.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import InputError, PreconditionError

__all__ = [
    "Blob",
    "Edge",
    "PhyloNetwork",
    "ValidationReport",
    "Violation",
    "biconnected_components",
    "dead_nodes",
    "immediate_dominators",
    "induce",
    "induce_map",
    "edge_weight_total",
    "invisible_reticulations",
    "is_binary",
    "is_normal",
    "is_reticulation_visible",
    "is_tree_child",
    "is_visible",
    "isomorphic",
    "level",
    "offspring",
    "require_valid",
    "to_fraction",
    "validate",
    "visible_nodes",
    "visible_witness",
]


def to_fraction(value) -> Fraction:
    """Convert a literal to an exact rational.

    Strings may be integers, decimals (``"0.3"``), scientific notation or
    fractions (``"3/10"``).  Floats are read through their shortest decimal
    representation, so ``0.3`` becomes ``3/10`` and not the binary value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InputError(f"non-finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"not a rational literal: {value!r}") from None
    raise InputError(f"not a number: {value!r}")


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    weight: Fraction = Fraction(0)
    prob: Fraction = Fraction(1)


class PhyloNetwork:
    """A rooted DAG with weighted, probability-annotated edges.

    Parameters
    ----------
    n_nodes : int
        Number of nodes; node ids are ``0..n_nodes-1``.
    edges : iterable
        ``Edge`` objects or tuples ``(tail, head[, weight[, prob]])``.
    taxa : mapping
        Leaf node id to taxon name.
    labels : mapping, optional
        Display names of internal nodes; they carry no semantics.

    The constructor only checks that references are in range.  Structural
    requirements (single root, acyclicity, degrees, normality) are reported
    by :func:`validate`.
    """

    def __init__(
        self,
        n_nodes: int,
        edges: Iterable = (),
        taxa: Mapping[int, str] | None = None,
        labels: Mapping[int, str] | None = None,
    ):
        if n_nodes < 0:
            raise InputError("negative node count")
        self.n_nodes = int(n_nodes)
        built = []
        for item in edges:
            if isinstance(item, Edge):
                tail, head, weight, prob = item.tail, item.head, item.weight, item.prob
            else:
                item = tuple(item)
                if not 2 <= len(item) <= 4:
                    raise InputError(f"bad edge record {item!r}")
                tail, head = item[0], item[1]
                weight = item[2] if len(item) > 2 else 0
                prob = item[3] if len(item) > 3 else 1
            for v in (tail, head):
                if not isinstance(v, int) or not 0 <= v < self.n_nodes:
                    raise InputError(f"edge endpoint {v!r} out of range")
            built.append(Edge(tail, head, to_fraction(weight), to_fraction(prob)))
        self.edges: tuple[Edge, ...] = tuple(built)
        taxa = dict(taxa or {})
        labels = dict(labels or {})
        for v, name in list(taxa.items()) + list(labels.items()):
            if not isinstance(v, int) or not 0 <= v < self.n_nodes:
                raise InputError(f"label on unknown node {v!r}")
            if not isinstance(name, str):
                raise InputError(f"label {name!r} of node {v} is not a string")
        self.taxa = MappingProxyType(taxa)
        self.labels = MappingProxyType(labels)

    def __repr__(self):
        return (
            f"PhyloNetwork(n_nodes={self.n_nodes}, edges={len(self.edges)}, "
            f"taxa={sorted(self.taxa.values())})"
        )

    def __eq__(self, other):
        if not isinstance(other, PhyloNetwork):
            return NotImplemented
        return (
            self.n_nodes == other.n_nodes
            and self.edges == other.edges
            and dict(self.taxa) == dict(other.taxa)
            and dict(self.labels) == dict(other.labels)
        )

    __hash__ = None

    # -- adjacency ---------------------------------------------------------

    @cached_property
    def _adjacency(self):
        ins = [[] for _ in range(self.n_nodes)]
        outs = [[] for _ in range(self.n_nodes)]
        for i, e in enumerate(self.edges):
            outs[e.tail].append(i)
            ins[e.head].append(i)
        return tuple(map(tuple, ins)), tuple(map(tuple, outs))

    @property
    def in_edges(self) -> tuple[tuple[int, ...], ...]:
        return self._adjacency[0]

    @property
    def out_edges(self) -> tuple[tuple[int, ...], ...]:
        return self._adjacency[1]

    def parents(self, v: int) -> list[int]:
        return [self.edges[e].tail for e in self.in_edges[v]]

    def children(self, v: int) -> list[int]:
        return [self.edges[e].head for e in self.out_edges[v]]

    def indegree(self, v: int) -> int:
        return len(self.in_edges[v])

    def outdegree(self, v: int) -> int:
        return len(self.out_edges[v])

    @cached_property
    def roots(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_nodes) if not self.in_edges[v])

    @property
    def root(self) -> int:
        if len(self.roots) != 1:
            raise InputError(f"network has {len(self.roots)} roots, expected 1")
        return self.roots[0]

    @cached_property
    def leaves(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_nodes) if not self.out_edges[v])

    @cached_property
    def reticulations(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.n_nodes) if len(self.in_edges[v]) >= 2)

    def is_tree(self) -> bool:
        return not self.reticulations

    def kind(self, v: int) -> str:
        if not self.in_edges[v]:
            return "root"
        if not self.out_edges[v]:
            return "leaf"
        if len(self.in_edges[v]) >= 2:
            return "reticulation"
        return "tree"

    @cached_property
    def _topo(self):
        indeg = [len(x) for x in self.in_edges]
        queue = deque(v for v in range(self.n_nodes) if indeg[v] == 0)
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for e in self.out_edges[v]:
                h = self.edges[e].head
                indeg[h] -= 1
                if indeg[h] == 0:
                    queue.append(h)
        return tuple(order) if len(order) == self.n_nodes else None

    def is_acyclic(self) -> bool:
        return self._topo is not None

    @property
    def topological_order(self) -> tuple[int, ...]:
        if self._topo is None:
            raise InputError("network contains a directed cycle")
        return self._topo

    @cached_property
    def topo_index(self) -> tuple[int, ...]:
        pos = [0] * self.n_nodes
        for i, v in enumerate(self.topological_order):
            pos[v] = i
        return tuple(pos)

    # -- naming ------------------------------------------------------------

    @cached_property
    def taxon_node(self) -> Mapping[str, int]:
        return MappingProxyType({name: v for v, name in self.taxa.items()})

    @property
    def taxon_names(self) -> list[str]:
        return sorted(self.taxa.values())

    def name(self, v: int) -> str:
        if v in self.taxa:
            return self.taxa[v]
        if v in self.labels:
            return self.labels[v]
        return f"#{v}"

    def edge_name(self, e: int) -> str:
        edge = self.edges[e]
        return f"{self.name(edge.tail)}->{self.name(edge.head)}"

    def node(self, ref) -> int:
        """Resolve a node id, taxon name, display label or ``"#id"``."""
        if isinstance(ref, int) and not isinstance(ref, bool):
            if 0 <= ref < self.n_nodes:
                return ref
            raise InputError(f"unknown node id {ref}")
        if isinstance(ref, str):
            if ref in self.taxon_node:
                return self.taxon_node[ref]
            hits = [v for v, name in self.labels.items() if name == ref]
            if len(hits) == 1:
                return hits[0]
            if len(hits) > 1:
                raise InputError(f"ambiguous node label {ref!r}")
            if ref.startswith("#") and ref[1:].isdigit():
                return self.node(int(ref[1:]))
            if ref.isdigit():
                return self.node(int(ref))
        raise InputError(f"unknown node {ref!r}")

    def find_edges(self, u, v) -> list[int]:
        u, v = self.node(u), self.node(v)
        return [e for e in self.out_edges[u] if self.edges[e].head == v]

    def taxon_set(self, taxa) -> frozenset[int]:
        """Resolve taxon names or node ids to a set of leaf ids."""
        out = set()
        for t in taxa:
            v = self.node(t)
            if self.out_edges[v]:
                raise InputError(f"{t!r} is not a leaf")
            out.add(v)
        return frozenset(out)

    # -- derived networks --------------------------------------------------

    def restrict(
        self,
        nodes: Iterable[int],
        edges: Iterable[int] | None = None,
        probs: Mapping[int, Fraction] | None = None,
        extra_taxa: Mapping[int, str] | None = None,
    ) -> tuple["PhyloNetwork", dict[int, int]]:
        """Sub-network on ``nodes`` (renumbered in increasing id order).

        ``edges`` defaults to all edges with both endpoints kept; ``probs``
        overrides the inheritance probability of selected edges and
        ``extra_taxa`` labels kept nodes as taxa.  Returns the network and the
        old-to-new node map.
        """
        kept = sorted(set(nodes))
        remap = {v: i for i, v in enumerate(kept)}
        if edges is None:
            edges = [
                i for i, e in enumerate(self.edges) if e.tail in remap and e.head in remap
            ]
        probs = probs or {}
        new_edges = []
        for i in sorted(edges):
            e = self.edges[i]
            new_edges.append(
                Edge(remap[e.tail], remap[e.head], e.weight, probs.get(i, e.prob))
            )
        taxa = {remap[v]: t for v, t in self.taxa.items() if v in remap}
        for v, t in (extra_taxa or {}).items():
            taxa[remap[v]] = t
        labels = {
            remap[v]: t for v, t in self.labels.items() if v in remap and remap[v] not in taxa
        }
        return PhyloNetwork(len(kept), new_edges, taxa, labels), remap


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    node: int | None = None
    edge: int | None = None


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)
    warnings: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def __str__(self):
        lines = [f"error[{v.code}]: {v.message}" for v in self.violations]
        lines += [f"warning[{v.code}]: {v.message}" for v in self.warnings]
        return "\n".join(lines) if lines else "valid"


def validate(net: PhyloNetwork) -> ValidationReport:
    """List every violated network invariant; an empty report means valid."""
    report = ValidationReport()
    bad = report.violations.append
    if net.n_nodes == 0:
        bad(Violation("empty", "network has no nodes"))
        return report
    if len(net.roots) != 1:
        bad(Violation("roots", f"expected exactly one root, found {list(net.roots)}"))
    if not net.is_acyclic():
        bad(Violation("cycle", "network contains a directed cycle"))
    for v in range(net.n_nodes):
        indeg, outdeg = net.indegree(v), net.outdegree(v)
        if indeg >= 2 and outdeg > 1:
            bad(Violation(
                "degree",
                f"node {net.name(v)} has in-degree {indeg} and out-degree {outdeg}",
                node=v,
            ))
        if outdeg == 0 and v not in net.taxa:
            bad(Violation("unlabeled-leaf", f"leaf {v} carries no taxon", node=v))
        if outdeg > 0 and v in net.taxa:
            bad(Violation(
                "labeled-internal", f"internal node {v} carries taxon {net.taxa[v]!r}", node=v
            ))
    seen: dict[str, int] = {}
    for v, name in net.taxa.items():
        if not name:
            bad(Violation("taxon-name", f"node {v} has an empty taxon name", node=v))
        if name in seen:
            bad(Violation("duplicate-taxon", f"taxon {name!r} labels two nodes", node=v))
        seen[name] = v
    for i, e in enumerate(net.edges):
        if e.weight < 0:
            bad(Violation("weight", f"edge {net.edge_name(i)} has negative weight", edge=i))
        if not 0 < e.prob <= 1:
            bad(Violation(
                "probability",
                f"edge {net.edge_name(i)} has probability {e.prob} outside (0,1]",
                edge=i,
            ))
    for v in range(net.n_nodes):
        ins = net.in_edges[v]
        if ins:
            total = sum((net.edges[e].prob for e in ins), Fraction(0))
            if total != 1:
                bad(Violation(
                    "normality",
                    f"inheritance probabilities into {net.name(v)} sum to {total}",
                    node=v,
                ))
    pairs: dict[tuple[int, int], int] = {}
    for i, e in enumerate(net.edges):
        key = (e.tail, e.head)
        if key in pairs:
            report.warnings.append(Violation(
                "parallel-edge", f"parallel edges {net.edge_name(i)}", edge=i
            ))
        pairs[key] = i
    return report


def require_valid(net: PhyloNetwork) -> None:
    report = validate(net)
    if not report.ok:
        raise InputError(f"invalid network:\n{report}")


def is_normal(net: PhyloNetwork) -> bool:
    return all(
        sum((net.edges[e].prob for e in ins), Fraction(0)) == 1
        for ins in net.in_edges
        if ins
    )


def is_tree_child(net: PhyloNetwork) -> bool:
    """Every non-leaf node has a child that is a tree node or a leaf."""
    return all(
        any(net.indegree(c) == 1 for c in net.children(v))
        for v in range(net.n_nodes)
        if net.out_edges[v]
    )


def is_binary(net: PhyloNetwork) -> bool:
    """Every node has in- and out-degree at most 2 and total degree at most 3."""
    return all(
        net.indegree(v) <= 2
        and net.outdegree(v) <= 2
        and net.indegree(v) + net.outdegree(v) <= 3
        for v in range(net.n_nodes)
    )


# -- reachability ------------------------------------------------------------


@dataclass(frozen=True)
class _LeafBits:
    bits: tuple[int, ...]
    leaves: tuple[int, ...]


def _offspring_bits(net: PhyloNetwork) -> _LeafBits:
    leaves = net.leaves
    index = {leaf: i for i, leaf in enumerate(leaves)}
    bits = [0] * net.n_nodes
    for v in reversed(net.topological_order):
        b = 1 << index[v] if v in index else 0
        for c in net.children(v):
            b |= bits[c]
        bits[v] = b
    return _LeafBits(tuple(bits), leaves)


def offspring(net: PhyloNetwork, v) -> frozenset[int]:
    """Leaves reachable from ``v`` (a leaf is its own offspring)."""
    v = net.node(v)
    seen = {v}
    stack = [v]
    while stack:
        u = stack.pop()
        for c in net.children(u):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(u for u in seen if not net.out_edges[u])


def dead_nodes(net: PhyloNetwork) -> list[int]:
    """Nodes with no path to a taxon-labeled leaf."""
    alive = [False] * net.n_nodes
    for v in reversed(net.topological_order):
        if v in net.taxa and not net.out_edges[v]:
            alive[v] = True
        else:
            alive[v] = any(alive[c] for c in net.children(v))
    return [v for v in range(net.n_nodes) if not alive[v]]


def induce(net: PhyloNetwork, taxa) -> PhyloNetwork:
    """Delete every node whose offspring avoid ``taxa``.

    Inheritance probabilities are kept as they are.  A kept node reaches the
    taxon set, hence so do all of its parents, so no kept node ever loses an
    in-edge and the result stays normal whenever ``net`` is.
    """
    Z = net.taxon_set(taxa)
    if not Z:
        raise InputError("taxon set must be non-empty")
    if Z == frozenset(net.leaves):
        return net
    return induce_map(net, Z)[0]


def induce_map(net: PhyloNetwork, taxa) -> tuple[PhyloNetwork, dict[int, int]]:
    """Like :func:`induce`, also returning the old-to-new node map."""
    Z = net.taxon_set(taxa)
    if not Z:
        raise InputError("taxon set must be non-empty")
    lb = _offspring_bits(net)
    index = {leaf: i for i, leaf in enumerate(lb.leaves)}
    mask = 0
    for z in Z:
        mask |= 1 << index[z]
    keep = [v for v in range(net.n_nodes) if lb.bits[v] & mask]
    return net.restrict(keep)


# -- visibility --------------------------------------------------------------


def _reachable_avoiding(net: PhyloNetwork, avoid: int) -> list[bool]:
    seen = [False] * net.n_nodes
    root = net.root
    if root == avoid:
        return seen
    seen[root] = True
    stack = [root]
    while stack:
        u = stack.pop()
        for c in net.children(u):
            if c != avoid and not seen[c]:
                seen[c] = True
                stack.append(c)
    return seen


def visible_witness(net: PhyloNetwork, v) -> int | None:
    """A leaf all of whose root paths pass through ``v``, or ``None``.

    Computed by deleting ``v`` and checking which of its offspring become
    unreachable from the root.  Returns the smallest such leaf id.
    """
    v = net.node(v)
    if not net.out_edges[v]:
        return v
    seen = _reachable_avoiding(net, v)
    hidden = [leaf for leaf in offspring(net, v) if not seen[leaf]]
    return min(hidden) if hidden else None


def is_visible(net: PhyloNetwork, v) -> bool:
    return visible_witness(net, v) is not None


def immediate_dominators(net: PhyloNetwork, counter: list[int] | None = None) -> list[int]:
    """Immediate dominator of every node; the root maps to itself.

    One pass in topological order suffices on a DAG: the immediate dominator
    of a node is the dominator-tree LCA of its parents.
    """
    root = net.root
    idom = [-1] * net.n_nodes
    depth = [0] * net.n_nodes
    idom[root] = root
    steps = 0
    for v in net.topological_order:
        if v == root:
            continue
        ps = net.parents(v)
        a = ps[0]
        for b in ps[1:]:
            while a != b:
                steps += 1
                if depth[a] > depth[b]:
                    a = idom[a]
                elif depth[b] > depth[a]:
                    b = idom[b]
                else:
                    a, b = idom[a], idom[b]
        idom[v] = a
        depth[v] = depth[a] + 1
        steps += len(ps)
    if counter is not None:
        counter[0] += steps
    return idom


def visible_nodes(net: PhyloNetwork, counter: list[int] | None = None) -> frozenset[int]:
    """All visible nodes, via the dominator tree (dominates some leaf)."""
    idom = immediate_dominators(net, counter)
    vis = [False] * net.n_nodes
    root = net.root
    for v in reversed(net.topological_order):
        if not net.out_edges[v]:
            vis[v] = True
        if vis[v] and v != root:
            vis[idom[v]] = True
    if counter is not None:
        counter[0] += net.n_nodes
    return frozenset(v for v in range(net.n_nodes) if vis[v])


def invisible_reticulations(net: PhyloNetwork) -> frozenset[int]:
    vis = visible_nodes(net)
    return frozenset(r for r in net.reticulations if r not in vis)


def is_reticulation_visible(net: PhyloNetwork) -> bool:
    return not invisible_reticulations(net)


# -- biconnected components --------------------------------------------------


@dataclass(frozen=True)
class Blob:
    """A biconnected component of the underlying undirected multigraph."""

    nodes: frozenset[int]
    edges: frozenset[int]
    root: int
    reticulations: frozenset[int]

    @property
    def trivial(self) -> bool:
        return len(self.edges) == 1


def biconnected_components(net: PhyloNetwork) -> list[Blob]:
    """Edge-partition into biconnected components, lowest roots first.

    Parallel edges are distinct, so a doubled edge forms its own component.
    Components are ordered by decreasing topological position of their root.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(net.n_nodes)]
    for i, e in enumerate(net.edges):
        adj[e.tail].append((e.head, i))
        adj[e.head].append((e.tail, i))
    disc = [-1] * net.n_nodes
    low = [0] * net.n_nodes
    clock = 0
    estack: list[int] = []
    comps: list[list[int]] = []
    for s in range(net.n_nodes):
        if disc[s] != -1 or not adj[s]:
            continue
        disc[s] = low[s] = clock
        clock += 1
        stack = [(s, -1, iter(adj[s]))]
        while stack:
            u, pe, it = stack[-1]
            descended = False
            for w, e in it:
                if e == pe:
                    continue
                if disc[w] == -1:
                    estack.append(e)
                    disc[w] = low[w] = clock
                    clock += 1
                    stack.append((w, e, iter(adj[w])))
                    descended = True
                    break
                if disc[w] < disc[u]:
                    estack.append(e)
                    low[u] = min(low[u], disc[w])
            if descended:
                continue
            stack.pop()
            if stack:
                p = stack[-1][0]
                low[p] = min(low[p], low[u])
                if low[u] >= disc[p]:
                    comp = []
                    while True:
                        e = estack.pop()
                        comp.append(e)
                        if e == pe:
                            break
                    comps.append(comp)
    pos = net.topo_index
    blobs = []
    for comp in comps:
        heads = {net.edges[e].head for e in comp}
        nodes = heads | {net.edges[e].tail for e in comp}
        tops = nodes - heads
        if len(tops) != 1:
            raise PreconditionError(f"component without unique root: {sorted(tops)}")
        (top,) = tops
        retics = frozenset(v for v in nodes if v != top and net.indegree(v) >= 2)
        blobs.append(Blob(frozenset(nodes), frozenset(comp), top, retics))
    blobs.sort(key=lambda b: (-pos[b.root], min(b.edges)))
    return blobs


def level(net: PhyloNetwork) -> int:
    return max((len(b.reticulations) for b in biconnected_components(net)), default=0)


# -- isomorphism -------------------------------------------------------------


def isomorphic(a: PhyloNetwork, b: PhyloNetwork) -> bool:
    """Taxon-preserving isomorphism with identical edge weights and probabilities."""
    import networkx as nx
    from networkx.algorithms.isomorphism import (
        DiGraphMatcher,
        categorical_multiedge_match,
    )

    def as_nx(net):
        g = nx.MultiDiGraph()
        for v in range(net.n_nodes):
            g.add_node(v, taxon=net.taxa.get(v))
        for e in net.edges:
            g.add_edge(e.tail, e.head, data=(e.weight, e.prob))
        return g

    if (a.n_nodes, len(a.edges)) != (b.n_nodes, len(b.edges)):
        return False
    if sorted(a.taxa.values()) != sorted(b.taxa.values()):
        return False
    matcher = DiGraphMatcher(
        as_nx(a),
        as_nx(b),
        node_match=lambda x, y: x["taxon"] == y["taxon"],
        edge_match=categorical_multiedge_match("data", None),
    )
    return matcher.is_isomorphic()


def edge_weight_total(net: PhyloNetwork, edges: Sequence[int] | None = None) -> Fraction:
    idx = range(len(net.edges)) if edges is None else edges
    return sum((net.edges[i].weight for i in idx), Fraction(0))
