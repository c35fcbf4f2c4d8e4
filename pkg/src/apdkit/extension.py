"""Tree-extensions, their bags and widths, and scanwidth search."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .errors import ContractError, InputError, ResourceError
from .network import PhyloNetwork

__all__ = [
    "ExtensionReport",
    "TreeExtension",
    "bags",
    "bags_direct",
    "extension_from_order",
    "restrict_extension",
    "scanwidth_exact",
    "scanwidth_heuristic",
    "validate_extension",
    "width",
]


@dataclass(frozen=True)
class TreeExtension:
    """A rooted tree on the node set of a network, given as a parent array."""

    parent: tuple[int | None, ...]

    @classmethod
    def from_parents(cls, parent: Sequence[int | None]) -> "TreeExtension":
        return cls(tuple(None if p is None else int(p) for p in parent))

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        kids: list[list[int]] = [[] for _ in self.parent]
        for v, p in enumerate(self.parent):
            if p is not None:
                kids[p].append(v)
        return tuple(tuple(k) for k in kids)

    @cached_property
    def root(self) -> int:
        roots = [v for v, p in enumerate(self.parent) if p is None]
        if len(roots) != 1:
            raise ContractError(f"extension has {len(roots)} roots")
        return roots[0]

    def postorder(self) -> list[int]:
        out = []
        stack = [(self.root, False)]
        while stack:
            v, done = stack.pop()
            if done:
                out.append(v)
                continue
            stack.append((v, True))
            for c in reversed(self.children[v]):
                stack.append((c, False))
        return out

    def to_json(self, net: PhyloNetwork | None = None) -> str:
        doc = {"parent": list(self.parent)}
        if net is not None:
            doc["names"] = [net.name(v) for v in range(net.n_nodes)]
        return json.dumps(doc, indent=1)

    @classmethod
    def from_json(cls, text: str, net: PhyloNetwork | None = None) -> "TreeExtension":
        """Read ``{"parent": [...]}`` (ids) or ``{"parent": {child: parent}}`` (names)."""
        try:
            doc = json.loads(text)
            parent = doc["parent"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"malformed extension JSON: {exc}") from None
        if isinstance(parent, dict):
            if net is None:
                raise InputError("named extension needs the network to resolve names")
            arr: list[int | None] = [None] * net.n_nodes
            for child, par in parent.items():
                arr[net.node(child)] = None if par is None else net.node(par)
            return cls.from_parents(arr)
        if not isinstance(parent, list):
            raise InputError("extension 'parent' must be a list or an object")
        for p in parent:
            if p is not None and not isinstance(p, int):
                raise InputError(f"bad parent entry {p!r}")
        return cls.from_parents(parent)


@dataclass
class ExtensionReport:
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self):
        return self.ok

    def __str__(self):
        return "\n".join(self.problems) if self.problems else "valid"


def _tour(ext: TreeExtension):
    n = len(ext.parent)
    tin, tout = [0] * n, [0] * n
    clock = 0
    stack = [(ext.root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            tout[v] = clock
            clock += 1
            continue
        tin[v] = clock
        clock += 1
        stack.append((v, True))
        stack.extend((c, False) for c in ext.children[v])
    return tin, tout


def validate_extension(net: PhyloNetwork, ext: TreeExtension) -> ExtensionReport:
    """Check tree shape, leaf set and that every network edge points downward."""
    if len(ext.parent) != net.n_nodes:
        raise InputError(
            f"extension covers {len(ext.parent)} nodes, network has {net.n_nodes}"
        )
    report = ExtensionReport()
    bad = report.problems.append
    roots = [v for v, p in enumerate(ext.parent) if p is None]
    if len(roots) != 1:
        bad(f"extension has {len(roots)} roots")
        return report
    for v, p in enumerate(ext.parent):
        if p is not None and not 0 <= p < net.n_nodes:
            bad(f"parent {p} of node {v} is out of range")
    if report.problems:
        return report
    reached = [False] * net.n_nodes
    for v in [roots[0]] + [c for c in ext.postorder() if c != roots[0]]:
        reached[v] = True
    if not all(reached):
        missing = [net.name(v) for v in range(net.n_nodes) if not reached[v]]
        bad(f"nodes not connected to the extension root: {missing}")
        return report
    if net.roots and roots[0] not in net.roots:
        bad(f"extension root {net.name(roots[0])} is not the network root")
    ext_leaves = {v for v in range(net.n_nodes) if not ext.children[v]}
    if ext_leaves != set(net.leaves):
        extra = sorted(net.name(v) for v in ext_leaves - set(net.leaves))
        lost = sorted(net.name(v) for v in set(net.leaves) - ext_leaves)
        bad(f"extension leaves differ from network leaves (extra {extra}, missing {lost})")
    tin, tout = _tour(ext)
    for i, e in enumerate(net.edges):
        u, w = e.tail, e.head
        if not (tin[u] < tin[w] and tout[w] < tout[u]):
            bad(f"edge {net.edge_name(i)}: tail is not a proper ancestor of head")
    return report


def _require(net, ext):
    report = validate_extension(net, ext)
    if not report.ok:
        raise ContractError(f"invalid tree-extension:\n{report}")


def bags(net: PhyloNetwork, ext: TreeExtension, check: bool = True) -> list[frozenset[int]]:
    """GW(v) for every node, bottom-up.

    The bag of ``v`` is the union of its children's bags without the
    out-edges of ``v``, plus the in-edges of ``v``.
    """
    if check:
        _require(net, ext)
    out: list[frozenset[int]] = [frozenset()] * net.n_nodes
    for v in ext.postorder():
        acc = set(net.in_edges[v])
        for c in ext.children[v]:
            acc |= out[c]
        acc.difference_update(net.out_edges[v])
        out[v] = frozenset(acc)
    return out


def bags_direct(net: PhyloNetwork, ext: TreeExtension) -> list[frozenset[int]]:
    """GW(v) = {uw : u strictly above v, w at or below v}, by ancestor tests."""
    _require(net, ext)
    tin, tout = _tour(ext)

    def above_eq(a, b):
        return tin[a] <= tin[b] and tout[b] <= tout[a]

    return [
        frozenset(
            i
            for i, e in enumerate(net.edges)
            if e.tail != v and above_eq(e.tail, v) and above_eq(v, e.head)
        )
        for v in range(net.n_nodes)
    ]


def width(net: PhyloNetwork, ext: TreeExtension) -> int:
    return max((len(b) for b in bags(net, ext)), default=0)


def extension_from_order(net: PhyloNetwork, order: Sequence[int]) -> TreeExtension:
    """Canonical extension of a topological order (parents first).

    Nodes are inserted from the end of the order; each one becomes the
    parent of the current roots of the subtrees holding its network children.
    """
    if sorted(order) != list(range(net.n_nodes)):
        raise ContractError("order must be a permutation of the nodes")
    pos = {v: i for i, v in enumerate(order)}
    for e in net.edges:
        if pos[e.tail] >= pos[e.head]:
            raise ContractError("order is not topological")
    link = list(range(net.n_nodes))

    def find(x):
        while link[x] != x:
            link[x] = link[link[x]]
            x = link[x]
        return x

    parent: list[int | None] = [None] * net.n_nodes
    top = list(range(net.n_nodes))  # component representative -> subtree root
    for v in reversed(order):
        for c in sorted(set(net.children(v))):
            rc = find(c)
            if rc == find(v):
                continue
            parent[top[rc]] = v
            link[rc] = find(v)
        top[find(v)] = v
    return TreeExtension(tuple(parent))


def restrict_extension(ext: TreeExtension, remap: dict[int, int]) -> TreeExtension:
    """Splice removed nodes out of an extension (``remap``: old id -> new id)."""
    parent: list[int | None] = [None] * len(remap)
    for old, new in remap.items():
        p = ext.parent[old]
        while p is not None and p not in remap:
            p = ext.parent[p]
        parent[new] = None if p is None else remap[p]
    return TreeExtension(tuple(parent))


# -- scanwidth ---------------------------------------------------------------
#
# An insertion sequence places sinks first and adds a node once all its
# children are placed.  The bag of the added node in the canonical extension
# is the set of edges entering its weakly connected component of the placed
# subgraph, and that component depends only on the placed set.


def _step_cost(net: PhyloNetwork, placed: list[bool], v: int) -> int:
    seen = {v}
    stack = [v]
    cut = 0
    while stack:
        u = stack.pop()
        for e in net.in_edges[u]:
            t = net.edges[e].tail
            if t in seen:
                continue
            if placed[t]:
                seen.add(t)
                stack.append(t)
            else:
                cut += 1
        for e in net.out_edges[u]:
            h = net.edges[e].head
            if h not in seen:
                seen.add(h)
                stack.append(h)
    return cut


def _leaf_floor(net: PhyloNetwork) -> int:
    if not net.edges:
        return 0
    return max(1, max((net.indegree(x) for x in net.leaves), default=1))


def _greedy_order(net: PhyloNetwork) -> tuple[list[int], int]:
    n = net.n_nodes
    placed = [False] * n
    pending = [net.outdegree(v) for v in range(n)]
    insertion = list(net.leaves)
    for x in insertion:
        placed[x] = True
    ready = set()
    for x in insertion:
        for p in net.parents(x):
            pending[p] -= 1
    ready = {v for v in range(n) if not placed[v] and pending[v] == 0}
    worst = _leaf_floor(net)
    while ready:
        best = min(ready, key=lambda v: (_step_cost(net, placed, v), v))
        worst = max(worst, _step_cost(net, placed, best))
        ready.discard(best)
        placed[best] = True
        insertion.append(best)
        for p in net.parents(best):
            pending[p] -= 1
            if pending[p] == 0 and not placed[p]:
                ready.add(p)
    return insertion, worst


def scanwidth_heuristic(net: PhyloNetwork) -> tuple[TreeExtension, int]:
    """Greedy insertion order that always adds the node with the smallest cut.

    Deterministic (ties go to the lowest node id).  Exact on trees.
    """
    net.topological_order
    insertion, _ = _greedy_order(net)
    ext = extension_from_order(net, insertion[::-1])
    return ext, width(net, ext)


def _fits(net: PhyloNetwork, k: int) -> list[int] | None:
    """An insertion sequence with every cut at most ``k``, or ``None``."""
    n = net.n_nodes
    leaves = list(net.leaves)
    placed = [False] * n
    for x in leaves:
        placed[x] = True
    inner = [v for v in range(n) if net.out_edges[v]]
    children = [sorted(set(net.children(v))) for v in range(n)]
    failed: set[int] = set()
    seq: list[int] = []
    base = 0
    for x in leaves:
        base |= 1 << x

    def dfs(mask: int, left: int) -> bool:
        if left == 0:
            return True
        if mask in failed:
            return False
        for v in inner:
            if placed[v] or not all(placed[c] for c in children[v]):
                continue
            if _step_cost(net, placed, v) > k:
                continue
            placed[v] = True
            seq.append(v)
            if dfs(mask | (1 << v), left - 1):
                return True
            seq.pop()
            placed[v] = False
        failed.add(mask)
        return False

    if dfs(base, len(inner)):
        return leaves + seq
    return None


def scanwidth_exact(net: PhyloNetwork, node_budget: int = 20) -> tuple[TreeExtension, int]:
    """Minimum-width extension by exhaustive search over insertion orders.

    Leaves are placed first (this never hurts), so ``node_budget`` bounds
    the number of non-leaf nodes.  The greedy width is the initial upper
    bound; widths below it are tried in increasing order and a failed
    search certifies the lower bound.
    """
    inner = sum(1 for v in range(net.n_nodes) if net.out_edges[v])
    if inner > node_budget:
        raise ResourceError(
            f"{inner} internal nodes exceed the exact-search budget {node_budget}; "
            "use scanwidth_heuristic"
        )
    ext, upper = scanwidth_heuristic(net)
    for k in range(_leaf_floor(net), upper):
        seq = _fits(net, k)
        if seq is not None:
            ext = extension_from_order(net, seq[::-1])
            assert width(net, ext) == k
            return ext, k
    return ext, upper

