"""Seeded random instances: trees, level-1 and general networks, NAP
instances and the scaling families used by the benchmarks."""

from __future__ import annotations

import random
from fractions import Fraction

from .extension import TreeExtension
from .network import PhyloNetwork, is_tree_child

__all__ = [
    "diamond_chain",
    "dp_scaling_instance",
    "level1_network",
    "random_nap",
    "random_network",
    "random_probs",
    "random_tree",
    "rv_scaling_network",
]


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def random_probs(rng: random.Random, k: int) -> list[Fraction]:
    """A random positive composition of 1 into ``k`` parts."""
    parts = [rng.randint(1, 9) for _ in range(k)]
    total = sum(parts)
    return [Fraction(p, total) for p in parts]


def _weight(rng: random.Random) -> Fraction:
    w = rng.randint(0, 6)
    return Fraction(w, 2) if rng.random() < 0.2 else Fraction(w)


class _Builder:
    """Mutable edge list used while growing an instance."""

    def __init__(self):
        self.n = 0
        self.edges: list[list[int]] = []  # [tail, head]

    def node(self) -> int:
        self.n += 1
        return self.n - 1

    def subdivide(self, i: int) -> int:
        t, h = self.edges[i]
        u = self.node()
        self.edges[i] = [t, u]
        self.edges.append([u, h])
        return u

    def children(self, v):
        return [h for t, h in self.edges if t == v]

    def indegree(self, v):
        return sum(1 for _, h in self.edges if h == v)

    def reaches(self, a, b) -> bool:
        stack, seen = [a], {a}
        while stack:
            x = stack.pop()
            if x == b:
                return True
            for c in self.children(x):
                if c not in seen:
                    seen.add(c)
                    stack.append(c)
        return False

    def leaves(self):
        tails = {t for t, _ in self.edges}
        return [v for v in range(self.n) if v not in tails]

    def finish(self, rng, names=None) -> PhyloNetwork:
        ins: dict[int, list[int]] = {}
        for i, (_, h) in enumerate(self.edges):
            ins.setdefault(h, []).append(i)
        prob = {}
        for h, idx in ins.items():
            for i, p in zip(idx, random_probs(rng, len(idx)) if len(idx) > 1 else [1]):
                prob[i] = p
        edges = [(t, h, _weight(rng), prob[i]) for i, (t, h) in enumerate(self.edges)]
        leaves = self.leaves()
        taxa = {v: (names[i] if names else f"x{i}") for i, v in enumerate(leaves)}
        return PhyloNetwork(self.n, edges, taxa)


def _grow_tree(b: _Builder, rng: random.Random, n_leaves: int, planted: bool) -> int:
    root = b.node()
    top = root
    if planted or n_leaves == 1:
        top = b.node()
        b.edges.append([root, top])
    frontier = [top]
    while len(frontier) < n_leaves:
        x = frontier.pop(rng.randrange(len(frontier)))
        for _ in range(2):
            c = b.node()
            b.edges.append([x, c])
            frontier.append(c)
    return root


def random_tree(seed, n_leaves: int, planted: bool = False) -> PhyloNetwork:
    """Random binary tree; ``planted`` puts a single edge below the root."""
    rng = _rng(seed)
    b = _Builder()
    _grow_tree(b, rng, max(1, n_leaves), planted)
    return b.finish(rng)


def random_network(
    seed,
    max_nodes: int = 14,
    max_retics: int = 5,
    tree_child: bool = False,
    exotic: bool = True,
    tries: int = 1000,
) -> PhyloNetwork:
    """Random network grown from a binary tree by adding reticulation edges.

    Each step subdivides an edge with a new tail and either subdivides a
    second edge with a new reticulation, adds a further in-edge to an
    existing reticulation, or (with ``exotic``) makes a leaf reticulate;
    the last two and same-edge picks give in-degree 3, reticulate leaves
    and parallel edges.  ``tree_child`` retries until the result is
    tree-child.
    """
    rng = _rng(seed)
    for _ in range(tries):
        net = _random_network_once(rng, max_nodes, max_retics, exotic)
        if not tree_child or is_tree_child(net):
            return net
    raise RuntimeError("no tree-child network found; relax the parameters")


def _random_network_once(rng, max_nodes, max_retics, exotic) -> PhyloNetwork:
    r_target = rng.randint(0, max_retics)
    hi = max(2, (max_nodes + 1 - 2 * r_target) // 2)
    n_leaves = rng.randint(2, hi)
    b = _Builder()
    _grow_tree(b, rng, n_leaves, planted=False)
    retics: list[int] = []
    attempts = 0
    while len(retics) < r_target and attempts < 50:
        attempts += 1
        room = max_nodes - b.n
        ops = []
        if room >= 2:
            ops.append("new")
        if room >= 1 and exotic:
            if retics:
                ops.append("extra")
            ops.append("leaf")
        if not ops:
            break
        op = rng.choice(ops)
        snapshot = (b.n, [e[:] for e in b.edges])
        if op == "new":
            i, j = rng.randrange(len(b.edges)), rng.randrange(len(b.edges))
            same = i == j
            if same and not exotic:
                continue
            u = b.subdivide(i)
            if same:
                j = len(b.edges) - 1  # the edge u -> old head
            r = b.subdivide(j)
            if b.reaches(r, u):
                b.n, b.edges = snapshot
                continue
            b.edges.append([u, r])
            retics.append(r)
        else:
            if op == "extra":
                target = rng.choice(retics)
            else:
                target = rng.choice(b.leaves())
            i = rng.randrange(len(b.edges))
            u = b.subdivide(i)
            if b.reaches(target, u):
                b.n, b.edges = snapshot
                continue
            b.edges.append([u, target])
            if op == "leaf":
                retics.append(target)
    return b.finish(rng)


def level1_network(seed, n_cycles: int, n_leaves: int = 2, max_nodes: int | None = None) -> PhyloNetwork:
    """Binary level-1 network: a tree whose bridge edges are replaced by
    cycles (sides of 0 to 2 nodes, each side node with a pendant leaf)."""
    rng = _rng(seed)
    for _ in range(1000):
        b = _Builder()
        _grow_tree(b, rng, n_leaves, planted=False)
        bridges = set(range(len(b.edges)))
        for _ in range(n_cycles):
            i = rng.choice(sorted(bridges))
            t, h = b.edges[i]
            s = b.node()
            r = b.node()
            b.edges[i] = [t, s]
            b.edges.append([r, h])
            bridges.add(len(b.edges) - 1)
            sides = [rng.randint(0, 2), rng.randint(0, 2)]
            if sides == [0, 0]:
                sides[rng.randrange(2)] = 1
            for length in sides:
                prev = s
                for _ in range(length):
                    x = b.node()
                    b.edges.append([prev, x])
                    leaf = b.node()
                    b.edges.append([x, leaf])
                    bridges.add(len(b.edges) - 1)
                    prev = x
                b.edges.append([prev, r])
        if max_nodes is None or b.n <= max_nodes:
            return b.finish(rng)
    raise RuntimeError("could not meet the node bound; lower n_cycles")


def diamond_chain(d: int, seed=0) -> PhyloNetwork:
    """``d`` diamonds hanging off a caterpillar backbone."""
    rng = _rng(seed)
    b = _Builder()
    spine = b.node()
    for _ in range(d):
        s, x, y, r = (b.node() for _ in range(4))
        b.edges += [[spine, s], [s, x], [s, y], [x, r], [y, r]]
        for parent in (x, y, r):
            b.edges.append([parent, b.node()])
        nxt = b.node()
        b.edges.append([spine, nxt])
        spine = nxt
    return b.finish(rng)


def random_nap(seed, n_leaves: int):
    """NAP instance on a planted binary tree with survival in (0, 1)."""
    from .maxapd import NapInstance

    rng = _rng(seed)
    b = _Builder()
    _grow_tree(b, rng, n_leaves, planted=True)
    names = [chr(ord("a") + i) for i in range(n_leaves)]
    tails = {t for t, _ in b.edges}
    leaves = [v for v in range(b.n) if v not in tails]
    edges = [(t, h, rng.randint(1, 5), 1) for t, h in b.edges]
    tree = PhyloNetwork(b.n, edges, {v: names[i] for i, v in enumerate(leaves)})
    survival = {x: Fraction(rng.randint(1, 9), 10) for x in names}
    return NapInstance(tree, survival, rng.randint(1, n_leaves), Fraction(rng.randint(2, 9)))


def dp_scaling_instance(width: int, spine: int = 40, n_nodes: int = 160) -> tuple[PhyloNetwork, TreeExtension]:
    """Network and path-like extension whose ``spine`` middle nodes all have
    bags of exactly ``width`` edges; padding keeps the node count fixed.

    Top chain t_1..t_k (k = width - 1) sends a long edge to a reticulation
    r_i at the bottom; the spine nodes between carry pendant leaves.
    """
    k = width - 1
    parent: dict[int, int] = {}
    edges = []
    n = 0

    def node(par_ext):
        nonlocal n
        n += 1
        if par_ext is not None:
            parent[n - 1] = par_ext
        return n - 1

    root = node(None)
    prev = root
    tops = []
    for _ in range(k):
        t = node(prev)
        edges.append((prev, t, 1, 1))
        tops.append(t)
        prev = t
    spine_nodes = []
    for _ in range(spine):
        c = node(prev)
        edges.append((prev, c, 1, 1))
        spine_nodes.append(c)
        prev = c
    for c in spine_nodes[1:]:
        leaf = node(c)
        edges.append((c, leaf, 1, 1))
    half = Fraction(1, 2)
    for t in tops:
        s = node(prev)
        edges.append((prev, s, 1, 1))
        r = node(s)
        edges.append((s, r, 1, half))
        edges.append((t, r, 2, half))
        leaf = node(r)
        edges.append((r, leaf, 1, 1))
        prev = s
    leaf = node(prev)
    edges.append((prev, leaf, 1, 1))
    # padding caterpillar under the first spine node
    c0 = spine_nodes[0]
    cur = c0
    pad_room = n_nodes - n
    if pad_room < 1:
        raise ValueError(f"n_nodes={n_nodes} is too small for width {width}")
    while pad_room >= 3:
        x = node(cur)
        edges.append((cur, x, 1, 1))
        leaf = node(x)
        edges.append((x, leaf, 1, 1))
        cur = x
        pad_room -= 2
    while pad_room > 0:
        leaf = node(cur)
        edges.append((cur, leaf, 1, 1))
        pad_room -= 1
    tails = {t for t, _, _, _ in edges}
    leaves = [v for v in range(n) if v not in tails]
    net = PhyloNetwork(n, edges, {v: f"l{i}" for i, v in enumerate(leaves)})
    ext = TreeExtension(tuple(parent.get(v) for v in range(n)))
    return net, ext


def rv_scaling_network(n_gadgets: int, seed=0) -> PhyloNetwork:
    """Reticulation-visible network with invisible tree nodes.

    A caterpillar backbone carries random gadgets: tree-child diamonds,
    invisible nodes feeding one or two reticulations, and two invisible
    branches feeding the same in-degree-3 reticulation.
    """
    rng = _rng(seed)
    b = _Builder()
    spine = b.node()

    def leaf(par):
        b.edges.append([par, b.node()])

    for _ in range(n_gadgets):
        g = b.node()
        b.edges.append([spine, g])
        kind = rng.randrange(4)
        if kind == 0:
            x, y, r = b.node(), b.node(), b.node()
            b.edges += [[g, x], [g, y], [x, r], [y, r]]
            leaf(x), leaf(y), leaf(r)
        elif kind == 1:
            v, u, r = b.node(), b.node(), b.node()
            b.edges += [[g, v], [g, u], [v, r], [u, r]]
            leaf(r), leaf(u)
        elif kind == 2:
            v, v1, u, r1, r2 = (b.node() for _ in range(5))
            b.edges += [[g, v], [g, u], [v, v1], [v, r2], [v1, r1], [u, r1], [u, r2]]
            leaf(u), leaf(r1), leaf(r2)
        else:
            v, v1, v2, u, r = (b.node() for _ in range(5))
            b.edges += [[g, v], [g, u], [v, v1], [v, v2], [v1, r], [v2, r], [u, r]]
            leaf(u), leaf(r)
        nxt = b.node()
        b.edges.append([spine, nxt])
        spine = nxt
    leaf(spine)
    return b.finish(rng)
