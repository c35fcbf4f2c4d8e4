"""Max-APD at desk scale, expected surviving diversity, and the reduction
from unit-cost NAP to Max-APD on binary networks of scanwidth three."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .engines import apd
from .errors import InputError, ResourceError
from .extension import TreeExtension
from .network import PhyloNetwork, is_binary, require_valid, to_fraction

__all__ = [
    "HardnessInstance",
    "NapInstance",
    "construct_hardness_instance",
    "epd",
    "max_apd_exact",
    "max_apd_greedy",
]

SUBSET_CAP = 1 << 20


def _value(net, Z, engine, cache):
    key = frozenset(Z)
    if key not in cache:
        cache[key] = apd(net, sorted(key), engine=engine) if key else Fraction(0)
    return cache[key]


def max_apd_exact(net: PhyloNetwork, k: int, engine: str = "auto", cap: int = SUBSET_CAP):
    """Best taxon set of size at most ``k`` by exhaustive search.

    Ties are broken towards the lexicographically least sorted name tuple.
    """
    require_valid(net)
    taxa = sorted(net.taxon_node)
    if k < 0 or k > len(taxa):
        raise InputError(f"k must lie in [0, {len(taxa)}]")
    total = sum(math.comb(len(taxa), i) for i in range(k + 1))
    if total > cap:
        raise ResourceError(f"{total} candidate sets exceed the cap {cap}")
    best, best_val = (), Fraction(0)
    cache: dict = {}
    for size in range(1, k + 1):
        for Z in itertools.combinations(taxa, size):
            val = _value(net, Z, engine, cache)
            if val > best_val or (val == best_val and Z < best):
                best, best_val = Z, val
    return frozenset(best), best_val


def max_apd_greedy(net: PhyloNetwork, k: int, engine: str = "auto"):
    """Add, ``k`` times, the taxon with the largest APD gain (ties: smallest name)."""
    require_valid(net)
    taxa = sorted(net.taxon_node)
    if k < 0 or k > len(taxa):
        raise InputError(f"k must lie in [0, {len(taxa)}]")
    chosen: list[str] = []
    cur = Fraction(0)
    cache: dict = {}
    for _ in range(k):
        pick, pick_val = None, None
        for x in taxa:
            if x in chosen:
                continue
            val = _value(net, chosen + [x], engine, cache)
            if pick_val is None or val > pick_val:
                pick, pick_val = x, val
        chosen.append(pick)
        cur = pick_val
    return frozenset(chosen), cur


# -- unit-cost NAP -------------------------------------------------------------


@dataclass(frozen=True)
class NapInstance:
    """A binary tree with survival probabilities, a budget and a threshold."""

    tree: PhyloNetwork
    survival: Mapping[str, Fraction]
    k: int
    D: Fraction = Fraction(2)

    def __post_init__(self):
        require_valid(self.tree)
        if not self.tree.is_tree():
            raise InputError("NAP instances need a tree")
        if not is_binary(self.tree):
            raise InputError("NAP tree must be binary")
        surv = {}
        for x in self.tree.taxon_node:
            if x not in self.survival:
                raise InputError(f"no survival probability for taxon {x!r}")
            p = to_fraction(self.survival[x])
            if not 0 < p <= 1:
                raise InputError(f"survival probability of {x!r} must lie in (0, 1]")
            surv[x] = p
        object.__setattr__(self, "survival", surv)
        object.__setattr__(self, "D", to_fraction(self.D))
        if not 0 <= self.k <= len(surv):
            raise InputError("k must be between 0 and the number of taxa")


def epd(nap: NapInstance, S) -> Fraction:
    """Expected diversity surviving when each taxon of S survives independently."""
    tree = nap.tree
    S = set(S)
    unknown = S - set(tree.taxon_node)
    if unknown:
        raise InputError(f"unknown taxa {sorted(unknown)}")
    lost = [Fraction(1)] * tree.n_nodes  # probability that nothing below survives
    for v in reversed(tree.topological_order):
        if v in tree.taxa:
            x = tree.taxa[v]
            lost[v] = 1 - nap.survival[x] if x in S else Fraction(1)
        else:
            q = Fraction(1)
            for c in tree.children(v):
                q *= lost[c]
            lost[v] = q
    return sum((e.weight * (1 - lost[e.head]) for e in tree.edges), Fraction(0))


@dataclass(frozen=True)
class HardnessInstance:
    """Max-APD instance produced from a NAP instance."""

    net: PhyloNetwork
    k: int
    D: Fraction
    M: Fraction
    nap: NapInstance
    copy: dict[int, int] = field(repr=False)  # tree node -> duplicate node
    gadget: dict[str, tuple[int, int, int, int]] = field(repr=False)  # alpha, beta, gamma, delta

    @property
    def offset(self) -> Fraction:
        """M * (k + 2|X| + 1): the part of APD(S') independent of S."""
        return self.M * (self.nap.k + 2 * len(self.gadget) + 1)

    def lift(self, S) -> list[str]:
        """Taxa {delta_x : x in S} plus every beta_x."""
        out = []
        for x, (_, b, _, d) in sorted(self.gadget.items()):
            out.append(self.net.taxa[b])
            if x in S:
                out.append(self.net.taxa[d])
        return sorted(out)

    def extension(self) -> TreeExtension:
        """Width-3 extension: the tree with every edge subdivided by the
        duplicate of its head, plus the gadget nodes under x and x'."""
        tree = self.nap.tree
        parent: list[int | None] = [None] * self.net.n_nodes
        for e in tree.edges:
            parent[self.copy[e.head]] = e.tail
            parent[e.head] = self.copy[e.head]
        for x, (a, b, g, d) in self.gadget.items():
            leaf = tree.taxon_node[x]
            parent[b] = self.copy[leaf]
            parent[a] = leaf
            parent[g] = leaf
            parent[d] = g
        return TreeExtension(tuple(parent))


def construct_hardness_instance(nap: NapInstance) -> HardnessInstance:
    """Duplicate the tree below a shared root and add one gadget per taxon.

    A taxon with survival probability 1 gets no edge from its duplicate into
    the gadget, since that edge would carry probability 0.
    """
    if not nap.D > 1:
        raise InputError("the reduction needs D > 1")
    tree = nap.tree
    root = tree.root
    M = sum((e.weight for e in tree.edges), Fraction(0))
    n = tree.n_nodes
    copy = {root: root}
    nxt = n
    for v in range(n):
        if v != root:
            copy[v] = nxt
            nxt += 1
    edges = [(e.tail, e.head, e.weight, 1) for e in tree.edges]
    edges += [(copy[e.tail], copy[e.head], e.weight, 1) for e in tree.edges]
    labels = {}
    for v in range(n):
        name = tree.taxa.get(v) or tree.labels.get(v) or f"n{v}"
        labels[v] = name
        if v != root:
            labels[copy[v]] = name + "'"
    taxa = {}
    gadget = {}
    for x in sorted(tree.taxon_node):
        v = tree.taxon_node[x]
        a, b, g, d = nxt, nxt + 1, nxt + 2, nxt + 3
        nxt += 4
        ps = nap.survival[x]
        edges.append((v, g, 1, ps))
        if ps < 1:
            edges.append((copy[v], g, 1, 1 - ps))
        edges.append((v, a, 1, 1))
        edges.append((g, d, M - 1, 1))
        edges.append((copy[v], b, 2 * M, 1))
        taxa.update({a: f"alpha_{x}", b: f"beta_{x}", d: f"delta_{x}"})
        labels[g] = f"gamma_{x}"
        gadget[x] = (a, b, g, d)
    net = PhyloNetwork(nxt, edges, taxa, labels)
    require_valid(net)
    X = len(gadget)
    return HardnessInstance(
        net=net,
        k=nap.k + X,
        D=nap.D + M * (nap.k + 2 * X + 1),
        M=M,
        nap=nap,
        copy=copy,
        gadget=gadget,
    )
