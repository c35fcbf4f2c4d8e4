"""Explicit enumeration of switchings: the ground-truth engine.

A switching keeps exactly one in-edge of each switched reticulation.  All
quantities here are computed by brute force and serve as the reference the
faster engines are tested against.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .errors import ContractError, InputError, ResourceError
from .network import PhyloNetwork, require_valid

DEFAULT_SWITCHING_CAP = 2**24


def switching_cap(cap: int | None = None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("APDKIT_SWITCHING_CAP")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InputError(f"APDKIT_SWITCHING_CAP is not an integer: {env!r}") from None
    return DEFAULT_SWITCHING_CAP


@dataclass(frozen=True)
class SwitchingMask:
    """Choice of one in-edge (by edge index) per switched node."""

    choices: tuple[tuple[int, int], ...] = ()

    @classmethod
    def of(cls, mapping: Mapping[int, int] | Iterable[tuple[int, int]] = ()) -> "SwitchingMask":
        items = mapping.items() if isinstance(mapping, Mapping) else mapping
        return cls(tuple(sorted(items)))

    @property
    def scope(self) -> frozenset[int]:
        return frozenset(r for r, _ in self.choices)

    def as_dict(self) -> dict[int, int]:
        return dict(self.choices)

    def __len__(self):
        return len(self.choices)

    def check(self, net: PhyloNetwork) -> None:
        for r, e in self.choices:
            if not 0 <= e < len(net.edges) or net.edges[e].head != r:
                raise ContractError(f"edge {e} is not an in-edge of node {r}")

    def present(self, net: PhyloNetwork) -> list[bool]:
        """Per edge: does it survive in the (partial) switching?"""
        chosen = self.as_dict()
        return [e.head not in chosen or chosen[e.head] == i for i, e in enumerate(net.edges)]

    def describe(self, net: PhyloNetwork) -> str:
        return "{" + ", ".join(f"{net.name(r)}:{net.edge_name(e)}" for r, e in self.choices) + "}"


def switching_count(net: PhyloNetwork, R: Iterable[int]) -> int:
    count = 1
    for r in R:
        count *= net.indegree(r)
    return count


def enumerate_switchings(net: PhyloNetwork, R: Iterable[int] | None = None) -> Iterator[SwitchingMask]:
    """All partial switchings of ``R`` (default: every reticulation).

    Order is lexicographic in (node id, in-edge index).
    """
    nodes = sorted(net.reticulations if R is None else set(R))
    for r in nodes:
        if not 0 <= r < net.n_nodes:
            raise ContractError(f"unknown node {r}")
    options = [sorted(net.in_edges[r]) for r in nodes]
    for combo in itertools.product(*options):
        yield SwitchingMask(tuple(zip(nodes, combo)))


def switching_probability(net: PhyloNetwork, sigma: SwitchingMask) -> Fraction:
    """Product of chosen in-edge probabilities; unswitched nodes contribute
    their in-probability sum, which is 1 on a normal network."""
    sigma.check(net)
    chosen = sigma.as_dict()
    p = Fraction(1)
    for v in range(net.n_nodes):
        ins = net.in_edges[v]
        if not ins:
            continue
        if v in chosen:
            p *= net.edges[chosen[v]].prob
        else:
            p *= sum((net.edges[e].prob for e in ins), Fraction(0))
    return p


def combine(a: SwitchingMask, b: SwitchingMask) -> SwitchingMask:
    """Union of two switchings with disjoint scopes."""
    overlap = a.scope & b.scope
    if overlap:
        raise ContractError(f"switchings overlap on {sorted(overlap)}")
    return SwitchingMask(tuple(sorted(a.choices + b.choices)))


def combine_families(fa: Iterable[SwitchingMask], fb: Iterable[SwitchingMask]) -> list[SwitchingMask]:
    fb = list(fb)
    return [combine(a, b) for a in fa for b in fb]


def family_probability(net: PhyloNetwork, family: Iterable[SwitchingMask]) -> Fraction:
    return sum((switching_probability(net, s) for s in family), Fraction(0))


def _reach(net: PhyloNetwork, present: list[bool], targets: frozenset[int]) -> list[bool]:
    reach = [False] * net.n_nodes
    edges = net.edges
    for v in reversed(net.topological_order):
        if v in targets:
            reach[v] = True
            continue
        for e in net.out_edges[v]:
            if present[e] and reach[edges[e].head]:
                reach[v] = True
                break
    return reach


def edge_reaches(net: PhyloNetwork, sigma: SwitchingMask, taxa=None) -> list[bool]:
    """Per edge: is it in ``sigma`` with a path through it to the taxon set?"""
    Z = frozenset(net.leaves) if taxa is None else net.taxon_set(taxa)
    present = sigma.present(net)
    reach = _reach(net, present, Z)
    return [present[i] and reach[e.head] for i, e in enumerate(net.edges)]


def _require_full(net: PhyloNetwork, sigma: SwitchingMask) -> None:
    missing = set(net.reticulations) - sigma.scope
    if missing:
        raise ContractError(f"switching leaves reticulations {sorted(missing)} unswitched")


def pd_score(net: PhyloNetwork, sigma: SwitchingMask, taxa=None) -> Fraction:
    """Total weight of the edges of ``sigma`` that lie on a path to the taxa."""
    sigma.check(net)
    _require_full(net, sigma)
    hits = edge_reaches(net, sigma, taxa)
    return sum((e.weight for e, h in zip(net.edges, hits) if h), Fraction(0))


def _completions(net, given, cap):
    given = given or SwitchingMask()
    given.check(net)
    rest = [r for r in net.reticulations if r not in given.scope]
    count = switching_count(net, rest)
    limit = switching_cap(cap)
    if count > limit:
        raise ResourceError(
            f"{count} switchings exceed the enumeration cap {limit}; "
            "set APDKIT_SWITCHING_CAP or choose another engine"
        )
    for s in enumerate_switchings(net, rest):
        yield combine(given, s)


def apd_bruteforce(
    net: PhyloNetwork,
    taxa=None,
    *,
    given: SwitchingMask | None = None,
    cap: int | None = None,
) -> Fraction:
    """APD by summing P(sigma) * PD_sigma over every switching.

    With ``given`` the sum runs over the completions of that partial
    switching only, which is the APD of the partial switching viewed as a
    network in its own right.
    """
    require_valid(net)
    Z = frozenset(net.leaves) if taxa is None else net.taxon_set(taxa)
    total = Fraction(0)
    for sigma in _completions(net, given, cap):
        p = switching_probability(net, sigma)
        if p:
            total += p * pd_score(net, sigma, Z)
    return total


def edge_gammas_bruteforce(
    net: PhyloNetwork, taxa=None, *, cap: int | None = None
) -> list[Fraction]:
    """Probability, per edge, that a random switching routes it to the taxa."""
    require_valid(net)
    Z = frozenset(net.leaves) if taxa is None else net.taxon_set(taxa)
    gam = [Fraction(0)] * len(net.edges)
    for sigma in _completions(net, None, cap):
        p = switching_probability(net, sigma)
        if not p:
            continue
        for i, hit in enumerate(edge_reaches(net, sigma, Z)):
            if hit:
                gam[i] += p
    return gam


def gamma_bruteforce(net: PhyloNetwork, edge: int, taxa=None, *, cap: int | None = None) -> Fraction:
    if not 0 <= edge < len(net.edges):
        raise InputError(f"unknown edge index {edge}")
    return edge_gammas_bruteforce(net, taxa, cap=cap)[edge]


def is_compatible(net: PhyloNetwork, sigma: SwitchingMask, v: int, ext, Y, A=None) -> bool:
    """Whether exactly the edges ``Y`` of the relevant bag reach a leaf in ``sigma``.

    The relevant bag is ``GW(v) ∩ GW(A)`` for a node set ``A``, defaulting
    to ``{v}``; ``ext`` is a :class:`~apdkit.extension.TreeExtension`.
    """
    from .extension import bags

    sigma.check(net)
    _require_full(net, sigma)
    gw = bags(net, ext)
    universe = set(gw[v])
    if A is not None:
        union = set()
        for a in A:
            union |= gw[a]
        universe &= union
    Y = set(Y)
    if not Y <= universe:
        raise ContractError(f"edges {sorted(Y - universe)} are not in the bag")
    hits = edge_reaches(net, sigma)
    return all(hits[e] == (e in Y) for e in universe)
