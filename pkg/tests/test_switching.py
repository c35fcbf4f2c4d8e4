import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apdkit import ContractError, ResourceError
from apdkit.datasets import R, S, fig1_network, fig2_extension
from apdkit.extension import bags
from apdkit.generate import random_network, random_tree
from apdkit.switching import (
    SwitchingMask,
    apd_bruteforce,
    combine,
    combine_families,
    edge_gammas_bruteforce,
    edge_reaches,
    enumerate_switchings,
    family_probability,
    gamma_bruteforce,
    is_compatible,
    pd_score,
    switching_probability,
)

F = Fraction
ACE = ["a", "c", "e"]


def edge(net, u, v):
    (i,) = net.find_edges(u, v)
    return i


@pytest.fixture
def fig1():
    net = fig1_network()
    ur, vr = edge(net, "u", "r"), edge(net, "v", "r")
    qs, rs = edge(net, "q", "s"), edge(net, "r", "s")
    sig = {
        1: SwitchingMask.of({R: vr, S: rs}),
        2: SwitchingMask.of({R: vr, S: qs}),
        3: SwitchingMask.of({R: ur, S: rs}),
        4: SwitchingMask.of({R: ur, S: qs}),
    }
    return net, sig


def test_enumeration_counts(fig1):
    net, sig = fig1
    full = list(enumerate_switchings(net, {R, S}))
    assert len(full) == 4 and len(set(full)) == 4
    assert set(full) == set(sig.values())
    assert list(enumerate_switchings(net, set())) == [SwitchingMask()]
    assert len(list(enumerate_switchings(net, {R}))) == 2
    assert full == list(enumerate_switchings(net, {R, S}))  # deterministic


def test_switching_probabilities(fig1):
    net, sig = fig1
    probs = {k: switching_probability(net, s) for k, s in sig.items()}
    assert probs == {1: F(42, 100), 2: F(28, 100), 3: F(18, 100), 4: F(12, 100)}
    assert switching_probability(net, SwitchingMask()) == 1


def test_pd_scores(fig1):
    net, sig = fig1
    scores = {k: pd_score(net, s, ACE) for k, s in sig.items()}
    assert scores == {1: 28, 2: 19, 3: 23, 4: 19}
    assert all(pd_score(net, s, []) == 0 for s in sig.values())


def test_apd_fig1(fig1):
    net, _ = fig1
    assert apd_bruteforce(net, ACE) == F(47, 2)
    assert apd_bruteforce(net) == F(271, 10)


def test_apd_is_gamma_weighted_sum():
    net = fig1_network()
    for Z in (ACE, None, ["b"], ["c", "d"]):
        gam = edge_gammas_bruteforce(net, Z)
        assert sum(e.weight * g for e, g in zip(net.edges, gam)) == apd_bruteforce(net, Z)


def test_gamma_examples():
    net = fig1_network()
    assert gamma_bruteforce(net, edge(net, "u", "r"), ACE) == F(18, 100)
    assert gamma_bruteforce(net, edge(net, "p", "a"), ["a"]) == 1
    assert gamma_bruteforce(net, edge(net, "q", "b"), ACE) == 0


def test_faith_pd_on_trees():
    tree = random_tree(11, 8)
    taxa = sorted(tree.taxon_node)[:3]
    keep = set()
    for x in taxa:
        v = tree.taxon_node[x]
        while tree.in_edges[v]:
            (e,) = tree.in_edges[v]
            keep.add(e)
            v = tree.edges[e].tail
    assert apd_bruteforce(tree, taxa) == sum(tree.edges[e].weight for e in keep)


def test_combine(fig1):
    net, sig = fig1
    a = SwitchingMask.of({R: edge(net, "v", "r")})
    b = SwitchingMask.of({S: edge(net, "r", "s")})
    assert combine(a, b) == sig[1]
    assert switching_probability(net, combine(a, b)) == F(42, 100)
    assert switching_probability(net, a) * switching_probability(net, b) == F(42, 100)
    assert combine(sig[2], SwitchingMask()) == sig[2]
    with pytest.raises(ContractError):
        combine(a, sig[1])


def test_invalid_masks(fig1):
    net, _ = fig1
    with pytest.raises(ContractError):
        switching_probability(net, SwitchingMask.of({R: edge(net, "r", "s")}))
    with pytest.raises(ContractError):
        pd_score(net, SwitchingMask.of({R: edge(net, "u", "r")}))


def test_cap(fig1, monkeypatch):
    net, _ = fig1
    with pytest.raises(ResourceError):
        apd_bruteforce(net, cap=3)
    monkeypatch.setenv("APDKIT_SWITCHING_CAP", "2")
    with pytest.raises(ResourceError):
        apd_bruteforce(net)


def test_partial_switchings_partition_fig1():
    net = fig1_network()
    total = apd_bruteforce(net, ACE)
    for R_ in ({R}, {S}, {R, S}, set()):
        parts = list(enumerate_switchings(net, R_))
        assert sum(apd_bruteforce(net, ACE, given=s) for s in parts) == total


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_partition_and_product_random(seed):
    net = random_network(seed, 12, 4)
    rng = random.Random(seed)
    retics = list(net.reticulations)
    rng.shuffle(retics)
    cut = rng.randint(0, len(retics))
    R1, R2 = set(retics[:cut]), set(retics[cut:])
    # completions of the R1-switchings partition all switchings
    full = set(enumerate_switchings(net))
    covered = []
    for s1 in enumerate_switchings(net, R1):
        covered += [combine(s1, s2) for s2 in enumerate_switchings(net, set(retics) - R1)]
    assert len(covered) == len(full) and set(covered) == full
    assert sum(apd_bruteforce(net, given=s) for s in enumerate_switchings(net, R1)) == apd_bruteforce(net)
    # P(F1 + F2) = P(F1) P(F2) for random subfamilies of disjoint scope
    fam1 = [s for s in enumerate_switchings(net, R1) if rng.random() < 0.6]
    fam2 = [s for s in enumerate_switchings(net, R2) if rng.random() < 0.6]
    both = combine_families(fam1, fam2)
    assert len(both) == len(fam1) * len(fam2)
    assert family_probability(net, both) == family_probability(net, fam1) * family_probability(net, fam2)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_monotone_in_taxa(seed):
    net = random_network(seed, 12, 3)
    taxa = sorted(net.taxon_node)
    rng = random.Random(seed)
    Z = [x for x in taxa if rng.random() < 0.5]
    extra = [x for x in taxa if x not in Z][:1]
    assert apd_bruteforce(net, Z) <= apd_bruteforce(net, Z + extra)
    assert apd_bruteforce(net, []) == 0


def test_compatibility_examples(fig1):
    net, sig = fig1
    ext = fig2_extension()
    up, vr, ur = edge(net, "u", "p"), edge(net, "v", "r"), edge(net, "u", "r")
    assert is_compatible(net, sig[1], R, ext, {up, vr})
    assert is_compatible(net, sig[3], R, ext, {up, ur})
    assert is_compatible(net, sig[2], R, ext, {up})
    assert is_compatible(net, sig[4], R, ext, {up})
    assert not is_compatible(net, sig[1], R, ext, {up})
    with pytest.raises(ContractError):
        is_compatible(net, sig[1], R, ext, {edge(net, "w", "d")})


def test_each_switching_has_one_compatible_subset(fig1):
    net, sig = fig1
    ext = fig2_extension()
    gw = bags(net, ext)
    for s in sig.values():
        for v in range(net.n_nodes):
            bag = sorted(gw[v])
            subsets = [
                set(c) for k in range(len(bag) + 1) for c in itertools.combinations(bag, k)
            ]
            hits = [Y for Y in subsets if is_compatible(net, s, v, ext, Y)]
            reach = edge_reaches(net, s)
            assert hits == [{e for e in bag if reach[e]}]
