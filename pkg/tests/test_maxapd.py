import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apdkit import InputError, PhyloNetwork, ResourceError
from apdkit.datasets import fig1_network
from apdkit.extension import scanwidth_exact, validate_extension, width
from apdkit.generate import random_nap, random_network, random_tree
from apdkit.maxapd import (
    NapInstance,
    construct_hardness_instance,
    epd,
    max_apd_exact,
    max_apd_greedy,
)
from apdkit.network import is_binary, validate
from apdkit.switching import apd_bruteforce

from oracles import epd_oracle

F = Fraction


def cherry():
    # rho -> u (3), u -> x (1), u -> y (2)
    return PhyloNetwork(4, [(0, 1, 3), (1, 2, 1), (1, 3, 2)], {2: "x", 3: "y"})


def test_epd_examples():
    nap = NapInstance(cherry(), {"x": F(1, 2), "y": F(1, 2)}, k=2)
    assert epd(nap, {"x", "y"}) == F(15, 4)
    assert epd(nap, set()) == 0
    assert epd(nap, {"x"}) == (3 + 1) * F(1, 2)
    with pytest.raises(InputError):
        epd(nap, {"z"})


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 6))
def test_epd_matches_enumeration(seed, n):
    nap = random_nap(seed, n)
    taxa = sorted(nap.tree.taxon_node)
    for r in range(len(taxa) + 1):
        for S in itertools.combinations(taxa, r):
            assert epd(nap, S) == epd_oracle(nap.tree, nap.survival, S)


def test_nap_validation():
    with pytest.raises(InputError):
        NapInstance(fig1_network(), {}, k=1)
    with pytest.raises(InputError):
        NapInstance(cherry(), {"x": F(1, 2)}, k=1)
    with pytest.raises(InputError):
        NapInstance(cherry(), {"x": 0, "y": F(1, 2)}, k=1)
    with pytest.raises(InputError):
        NapInstance(cherry(), {"x": 1, "y": 1}, k=3)
    wide = PhyloNetwork(4, [(0, 1), (0, 2), (0, 3)], {1: "a", 2: "b", 3: "c"})
    with pytest.raises(InputError):
        NapInstance(wide, {"a": 1, "b": 1, "c": 1}, k=1)
    nap = NapInstance(cherry(), {"x": "0.5", "y": 0.25}, k=1, D="1.5")
    assert nap.survival == {"x": F(1, 2), "y": F(1, 4)} and nap.D == F(3, 2)
    with pytest.raises(InputError):
        construct_hardness_instance(NapInstance(cherry(), {"x": 1, "y": 1}, k=1, D=1))


def test_single_taxon_gadget():
    tree = PhyloNetwork(2, [(0, 1, 2)], {1: "x"})
    inst = construct_hardness_instance(NapInstance(tree, {"x": F(1, 2)}, k=1))
    assert validate(inst.net).ok
    assert len(inst.net.reticulations) == 1
    assert inst.k == 2
    assert inst.M == 2
    assert sorted(inst.net.taxon_node) == ["alpha_x", "beta_x", "delta_x"]
    assert inst.lift({"x"}) == ["beta_x", "delta_x"]
    assert inst.lift(set()) == ["beta_x"]


def test_certain_survival_drops_duplicate_edge():
    inst = construct_hardness_instance(NapInstance(cherry(), {"x": 1, "y": F(1, 2)}, k=1))
    assert validate(inst.net).ok
    assert len(inst.net.reticulations) == 1


@pytest.mark.parametrize("seed", range(8))
def test_construction_identity(seed):
    nap = random_nap(seed, 1 + seed % 4)
    inst = construct_hardness_instance(nap)
    net = inst.net
    assert validate(net).ok and is_binary(net)
    ext = inst.extension()
    assert validate_extension(net, ext).ok
    # one taxon gives a single cycle, which is level-1 and so has width 2
    assert width(net, ext) == (3 if len(nap.tree.taxon_node) > 1 else 2)
    assert inst.D == nap.D + inst.offset
    for S in itertools.combinations(sorted(nap.tree.taxon_node), nap.k):
        value = apd_bruteforce(net, inst.lift(S))
        assert value - inst.offset == epd(nap, S)
        assert value - inst.offset == epd_oracle(nap.tree, nap.survival, S)


def test_construction_scanwidth_is_three():
    for seed in range(4):
        inst = construct_hardness_instance(random_nap(seed, 3))
        assert scanwidth_exact(inst.net, node_budget=40)[1] == 3


def best_by_enumeration(net, k):
    best = (F(-1), ())
    for r in range(1, k + 1):
        for Z in itertools.combinations(sorted(net.taxon_node), r):
            val = apd_bruteforce(net, Z)
            if val > best[0] or (val == best[0] and Z < best[1]):
                best = (val, Z)
    return frozenset(best[1]), best[0]


def test_fig1_maximum():
    net = fig1_network()
    S, val = max_apd_exact(net, 3)
    assert (S, val) == best_by_enumeration(net, 3)
    assert val >= apd_bruteforce(net, ["a", "c", "e"]) == F(47, 2)
    gS, gval = max_apd_greedy(net, 3)
    assert gval <= val
    assert max_apd_exact(net, 5) == (frozenset("abcde"), F(271, 10))


def test_edge_cases():
    net = fig1_network()
    assert max_apd_exact(net, 0) == (frozenset(), 0)
    assert max_apd_greedy(net, 0) == (frozenset(), 0)
    with pytest.raises(InputError):
        max_apd_exact(net, 6)
    with pytest.raises(InputError):
        max_apd_greedy(net, -1)
    with pytest.raises(ResourceError):
        max_apd_exact(net, 3, cap=10)


def test_single_leaf_on_tree_is_deepest():
    tree = random_tree(6, 9)
    depth = {}
    for v in tree.topological_order:
        ins = tree.in_edges[v]
        depth[v] = depth[tree.edges[ins[0]].tail] + tree.edges[ins[0]].weight if ins else 0
    S, val = max_apd_exact(tree, 1)
    assert val == max(depth[v] for v in tree.leaves)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 12))
def test_greedy_is_optimal_on_trees(seed, n):
    tree = random_tree(seed, n)
    for k in range(1, min(n, 4) + 1):
        assert max_apd_greedy(tree, k)[1] == max_apd_exact(tree, k)[1]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**6))
def test_engines_agree_on_maximum(seed):
    net = random_network(seed, 12, 3)
    k = min(2, len(net.taxon_node))
    results = {e: max_apd_exact(net, k, engine=e) for e in ("brute", "swdp", "decomp", "auto")}
    assert len(set(results.values())) == 1
