from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apdkit import ResourceError
from apdkit.datasets import R, fig1_network
from apdkit.decomp import (
    apd_by_invisible_switching,
    apd_decomposed,
    blob_switching_cost,
    pendant_part,
    switch_residue,
)
from apdkit.generate import diamond_chain, level1_network, random_network, random_tree
from apdkit.network import biconnected_components, invisible_reticulations, validate
from apdkit.rv import apd_rv
from apdkit.switching import apd_bruteforce


def test_fig1_by_invisible_switching():
    net = fig1_network()
    (ur,) = net.find_edges("u", "r")
    (vr,) = net.find_edges("v", "r")
    lhs = Fraction(3, 10) * apd_rv(switch_residue(net, {R: ur})) + Fraction(7, 10) * apd_rv(
        switch_residue(net, {R: vr})
    )
    assert lhs == Fraction(271, 10)
    assert apd_by_invisible_switching(net) == Fraction(271, 10)
    assert apd_decomposed(net) == Fraction(271, 10)


def test_residue_is_valid():
    net = fig1_network()
    (vr,) = net.find_edges("v", "r")
    res = switch_residue(net, {R: vr})
    assert validate(res).ok
    assert len(res.edges) == len(net.edges) - 1


def test_visible_and_tree_inputs():
    tree = random_tree(5, 8)
    faith = sum(e.weight for e in tree.edges)
    assert apd_by_invisible_switching(tree) == faith
    assert apd_decomposed(tree) == faith
    net = random_network(7, 14, 4, tree_child=True)
    assert apd_by_invisible_switching(net) == apd_rv(net)


def test_pendant_part_of_fig1():
    net = fig1_network()
    (blob,) = [b for b in biconnected_components(net) if not b.trivial]
    part, below = pendant_part(net, blob)
    assert sorted(part.taxon_node) == list("abcde")
    assert blob_switching_cost(net) == 2


def test_two_blobs_add_up():
    net = diamond_chain(2, seed=4)
    blobs = [b for b in biconnected_components(net) if not b.trivial]
    assert len(blobs) == 2
    assert apd_decomposed(net) == apd_bruteforce(net)
    # lowest blob first: its pendant part plus the rest with a stub leaf
    low = blobs[0]
    part, below = pendant_part(net, low)
    assert apd_bruteforce(part) < apd_bruteforce(net)


def test_cap_is_enforced():
    net = fig1_network()
    with pytest.raises(ResourceError):
        apd_by_invisible_switching(net, cap=1)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10**6))
def test_decomposed_matches_bruteforce(seed):
    net = random_network(seed, 14, 5)
    assert apd_decomposed(net) == apd_bruteforce(net)
    assert apd_by_invisible_switching(net) == apd_bruteforce(net)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_level1_chains(seed, cycles):
    net = level1_network(seed, cycles, 2)
    assert apd_decomposed(net) == apd_bruteforce(net)
    assert len(invisible_reticulations(net)) <= cycles
