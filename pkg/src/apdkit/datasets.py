"""Small worked instances used by the tests, the CLI and the README."""

from __future__ import annotations

from fractions import Fraction

from .extension import TreeExtension
from .network import PhyloNetwork

# node ids of the reference network
RHO, U, V, P, Q, R, S, W, A, B, C, D, E = range(13)

_NAMES = {RHO: "rho", U: "u", V: "v", P: "p", Q: "q", R: "r", S: "s", W: "w"}
_TAXA = {A: "a", B: "b", C: "c", D: "d", E: "e"}

_F = Fraction
_EDGES = [
    (RHO, U, 2, 1),
    (U, P, 5, 1),
    (P, A, 1, 1),
    (U, R, 1, _F(3, 10)),
    (P, Q, 1, 1),
    (Q, B, 2, 1),
    (Q, S, 4, _F(2, 5)),
    (S, C, 1, 1),
    (RHO, V, 2, 1),
    (V, W, 1, 1),
    (W, D, 1, 1),
    (W, E, 2, 1),
    (V, R, 6, _F(7, 10)),
    (R, S, 8, _F(3, 5)),
]


def fig1_network() -> PhyloNetwork:
    """Five-taxon network with two reticulations r and s (14 edges).

    ``r`` has parents ``u`` (p=0.3) and ``v`` (p=0.7); ``s`` has parents
    ``q`` (p=0.4) and ``r`` (p=0.6).  APD of {a, c, e} is 47/2.
    """
    return PhyloNetwork(13, _EDGES, _TAXA, _NAMES)


def fig2_extension() -> TreeExtension:
    """A width-3 tree-extension of :func:`fig1_network`.

    The chain is rho > v > u > r > p, with w hanging under v; the bag of r
    is {vr, ur, up}.
    """
    parent = [None] * 13
    parent[V] = RHO
    parent[U] = V
    parent[W] = V
    parent[R] = U
    parent[P] = R
    parent[Q] = P
    parent[A] = P
    parent[S] = Q
    parent[B] = Q
    parent[C] = S
    parent[D] = W
    parent[E] = W
    return TreeExtension(tuple(parent))


def diamond(p: Fraction = Fraction(3, 10)) -> PhyloNetwork:
    """rho -> x, y; x, y -> r; r -> l; x -> lx; y -> ly."""
    rho, x, y, r, l, lx, ly = range(7)
    edges = [
        (rho, x, 1, 1),
        (rho, y, 1, 1),
        (x, r, 2, p),
        (y, r, 3, 1 - p),
        (r, l, 1, 1),
        (x, lx, 1, 1),
        (y, ly, 1, 1),
    ]
    return PhyloNetwork(7, edges, {l: "l", lx: "lx", ly: "ly"}, {rho: "rho", x: "x", y: "y", r: "r"})


def invisible_tree_node_example(p: Fraction = Fraction(3, 10)) -> PhyloNetwork:
    """rho -> v, v -> r (p), rho -> u, u -> r, r -> l, u -> lu.

    ``v`` has no leaf of its own and is invisible.
    """
    rho, v, u, r, l, lu = range(6)
    edges = [
        (rho, v, 1, 1),
        (v, r, 1, p),
        (rho, u, 1, 1),
        (u, r, 1, 1 - p),
        (r, l, 1, 1),
        (u, lu, 1, 1),
    ]
    return PhyloNetwork(6, edges, {l: "l", lu: "lu"}, {rho: "rho", v: "v", u: "u", r: "r"})
