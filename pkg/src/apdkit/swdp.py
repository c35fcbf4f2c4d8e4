"""Dynamic program over a tree-extension, exponential only in its width.

For every node ``v`` of the extension and every subset ``Y`` of its bag,
``p[v][Y]`` is the probability that a random switching routes exactly the
bag edges in ``Y`` to a leaf, and ``d[v][Y]`` is the expected weight of the
routed edges whose head lies in the extension subtree of ``v``, restricted
to those switchings.  At the root the bag is empty and ``d`` is the APD.

Subsets are bitmasks over a per-node edge order: first the edges the node
inherits from each extension child (grouped by child, in child order), then
the node's own in-edges in the high bits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError, PreconditionError
from .extension import TreeExtension, bags, restrict_extension, scanwidth_heuristic
from .network import PhyloNetwork, dead_nodes, induce_map, require_valid

__all__ = [
    "DpResult",
    "NodeTable",
    "aux_tables",
    "dp_tables",
    "dump_tables",
    "leaf_tables",
    "run_dp",
]

FLOAT_RTOL = 1e-9


@dataclass(frozen=True)
class NodeTable:
    """Tables of one node: ``p[mask]`` and ``d[mask]`` over ``order``."""

    node: int
    order: tuple[int, ...]
    p: list
    d: list

    def mask(self, edges) -> int:
        pos = {e: i for i, e in enumerate(self.order)}
        m = 0
        for e in edges:
            if e not in pos:
                raise InputError(f"edge {e} is not in the bag of node {self.node}")
            m |= 1 << pos[e]
        return m

    def subset(self, mask: int) -> frozenset[int]:
        return frozenset(e for i, e in enumerate(self.order) if mask >> i & 1)

    def entry(self, edges):
        m = self.mask(edges)
        return self.p[m], self.d[m]


@dataclass(frozen=True)
class DpResult:
    value: object
    width: int
    tables: dict[int, NodeTable] | None = None


@dataclass(frozen=True)
class _Layout:
    blocks: tuple[tuple[int, ...], ...]  # inherited edges per extension child
    plus: tuple[tuple[int, ...], ...]  # out-edges of v inside each child bag
    ins: tuple[int, ...]

    @property
    def order(self) -> tuple[int, ...]:
        return tuple(e for b in self.blocks for e in b) + self.ins


def _layout(net: PhyloNetwork, ext: TreeExtension, gw, v: int) -> _Layout:
    outs = set(net.out_edges[v])
    blocks, plus = [], []
    for c in ext.children[v]:
        blocks.append(tuple(sorted(gw[c] - outs)))
        plus.append(tuple(sorted(gw[c] & outs)))
    return _Layout(tuple(blocks), tuple(plus), tuple(sorted(net.in_edges[v])))


def _subset_masks(edges: Sequence[int], pos: dict[int, int]) -> list[int]:
    """Child-table mask of every subset of ``edges`` (indexed by local mask)."""
    out = [0] * (1 << len(edges))
    for m in range(1, len(out)):
        low = m & -m
        out[m] = out[m ^ low] | (1 << pos[edges[low.bit_length() - 1]])
    return out


def _child_terms(block, plus, child: NodeTable, zero):
    """Per inherited subset: (p, d) with no out-edge of v routed, and the
    sums of (p, d) over all non-empty routed out-edge subsets."""
    pos = {e: i for i, e in enumerate(child.order)}
    trans = _subset_masks(block, pos)
    zt = _subset_masks(plus, pos)[1:]
    P, D = child.p, child.d
    terms = []
    for t in trans:
        sp = sd = zero
        for z in zt:
            sp += P[t | z]
            sd += D[t | z]
        terms.append((P[t], D[t], sp, sd))
    return terms


def _sweep(layout: _Layout, kids: Sequence[NodeTable], one, zero, history=None):
    """Fold the children in one at a time.

    After child ``h`` the four tables are indexed by the inherited edges of
    children ``1..h``; ``Q`` means no out-edge of ``v`` is routed, ``C``
    means at least one is.
    """
    Qp, Qd, Cp, Cd = [one], [zero], [zero], [zero]
    if history is not None:
        history.append((Qp, Qd, Cp, Cd))
    for block, plus, child in zip(layout.blocks, layout.plus, kids):
        nQp, nQd, nCp, nCd = [], [], [], []
        for pc, dc, sp, sd in _child_terms(block, plus, child, zero):
            for qp, qd, cp, cd in zip(Qp, Qd, Cp, Cd):
                nQp.append(qp * pc)
                nQd.append(qd * pc + dc * qp)
                nCp.append(cp * pc + (cp + qp) * sp)
                nCd.append(cd * pc + dc * cp + sp * (cd + qd) + sd * (cp + qp))
        Qp, Qd, Cp, Cd = nQp, nQd, nCp, nCd
        if history is not None:
            history.append((Qp, Qd, Cp, Cd))
    return Qp, Qd, Cp, Cd


def _assemble(net, layout, sweep, conv, zero, is_root):
    Qp, Qd, Cp, Cd = sweep
    if is_root:
        return [Qp[0] + Cp[0]], [Qd[0] + Cd[0]]
    p, d = list(Qp), list(Qd)
    n_in = len(layout.ins)
    for m in range(1, 1 << n_in):
        if m & (m - 1):
            p.extend([zero] * len(Qp))
            d.extend([zero] * len(Qp))
            continue
        e = net.edges[layout.ins[m.bit_length() - 1]]
        pi, w = conv(e.prob), conv(e.weight)
        for cp, cd in zip(Cp, Cd):
            pv = pi * cp
            p.append(pv)
            d.append(pi * cd + w * pv)
    return p, d


def _numeric(mode: str):
    if mode == "exact":
        return Fraction(1), Fraction(0), Fraction
    if mode == "float":
        return 1.0, 0.0, float
    raise InputError(f"unknown numeric mode {mode!r} (use 'exact' or 'float')")


def _check_inputs(net: PhyloNetwork) -> None:
    require_valid(net)
    dead = dead_nodes(net)
    if dead:
        names = ", ".join(net.name(v) for v in dead)
        raise PreconditionError(
            f"nodes without a leaf below them: {names}; induce the network first"
        )


def leaf_tables(net: PhyloNetwork, x: int, numeric: str = "exact") -> NodeTable:
    """Tables of a leaf: its routed in-edge is the chosen one."""
    one, zero, conv = _numeric(numeric)
    if net.out_edges[x]:
        raise InputError(f"node {net.name(x)} is not a leaf")
    layout = _Layout((), (), tuple(sorted(net.in_edges[x])))
    p, d = _assemble(net, layout, ([zero], [zero], [one], [zero]), conv, zero, False)
    return NodeTable(x, layout.order, p, d)


def dp_tables(
    net: PhyloNetwork,
    ext: TreeExtension,
    numeric: str = "exact",
    keep: bool = True,
) -> DpResult:
    """Run the dynamic program bottom-up over ``ext``."""
    _check_inputs(net)
    gw = bags(net, ext)
    one, zero, conv = _numeric(numeric)
    root = ext.root
    done: dict[int, NodeTable] = {}
    kept: dict[int, NodeTable] = {}
    for v in ext.postorder():
        if not net.out_edges[v] and v != root:
            table = leaf_tables(net, v, numeric)
        else:
            layout = _layout(net, ext, gw, v)
            kids = [done.pop(c) for c in ext.children[v]]
            if not net.out_edges[v]:
                sweep = ([zero], [zero], [one], [zero])
            else:
                sweep = _sweep(layout, kids, one, zero)
            p, d = _assemble(net, layout, sweep, conv, zero, v == root)
            table = NodeTable(v, () if v == root else layout.order, p, d)
        done[v] = table
        if keep:
            kept[v] = table
    top = done[root]
    return DpResult(top.d[0], max(len(b) for b in gw), kept if keep else None)


def run_dp(
    net: PhyloNetwork,
    ext: TreeExtension | None = None,
    taxa=None,
    numeric: str = "exact",
):
    """APD of ``taxa`` (default: all leaves) via the width-parameterized DP.

    Without ``ext`` a heuristic extension is computed.  With ``taxa`` the
    network is induced on them first, keeping its inheritance probabilities,
    and a supplied extension is restricted accordingly.
    """
    if taxa is not None:
        sub, remap = induce_map(net, taxa)
        if ext is not None:
            if len(ext.parent) != net.n_nodes:
                raise InputError("extension does not match the network")
            ext = restrict_extension(ext, remap)
        net = sub
    if ext is None:
        _check_inputs(net)
        ext, _ = scanwidth_heuristic(net)
    return dp_tables(net, ext, numeric=numeric, keep=False).value


def aux_tables(net: PhyloNetwork, ext: TreeExtension, v: int, numeric: str = "exact"):
    """The per-child intermediate tables at ``v``.

    Returns ``(layout, history)`` where ``history[h]`` is the tuple
    ``(Qp, Qd, Cp, Cd)`` after folding in the first ``h`` children, each
    indexed by masks over their inherited edges.
    """
    res = dp_tables(net, ext, numeric=numeric, keep=True)
    gw = bags(net, ext)
    one, zero, _ = _numeric(numeric)
    layout = _layout(net, ext, gw, v)
    kids = [res.tables[c] for c in ext.children[v]]
    history: list = []
    _sweep(layout, kids, one, zero, history)
    return layout, history


def dump_tables(net: PhyloNetwork, result: DpResult) -> str:
    """JSON dump of every stored entry, keyed by node and edge names."""
    if result.tables is None:
        raise InputError("tables were not kept; rerun with keep=True")
    doc = {}
    for v in sorted(result.tables):
        t = result.tables[v]
        rows = []
        for m in range(len(t.p)):
            rows.append(
                {
                    "Y": sorted(net.edge_name(e) for e in t.subset(m)),
                    "p": str(t.p[m]),
                    "d": str(t.d[m]),
                }
            )
        doc[net.name(v)] = rows
    return json.dumps(doc, indent=1)
