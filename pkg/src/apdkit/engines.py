"""One entry point over all APD engines, with automatic engine choice."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .decomp import apd_decomposed, blob_switching_cost
from .errors import InputError, ResourceError
from .extension import TreeExtension, restrict_extension, scanwidth_heuristic
from .network import (
    PhyloNetwork,
    dead_nodes,
    induce_map,
    is_reticulation_visible,
    require_valid,
)
from .rv import apd_rv, edge_gammas_rv
from .swdp import dp_tables
from .switching import apd_bruteforce, edge_gammas_bruteforce, switching_cap, switching_count

__all__ = ["ENGINES", "ApdReport", "apd", "apd_report", "choose_engine", "gamma"]

ENGINES = ("auto", "tree", "brute", "swdp", "rv", "decomp")

DECOMP_THRESHOLD = 2**16
DP_WIDTH_LIMIT = 20


@dataclass(frozen=True)
class ApdReport:
    value: object
    engine: str
    width: int | None = None


def choose_engine(net: PhyloNetwork) -> str:
    """Cheapest engine that applies to an induced network."""
    if net.is_tree():
        return "tree"
    if is_reticulation_visible(net):
        return "rv"
    if blob_switching_cost(net) <= DECOMP_THRESHOLD:
        return "decomp"
    _, w = scanwidth_heuristic(net)
    if w <= DP_WIDTH_LIMIT:
        return "swdp"
    if switching_count(net, net.reticulations) <= switching_cap():
        return "brute"
    raise ResourceError("no engine can handle this network within the configured limits")


def _prepare(net, taxa, extension):
    require_valid(net)
    if taxa is None:
        if dead_nodes(net):
            taxa = list(net.leaves)
        else:
            return net, extension
    sub, remap = induce_map(net, taxa)
    if extension is not None:
        extension = restrict_extension(extension, remap)
    return sub, extension


def apd_report(
    net: PhyloNetwork,
    taxa=None,
    engine: str = "auto",
    extension: TreeExtension | None = None,
    numeric: str = "exact",
) -> ApdReport:
    """APD of ``taxa`` (default: all leaves) with the chosen engine.

    Every engine runs on the network induced by the taxa, which keeps the
    original inheritance probabilities.
    """
    if engine not in ENGINES:
        raise InputError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    if extension is not None and len(extension.parent) != net.n_nodes:
        raise InputError("extension does not match the network")
    sub, ext = _prepare(net, taxa, extension)
    if engine == "auto":
        engine = "swdp" if ext is not None else choose_engine(sub)
    if engine == "tree":
        if not sub.is_tree():
            raise InputError("the tree engine needs a network without reticulations")
        value = sum((e.weight for e in sub.edges), Fraction(0))
        return ApdReport(value if numeric == "exact" else float(value), "tree")
    if engine == "swdp":
        if ext is None:
            ext, _ = scanwidth_heuristic(sub)
        res = dp_tables(sub, ext, numeric=numeric, keep=False)
        return ApdReport(res.value, "swdp", res.width)
    if engine == "brute":
        value = apd_bruteforce(sub)
    elif engine == "rv":
        value = apd_rv(sub)
    else:
        value = apd_decomposed(sub)
    return ApdReport(value if numeric == "exact" else float(value), engine)


def apd(net: PhyloNetwork, taxa=None, engine: str = "auto", extension=None, numeric="exact"):
    return apd_report(net, taxa, engine, extension, numeric).value


def gamma(net: PhyloNetwork, edge: int, taxa=None, engine: str = "auto") -> Fraction:
    """Probability that a random switching routes ``edge`` to the taxa."""
    if not 0 <= edge < len(net.edges):
        raise InputError(f"unknown edge index {edge}")
    if engine not in ("auto", "brute", "rv"):
        raise InputError("gamma supports the engines auto, brute and rv")
    require_valid(net)
    sub, remap = induce_map(net, list(net.leaves) if taxa is None else taxa)
    e = net.edges[edge]
    if e.head not in remap:
        return Fraction(0)
    kept = [i for i, f in enumerate(net.edges) if f.tail in remap and f.head in remap]
    idx = kept.index(edge)
    if engine == "rv" or (engine == "auto" and is_reticulation_visible(sub)):
        return edge_gammas_rv(sub)[idx]
    return edge_gammas_bruteforce(sub)[idx]
