"""Scaling measurements for the DP and the reticulation-visible engine."""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass
from typing import Sequence

from .generate import dp_scaling_instance, rv_scaling_network
from .rv import apd_rv
from .swdp import dp_tables

__all__ = ["Fit", "dp_timings", "linear_fit", "rv_operation_counts"]


@dataclass(frozen=True)
class Fit:
    slope: float
    intercept: float
    r2: float


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> Fit:
    """Least-squares line through ``(xs, ys)`` and its R²."""
    slope, intercept = statistics.linear_regression(xs, ys)
    r = statistics.correlation(xs, ys)
    return Fit(slope, intercept, r * r)


def dp_timings(widths: Sequence[int], repeats: int = 3, numeric: str = "exact"):
    """Best-of-``repeats`` DP time per width on the fixed-size family.

    Returns ``(times, factor)`` where ``factor`` is the growth per unit of
    width from a least-squares fit of log2(time).
    """
    times = []
    for w in widths:
        net, ext = dp_scaling_instance(w)
        best = math.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            dp_tables(net, ext, numeric=numeric, keep=False)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
    fit = linear_fit(list(widths), [math.log2(t) for t in times])
    return times, 2.0**fit.slope


def rv_operation_counts(gadget_counts: Sequence[int], seed: int = 0):
    """``(edges, operations)`` pairs of the visible-network engine."""
    out = []
    for g in gadget_counts:
        net = rv_scaling_network(g, seed)
        counter = [0]
        apd_rv(net, counter)
        out.append((len(net.edges), counter[0]))
    return out
