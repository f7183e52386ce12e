"""Structural accuracy of a learned PAG against the true PAG."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .graphs import ARROW, GraphError, MixedGraph


@dataclass(frozen=True)
class ConfusionCounts:
    """Skeleton-level counts over unordered node pairs."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def a(self) -> int:
        return self.tp + self.fn

    @property
    def i(self) -> int:
        return self.fp + self.tn


def _same_nodes(learned: MixedGraph, truth: MixedGraph) -> None:
    if learned.nodes != truth.nodes:
        raise GraphError("learned and true graphs have different node sets")


def confusion(learned: MixedGraph, truth: MixedGraph) -> ConfusionCounts:
    _same_nodes(learned, truth)
    tp = fp = tn = fn = 0
    for x, y in itertools.combinations(truth.nodes, 2):
        got, want = learned.has_edge(x, y), truth.has_edge(x, y)
        if got and want:
            tp += 1
        elif got:
            fp += 1
        elif want:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fp, tn, fn)


def precision_recall(c: ConfusionCounts) -> tuple[float, float]:
    """Precision is 0 when nothing is predicted but the truth has edges, 1 when both are empty."""
    if c.tp + c.fp == 0:
        precision = 1.0 if c.a == 0 else 0.0
    else:
        precision = c.tp / (c.tp + c.fp)
    if c.a == 0:
        recall = 1.0 if c.fn == 0 else 0.0
    else:
        recall = c.tp / c.a
    return precision, recall


def shd(learned: MixedGraph, truth: MixedGraph) -> int:
    """1 per pair adjacent in only one graph, plus 1 per differing endpoint mark on shared edges."""
    _same_nodes(learned, truth)
    total = 0
    for x, y in itertools.combinations(truth.nodes, 2):
        got, want = learned.has_edge(x, y), truth.has_edge(x, y)
        if got != want:
            total += 1
        elif got:
            total += learned.mark(y, x) != truth.mark(y, x)
            total += learned.mark(x, y) != truth.mark(x, y)
    return total


def bsf(c: ConfusionCounts) -> float:
    """Balanced scoring function in [-1, 1]; NaN when the truth has no edges or no non-edges."""
    if c.a == 0 or c.i == 0:
        return math.nan
    return 0.5 * (c.tp / c.a + c.tn / c.i - c.fp / c.i - c.fn / c.a)


def arrowhead_precision_recall(learned: MixedGraph, truth: MixedGraph) -> tuple[float, float]:
    """Precision/recall of arrowhead marks over every endpoint of either graph."""
    _same_nodes(learned, truth)

    def heads(g):
        return {(u, v) for a, b, ma, mb in g.edges() for (u, v, m) in ((b, a, ma), (a, b, mb)) if m is ARROW}

    got, want = heads(learned), heads(truth)
    hit = len(got & want)
    precision = hit / len(got) if got else (1.0 if not want else 0.0)
    recall = hit / len(want) if want else 1.0
    return precision, recall
