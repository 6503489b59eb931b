"""Graph-comparison metrics for scoring a learned structure against truth.

Adjacency counts run over unordered node pairs; arrowhead counts run over
endpoint arrow marks. Among pairs adjacent in both graphs, an edge counts
as correctly directed only when its endpoint marks match exactly, so a
directed-vs-undirected mismatch is one incorrect direction. SHD is
missing + extra + incorrectly directed. Ratios with a zero denominator
are reported as None (undefined), never coerced to 0 or 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GraphError
from .graphs import ARROW, MixedGraph


@dataclass(frozen=True)
class GraphComparison:
    missing_edges: int
    extra_edges: int
    incorrect_adjacencies: int
    correct_directed: int
    incorrect_directed: int
    shd: int
    adjacency_precision: float | None
    adjacency_recall: float | None
    arrowhead_precision: float | None
    arrowhead_recall: float | None

    def to_dict(self) -> dict:
        return {
            "missing_edges": self.missing_edges,
            "extra_edges": self.extra_edges,
            "incorrect_adjacencies": self.incorrect_adjacencies,
            "correct_directed": self.correct_directed,
            "incorrect_directed": self.incorrect_directed,
            "shd": self.shd,
            "adjacency_precision": self.adjacency_precision,
            "adjacency_recall": self.adjacency_recall,
            "arrowhead_precision": self.arrowhead_precision,
            "arrowhead_recall": self.arrowhead_recall,
        }


def _edge_map(g: MixedGraph) -> dict:
    """{frozenset(name pair): (mark at min-name, mark at max-name)}"""
    out = {}
    for i, j, ma, mb in g.edges():
        a, b = g.names[i], g.names[j]
        if a > b:
            a, b, ma, mb = b, a, mb, ma
        out[frozenset((a, b))] = (ma, mb)
    return out


def _arrowheads(g: MixedGraph) -> set:
    """(tail-end name, head name) for every endpoint with an arrow mark."""
    heads = set()
    for i, j, ma, mb in g.edges():
        a, b = g.names[i], g.names[j]
        if mb == ARROW:
            heads.add((a, b))
        if ma == ARROW:
            heads.add((b, a))
    return heads


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def compare_graphs(truth: MixedGraph, learned: MixedGraph) -> GraphComparison:
    """All comparison counts and ratios for a learned-vs-true graph pair."""
    if set(truth.names) != set(learned.names):
        raise GraphError("graphs are over different node sets")
    t_edges, l_edges = _edge_map(truth), _edge_map(learned)
    t_adj, l_adj = set(t_edges), set(l_edges)
    shared = t_adj & l_adj
    missing = len(t_adj - l_adj)
    extra = len(l_adj - t_adj)
    undirected = ("tail", "tail")
    incorrect_adjacencies = sum(
        1 for pair in l_adj - t_adj if l_edges[pair] == undirected
    )
    correct_directed = sum(1 for pair in shared if t_edges[pair] == l_edges[pair])
    incorrect_directed = len(shared) - correct_directed
    t_heads, l_heads = _arrowheads(truth), _arrowheads(learned)
    return GraphComparison(
        missing_edges=missing,
        extra_edges=extra,
        incorrect_adjacencies=incorrect_adjacencies,
        correct_directed=correct_directed,
        incorrect_directed=incorrect_directed,
        shd=missing + extra + incorrect_directed,
        adjacency_precision=_ratio(len(shared), len(l_adj)),
        adjacency_recall=_ratio(len(shared), len(t_adj)),
        arrowhead_precision=_ratio(len(t_heads & l_heads), len(l_heads)),
        arrowhead_recall=_ratio(len(t_heads & l_heads), len(t_heads)),
    )


def aoc(ranked_edges, truth: MixedGraph) -> float:
    """Area above the ROC curve (1 - AUC) for confidence-ranked adjacency
    candidates, ties sharing averaged ranks.

    ``ranked_edges`` is a sequence of ((a, b), confidence) pairs; a
    candidate is a positive when the pair is adjacent in ``truth``.
    """
    pairs = []
    for (a, b), conf in ranked_edges:
        conf = float(conf)
        if not math.isfinite(conf):
            raise GraphError("confidences must be finite")
        pairs.append((frozenset((str(a), str(b))), conf))
    positives = {frozenset((truth.names[i], truth.names[j]))
                 for i, j, *_ in truth.edges()}
    labels = [pair in positives for pair, _ in pairs]
    n_pos = sum(labels)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise GraphError("degenerate ROC: need at least one positive and one negative")
    order = sorted(range(len(pairs)), key=lambda k: pairs[k][1])
    ranks = [0.0] * len(pairs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and pairs[order[j + 1]][1] == pairs[order[i]][1]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    rank_sum = sum(r for r, lab in zip(ranks, labels) if lab)
    auc = (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    return 1.0 - auc
