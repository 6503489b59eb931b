"""Score-based structure discovery (greedy equivalence search).

Decomposable BIC scores (Gaussian via least squares, discrete via
conditional frequency tables) drive a forward insertion phase and a
backward deletion phase over equivalence classes, with the usual operator
validity conditions. After every applied operator the class is re-closed
by extending to a DAG and re-completing, so the state is always a valid
CPDAG. Scores are "higher is better": log-likelihood fit minus penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .dataset import CONTINUOUS, DISCRETE, Dataset
from .errors import DataError
from .graphs import Cpdag
from .knowledge import EMPTY, Knowledge
from .orient import Pdag, meek_closure, orient_with_knowledge, pdag_to_dag
from .graphs import _v_structures

__all__ = [
    "GaussianBicScore",
    "DiscreteBicScore",
    "ScoredGraph",
    "FgesResult",
    "gaussian_bic_local",
    "discrete_bic_local",
    "fges",
    "run_fges",
]

_MIN_VARIANCE_RATIO = 1e-300  # zero-residual guard for exact functional fits


@dataclass(frozen=True)
class ScoredGraph:
    graph: Cpdag
    total_score: float


class GaussianBicScore:
    """Local BIC of a node given parents under a linear-Gaussian model.

    local = -(n/2) ln(RSS/n) - penalty * ((|parents|+1)/2) ln(n), where RSS
    comes from least squares with an intercept. Cached per (node, parents).
    """

    def __init__(self, d: Dataset, penalty: float = 1.0, use_cache: bool = True):
        for name, kind in zip(d.names, d.kinds):
            if kind != CONTINUOUS:
                raise DataError(f"gaussian score requires continuous columns ('{name}')")
        self.names = list(d.names)
        self.n = d.n
        self.penalty = penalty
        self.use_cache = use_cache
        centered = d.values - d.values.mean(axis=0)
        self._moment = (centered.T @ centered) / d.n
        self._cache: dict = {}

    def local(self, node: int, parents) -> float:
        parents = tuple(sorted(parents))
        if self.n <= len(parents) + 1:
            raise DataError("gaussian score needs n > |parents| + 1")
        key = (node, parents)
        if self.use_cache and key in self._cache:
            return self._cache[key]
        s_yy = self._moment[node, node]
        if parents:
            sub = self._moment[np.ix_(parents, parents)]
            cross = self._moment[np.ix_(parents, [node])].ravel()
            if np.linalg.cond(sub) > 1e12:
                raise DataError("collinear parents")
            try:
                chol = np.linalg.cholesky(sub)
            except np.linalg.LinAlgError:
                raise DataError("collinear parents") from None
            w = np.linalg.solve(chol, cross)
            resid_var = s_yy - float(w @ w)
        else:
            resid_var = s_yy
        resid_var = max(float(resid_var), _MIN_VARIANCE_RATIO)
        k = len(parents) + 1
        value = -(self.n / 2.0) * math.log(resid_var) \
            - self.penalty * (k / 2.0) * math.log(self.n)
        if self.use_cache:
            self._cache[key] = value
        return value


class DiscreteBicScore:
    """Local BIC of a discrete node given discrete parents.

    local = log-likelihood of the conditional frequency table minus
    penalty * (dof/2) ln(n), dof = (k_node - 1) * prod k_parent. Empty
    parent strata contribute zero likelihood.
    """

    def __init__(self, d: Dataset, penalty: float = 1.0, use_cache: bool = True):
        for name, kind in zip(d.names, d.kinds):
            if kind != DISCRETE:
                raise DataError(f"discrete score requires discrete columns ('{name}')")
        self.names = list(d.names)
        self.n = d.n
        self.penalty = penalty
        self.use_cache = use_cache
        self._codes = d.values.astype(np.int64)
        self._levels = [d.levels(n) for n in d.names]
        self._cache: dict = {}

    def local(self, node: int, parents) -> float:
        parents = tuple(sorted(parents))
        key = (node, parents)
        if self.use_cache and key in self._cache:
            return self._cache[key]
        k_node = self._levels[node]
        xv = self._codes[:, node]
        if parents:
            dims = [self._levels[p] for p in parents]
            strata = np.ravel_multi_index(
                [self._codes[:, p] for p in parents], dims
            )
            n_strata = int(np.prod(dims))
        else:
            strata = np.zeros(self.n, dtype=np.int64)
            n_strata = 1
        counts = np.bincount(
            strata * k_node + xv, minlength=n_strata * k_node
        ).reshape(n_strata, k_node)
        totals = np.broadcast_to(counts.sum(axis=1)[:, None], counts.shape)
        mask = counts > 0
        ll = float(np.sum(counts[mask] * np.log(counts[mask] / totals[mask])))
        dof = (k_node - 1) * int(np.prod([self._levels[p] for p in parents])) \
            if parents else (k_node - 1)
        value = ll - self.penalty * (dof / 2.0) * math.log(self.n)
        if self.use_cache:
            self._cache[key] = value
        return value


def gaussian_bic_local(d: Dataset, node, parents=(), penalty: float = 1.0) -> float:
    scorer = GaussianBicScore(d, penalty)
    return scorer.local(d.index(node), [d.index(p) for p in parents])


def discrete_bic_local(d: Dataset, node, parents=(), penalty: float = 1.0) -> float:
    scorer = DiscreteBicScore(d, penalty)
    return scorer.local(d.index(node), [d.index(p) for p in parents])


@dataclass
class FgesResult:
    scored: ScoredGraph
    operators: list = field(default_factory=list)
    initial_score: float = 0.0
    skipped_collinear: int = 0


def _clique(p: Pdag, nodes) -> bool:
    nodes = list(nodes)
    return all(
        p.adjacent(nodes[i], nodes[j])
        for i in range(len(nodes))
        for j in range(i + 1, len(nodes))
    )


def _blocks_all_semidirected(p: Pdag, src: int, dst: int, blocked) -> bool:
    """True iff every semi-directed path src ~> dst meets ``blocked``."""
    if src in blocked:
        return True
    seen = {src}
    stack = [src]
    while stack:
        v = stack.pop()
        for u in sorted(p.children[v] | p.und[v]):
            if u == dst:
                return False
            if u not in seen and u not in blocked:
                seen.add(u)
                stack.append(u)
    return True


def _reclose(p: Pdag, knowledge: Knowledge) -> Pdag:
    """Re-complete the equivalence class: extend to a DAG, then re-orient
    v-structures plus knowledge and run Meek closure."""
    dag = pdag_to_dag(p)
    q = Pdag(p.names)
    for i, j, *_ in dag.edges():
        q.add_undirected(i, j)
    for x, y, z in sorted(_v_structures(dag)):
        if q.has_undirected(x, z):
            q.orient(x, z)
        if q.has_undirected(y, z):
            q.orient(y, z)
    orient_with_knowledge(q, knowledge)
    meek_closure(q, knowledge)
    return q


def run_fges(
    d: Dataset,
    score: str = "auto",
    penalty: float = 1.0,
    knowledge: Knowledge = EMPTY,
    max_subset: int = 3,
) -> FgesResult:
    if d.p < 2:
        raise DataError("discovery needs at least two variables")
    if score == "auto":
        kinds = set(d.kinds)
        if kinds == {CONTINUOUS}:
            score = "gaussian_bic"
        elif kinds == {DISCRETE}:
            score = "discrete_bic"
        else:
            raise DataError(
                "dataset mixes continuous and discrete columns; pick a score "
                "explicitly (or coerce kinds)"
            )
    if score == "gaussian_bic":
        scorer = GaussianBicScore(d, penalty)
    elif score == "discrete_bic":
        scorer = DiscreteBicScore(d, penalty)
    else:
        raise DataError(f"unknown score '{score}'")

    names = list(d.names)
    p = len(names)
    pd = Pdag(names)
    for i in range(p):
        for j in range(p):
            if i != j and knowledge.is_required(names[i], names[j]):
                pd.add_directed(i, j)
    if any(pd.children[i] for i in range(p)):
        pd = _reclose(pd, knowledge)

    result = FgesResult(scored=None)

    def local(y, parents):
        return scorer.local(y, tuple(sorted(parents)))

    def guarded_local(y, parents):
        try:
            return local(y, parents)
        except DataError:
            result.skipped_collinear += 1
            return None

    def total_of(pdag: Pdag) -> float:
        dag = pdag_to_dag(pdag)
        return sum(local(v, dag.parents(v)) for v in range(p))

    result.initial_score = total_of(pd)
    total = result.initial_score

    # ---- forward phase: best positive Insert(x, y, T) ----
    while True:
        best = None  # (delta, x, y, T)
        for y in range(p):
            pa_y = pd.parents[y]
            for x in range(p):
                if x == y or pd.adjacent(x, y):
                    continue
                if knowledge.is_forbidden(names[x], names[y]):
                    continue
                na = {w for w in pd.und[y] if pd.adjacent(w, x)}
                t_pool = sorted(w for w in pd.und[y] if not pd.adjacent(w, x))
                for size in range(0, min(max_subset, len(t_pool)) + 1):
                    for T in combinations(t_pool, size):
                        s = na | set(T)
                        if not _clique(pd, s):
                            continue
                        if not _blocks_all_semidirected(pd, y, x, s):
                            continue
                        if any(
                            knowledge.is_forbidden(names[t], names[y]) for t in T
                        ):
                            continue
                        base = guarded_local(y, pa_y | s)
                        grown = guarded_local(y, pa_y | s | {x})
                        if base is None or grown is None:
                            continue
                        delta = grown - base
                        if delta > 1e-10 and (best is None or delta > best[0] + 1e-12):
                            best = (delta, x, y, T)
        if best is None:
            break
        delta, x, y, T = best
        pd.add_directed(x, y)
        for t in T:
            if pd.has_undirected(t, y):
                pd.orient(t, y)
        pd = _reclose(pd, knowledge)
        total += delta
        result.operators.append(
            {"op": "insert", "x": names[x], "y": names[y],
             "t": [names[t] for t in T], "delta": delta}
        )

    # ---- backward phase: best positive Delete(x, y, H) ----
    while True:
        best = None  # (delta, x, y, H)
        for y in range(p):
            pa_y = pd.parents[y]
            for x in range(p):
                if x == y:
                    continue
                if not (pd.has_directed(x, y) or pd.has_undirected(x, y)):
                    continue
                if knowledge.is_required(names[x], names[y]) or \
                        knowledge.is_required(names[y], names[x]):
                    continue
                na = {w for w in pd.und[y] if pd.adjacent(w, x)}
                h_pool = sorted(na)
                for size in range(0, min(max_subset, len(h_pool)) + 1):
                    for H in combinations(h_pool, size):
                        keep = na - set(H)
                        if not _clique(pd, keep):
                            continue
                        forced = [(y, h) for h in H if pd.has_undirected(y, h)]
                        forced += [(x, h) for h in H if pd.has_undirected(x, h)]
                        if any(
                            knowledge.is_forbidden(names[a], names[b])
                            for a, b in forced
                        ):
                            continue
                        with_x = guarded_local(y, (pa_y | keep) | {x})
                        without_x = guarded_local(y, (pa_y | keep) - {x})
                        if with_x is None or without_x is None:
                            continue
                        delta = without_x - with_x
                        if delta > 1e-10 and (best is None or delta > best[0] + 1e-12):
                            best = (delta, x, y, H)
        if best is None:
            break
        delta, x, y, H = best
        pd.remove_edge(x, y)
        for h in H:
            if pd.has_undirected(y, h):
                pd.orient(y, h)
            if pd.has_undirected(x, h):
                pd.orient(x, h)
        pd = _reclose(pd, knowledge)
        total += delta
        result.operators.append(
            {"op": "delete", "x": names[x], "y": names[y],
             "h": [names[h] for h in H], "delta": delta}
        )

    final_total = total_of(pd)
    result.scored = ScoredGraph(pd.to_cpdag(), final_total)
    return result


def fges(
    d: Dataset,
    score: str = "auto",
    penalty: float = 1.0,
    knowledge: Knowledge = EMPTY,
    max_subset: int = 3,
) -> ScoredGraph:
    """Two-phase greedy equivalence search; returns the final scored CPDAG."""
    return run_fges(d, score, penalty, knowledge, max_subset).scored
