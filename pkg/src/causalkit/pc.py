"""Constraint-based structure discovery (stable-skeleton PC).

The skeleton pass uses adjacency sets frozen at the start of each level,
so the result does not depend on variable order. Unshielded triples are
then oriented as colliders from the recorded separating sets, background
knowledge is enforced, and the Meek rules close the orientation.
Conflicting collider claims resolve first-come in node order and are
counted in the run result rather than silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .citests import CiResult, OracleCiTest, fisher_z_test, g_square_test
from .dataset import CONTINUOUS, DISCRETE, Dataset
from .errors import DataError
from .graphs import MixedGraph
from .knowledge import EMPTY, Knowledge
from .orient import Pdag, apply_meek_rules, meek_closure, orient_with_knowledge

__all__ = ["SepsetMap", "PcResult", "pc", "run_pc", "apply_meek_rules"]


class SepsetMap:
    """Conditioning sets that removed each edge during skeleton search."""

    def __init__(self):
        self._sets: dict[frozenset, tuple] = {}

    def record(self, a, b, sepset) -> None:
        self._sets[frozenset((a, b))] = tuple(sepset)

    def get(self, a, b):
        return self._sets.get(frozenset((a, b)))

    def __contains__(self, pair) -> bool:
        return frozenset(pair) in self._sets

    def __len__(self) -> int:
        return len(self._sets)

    def items(self):
        return [(tuple(sorted(k)), v) for k, v in sorted(
            self._sets.items(), key=lambda kv: tuple(sorted(kv[0]))
        )]


@dataclass
class PcResult:
    graph: MixedGraph
    sepsets: SepsetMap
    collider_conflicts: int = 0
    tests_run: int = 0
    degenerate_tests: int = 0
    knowledge_removed: list = field(default_factory=list)


def _make_ci(data_or_oracle, test: str, alpha: float):
    """Bind a CI callable over column names, plus the node-name list."""
    if isinstance(data_or_oracle, OracleCiTest):
        oracle = data_or_oracle
        return list(oracle.names), lambda x, y, S: oracle(x, y, S)
    if callable(data_or_oracle) and hasattr(data_or_oracle, "names"):
        src = data_or_oracle
        return list(src.names), lambda x, y, S: src(x, y, S)
    if not isinstance(data_or_oracle, Dataset):
        raise DataError("pc expects a Dataset or a CI oracle with .names")
    d = data_or_oracle
    if test == "auto":
        kinds = set(d.kinds)
        if kinds == {CONTINUOUS}:
            test = "fisherz"
        elif kinds == {DISCRETE}:
            test = "g2"
        else:
            raise DataError(
                "dataset mixes continuous and discrete columns; pick a test "
                "explicitly (or coerce kinds) rather than relying on a default"
            )
    if test == "fisherz":
        fn = lambda x, y, S: fisher_z_test(d, x, y, S, alpha)
    elif test == "g2":
        fn = lambda x, y, S: g_square_test(d, x, y, S, alpha)
    else:
        raise DataError(f"unknown CI test '{test}'")
    return list(d.names), fn


def run_pc(
    data_or_oracle,
    test: str = "auto",
    alpha: float = 0.05,
    knowledge: Knowledge = EMPTY,
    max_cond: int | None = 3,
) -> PcResult:
    names, ci = _make_ci(data_or_oracle, test, alpha)
    p = len(names)
    if p < 2:
        raise DataError("discovery needs at least two variables")
    if not (0.0 < alpha < 1.0):
        raise DataError("alpha must lie in (0, 1)")
    if max_cond is not None and max_cond < 0:
        raise DataError("max_cond must be nonnegative")
    if max_cond is None:
        max_cond = p - 2

    result = PcResult(graph=None, sepsets=SepsetMap())
    adj = [set(range(p)) - {i} for i in range(p)]

    # knowledge can rule out an adjacency outright (both directions blocked);
    # such pairs are treated as marginally separated for orientation purposes
    required_pairs = set()
    for i in range(p):
        for j in range(i + 1, p):
            a, b = names[i], names[j]
            if knowledge.is_required(a, b) or knowledge.is_required(b, a):
                required_pairs.add((i, j))
            elif knowledge.is_forbidden(a, b) and knowledge.is_forbidden(b, a):
                adj[i].discard(j)
                adj[j].discard(i)
                result.sepsets.record(i, j, ())
                result.knowledge_removed.append((a, b))

    def independent(x, y, S) -> bool:
        result.tests_run += 1
        try:
            res: CiResult = ci(names[x], names[y], tuple(names[s] for s in S))
        except DataError:
            # degenerate test (collinear / insufficient strata): cannot
            # certify independence, keep the edge
            result.degenerate_tests += 1
            return False
        return res.independent

    level = 0
    while level <= max_cond:
        frozen = [sorted(adj[i]) for i in range(p)]
        if all(len(frozen[i]) - 1 < level for i in range(p)):
            break
        for i in range(p):
            for j in range(i + 1, p):
                if j not in adj[i] or (i, j) in required_pairs:
                    continue
                removed = False
                for x, y in ((i, j), (j, i)):
                    cands = [c for c in frozen[x] if c != y]
                    if len(cands) < level:
                        continue
                    for S in combinations(cands, level):
                        if independent(x, y, S):
                            adj[i].discard(j)
                            adj[j].discard(i)
                            result.sepsets.record(i, j, S)
                            removed = True
                            break
                    if removed:
                        break
        level += 1

    # orientation
    pd = Pdag(names)
    for i in range(p):
        for j in adj[i]:
            if i < j:
                pd.add_undirected(i, j)
    orient_with_knowledge(pd, knowledge)

    def try_collider_arm(a, z):
        if pd.has_directed(a, z):
            return
        if pd.has_directed(z, a):
            result.collider_conflicts += 1
            return
        if not pd.has_undirected(a, z):
            return
        na, nz = names[a], names[z]
        if knowledge.is_forbidden(na, nz):
            if not knowledge.is_forbidden(nz, na):
                pd.orient(z, a)  # downgrade to the allowed direction
            return
        pd.orient(a, z)

    for x in range(p):
        for y in range(x + 1, p):
            if y in adj[x]:
                continue
            sepset = result.sepsets.get(x, y)
            if sepset is None:
                continue
            for z in sorted(adj[x] & adj[y]):
                if z not in sepset:
                    try_collider_arm(x, z)
                    try_collider_arm(y, z)

    meek_closure(pd, knowledge)
    result.graph = pd.to_graph()
    return result


def pc(
    data_or_oracle,
    test: str = "auto",
    alpha: float = 0.05,
    knowledge: Knowledge = EMPTY,
    max_cond: int | None = 3,
):
    """PC-stable discovery; returns (graph, separating-set map)."""
    res = run_pc(data_or_oracle, test, alpha, knowledge, max_cond)
    return res.graph, res.sepsets
