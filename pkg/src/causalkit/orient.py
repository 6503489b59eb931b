"""Edge-orientation machinery shared by CPDAG construction and search.

Holds the mutable partially-directed working graph used internally by the
discovery algorithms, the four Meek orientation rules, equivalence-class
completion (DAG -> CPDAG), and the Dor-Tarsi consistent extension
(PDAG -> DAG).
"""

from __future__ import annotations

from .errors import GraphError
from .graphs import ARROW, TAIL, Cpdag, Dag, MixedGraph, _v_structures
from .knowledge import EMPTY, Knowledge


class Pdag:
    """Mutable graph with directed and undirected edges, index-addressed."""

    def __init__(self, names):
        self.names = tuple(names)
        n = len(self.names)
        self.parents = [set() for _ in range(n)]
        self.children = [set() for _ in range(n)]
        self.und = [set() for _ in range(n)]

    @classmethod
    def from_graph(cls, g: MixedGraph) -> "Pdag":
        p = cls(g.names)
        for i, j, ma, mb in g.edges():
            if (ma, mb) == (TAIL, ARROW):
                p.add_directed(i, j)
            elif (ma, mb) == (ARROW, TAIL):
                p.add_directed(j, i)
            elif (ma, mb) == (TAIL, TAIL):
                p.add_undirected(i, j)
            else:
                raise GraphError(
                    f"unsupported mark ({ma}, {mb}); only directed and "
                    "undirected edges can be oriented"
                )
        return p

    @property
    def n(self):
        return len(self.names)

    def add_directed(self, a, b):
        self.children[a].add(b)
        self.parents[b].add(a)

    def add_undirected(self, a, b):
        self.und[a].add(b)
        self.und[b].add(a)

    def adjacent(self, a, b) -> bool:
        return b in self.und[a] or b in self.children[a] or b in self.parents[a]

    def has_directed(self, a, b) -> bool:
        return b in self.children[a]

    def has_undirected(self, a, b) -> bool:
        return b in self.und[a]

    def neighbors(self, a) -> set:
        return self.und[a] | self.children[a] | self.parents[a]

    def orient(self, a, b):
        """Turn the undirected edge a - b into a -> b."""
        self.und[a].discard(b)
        self.und[b].discard(a)
        self.add_directed(a, b)

    def remove_edge(self, a, b):
        self.und[a].discard(b)
        self.und[b].discard(a)
        self.children[a].discard(b)
        self.parents[b].discard(a)
        self.children[b].discard(a)
        self.parents[a].discard(b)

    def copy(self) -> "Pdag":
        p = Pdag(self.names)
        p.parents = [set(s) for s in self.parents]
        p.children = [set(s) for s in self.children]
        p.und = [set(s) for s in self.und]
        return p

    def to_graph(self) -> MixedGraph:
        edges = []
        for a in range(self.n):
            for b in self.children[a]:
                edges.append((a, b, TAIL, ARROW))
            for b in self.und[a]:
                if a < b:
                    edges.append((a, b, TAIL, TAIL))
        return MixedGraph(self.names, edges)

    def to_cpdag(self) -> Cpdag:
        directed, undirected = [], []
        for a in range(self.n):
            directed.extend((a, b) for b in self.children[a])
            undirected.extend((a, b) for b in self.und[a] if a < b)
        return Cpdag(self.names, directed, undirected)


def meek_closure(p: Pdag, knowledge: Knowledge = EMPTY) -> int:
    """Apply Meek rules R1-R4 to a fixed point, in place.

    A rule never fires toward a knowledge-forbidden direction. Returns the
    number of orientations made.
    """

    def allowed(a, b):
        return not knowledge.is_forbidden(p.names[a], p.names[b])

    made = 0
    changed = True
    while changed:
        changed = False
        for a in range(p.n):
            for b in sorted(p.und[a]):
                if _meek_fires(p, a, b) and allowed(a, b):
                    p.orient(a, b)
                    made += 1
                    changed = True
    return made


def _meek_fires(p: Pdag, a, b) -> bool:
    """Would some Meek rule orient the undirected edge a - b as a -> b?"""
    # R1: c -> a - b with c, b nonadjacent
    for c in p.parents[a]:
        if c != b and not p.adjacent(c, b):
            return True
    # R2: a -> c -> b with a - b
    for c in p.children[a]:
        if b in p.children[c]:
            return True
    # R3: a - c -> b and a - d -> b with c, d nonadjacent
    spokes = [c for c in p.und[a] if c != b and b in p.children[c]]
    for i in range(len(spokes)):
        for j in range(i + 1, len(spokes)):
            if not p.adjacent(spokes[i], spokes[j]):
                return True
    # R4: a - d, d -> c, c -> b, with a, c adjacent and d, b nonadjacent
    for d in p.und[a]:
        if d == b:
            continue
        for c in p.children[d]:
            if b in p.children[c] and p.adjacent(a, c) and not p.adjacent(d, b):
                return True
    return False


def apply_meek_rules(g: MixedGraph, knowledge: Knowledge = EMPTY) -> MixedGraph:
    """Meek-rule closure of a graph with directed/undirected edges only."""
    p = Pdag.from_graph(g)
    meek_closure(p, knowledge)
    return p.to_graph()


def cpdag_of(g: Dag) -> Cpdag:
    """Completion of the Markov equivalence class of a DAG.

    Keeps the skeleton, orients the unshielded colliders, and closes under
    the Meek rules; every other edge is left undirected.
    """
    if not isinstance(g, Dag):
        g = Dag(g.names, [
            ((i, j) if (ma, mb) == (TAIL, ARROW) else (j, i))
            for i, j, ma, mb in g.edges()
        ])
    p = Pdag(g.names)
    for i, j, *_ in g.edges():
        p.add_undirected(i, j)
    for x, y, z in sorted(_v_structures(g)):
        if p.has_undirected(x, z):
            p.orient(x, z)
        if p.has_undirected(y, z):
            p.orient(y, z)
    meek_closure(p)
    return p.to_cpdag()


def pdag_to_dag(g: MixedGraph | Pdag) -> Dag:
    """Dor-Tarsi consistent extension of a PDAG to a DAG.

    Raises GraphError when no extension exists.
    """
    p = g.copy() if isinstance(g, Pdag) else Pdag.from_graph(g)
    names = p.names
    directed = [(a, b) for a in range(p.n) for b in p.children[a]]
    remaining = set(range(p.n))
    while remaining:
        found = None
        for x in sorted(remaining):
            if p.children[x] & remaining:
                continue  # not a sink in the directed part
            nbrs = (p.neighbors(x) & remaining) - p.children[x]
            und = p.und[x] & remaining
            if all(
                p.adjacent(u, w)
                for u in und
                for w in nbrs
                if u != w
            ):
                found = x
                break
        if found is None:
            raise GraphError("PDAG admits no consistent DAG extension")
        for u in sorted(p.und[found] & remaining):
            directed.append((u, found))
        remaining.discard(found)
    # drop duplicates introduced by the initial directed listing
    seen, pairs = set(), []
    for a, b in directed:
        if (a, b) not in seen:
            seen.add((a, b))
            pairs.append((a, b))
    return Dag(names, pairs)


def orient_with_knowledge(p: Pdag, knowledge: Knowledge) -> None:
    """Fix required directions and single-sided forbidden edges, in place."""
    if knowledge.is_empty():
        return
    for a in range(p.n):
        for b in sorted(p.und[a]):
            if a > b:
                continue
            na, nb = p.names[a], p.names[b]
            if knowledge.is_required(na, nb):
                p.orient(a, b)
            elif knowledge.is_required(nb, na):
                p.orient(b, a)
            elif knowledge.is_forbidden(na, nb) and not knowledge.is_forbidden(nb, na):
                p.orient(b, a)
            elif knowledge.is_forbidden(nb, na) and not knowledge.is_forbidden(na, nb):
                p.orient(a, b)
