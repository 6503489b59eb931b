"""Causal graph representations and structural queries.

A ``MixedGraph`` stores nodes plus endpoint-marked edges and can hold any
of the usual causal graph flavors: each endpoint of an edge carries a
``tail``, ``arrow``, or ``circle`` mark, so directed (tail/arrow),
undirected (tail/tail), bidirected (arrow/arrow) and partially oriented
(circle) edges all fit in one carrier. ``Dag`` and ``Cpdag`` are validated
restrictions of it.

Node identity is the positional index; names are labels. Every query
accepts either an index or a name. Graphs are immutable once built, so
all queries are safe to run concurrently.

Separation queries follow the standard blocking rules: on a path, a chain
or fork node blocks exactly when it *is* conditioned on, and a collider
blocks unless it or one of its descendants is conditioned on.
"""

from __future__ import annotations

import json
import re
from collections import deque
from typing import Iterable, Sequence

from .errors import GraphError

TAIL = "tail"
ARROW = "arrow"
CIRCLE = "circle"
_MARKS = (TAIL, ARROW, CIRCLE)

RELATIVE_KINDS = ("parents", "children", "ancestors", "descendants", "adjacent")
TRIPLE_KINDS = ("chain", "fork", "collider", "none")


class MixedGraph:
    """Immutable node set plus endpoint-marked edges.

    ``edges`` is an iterable of ``(a, b, mark_at_a, mark_at_b)``; nodes may
    be given as indices or names. At most one edge per node pair, no
    self-loops.
    """

    def __init__(self, names: Sequence[str], edges: Iterable[tuple] = ()):
        names = tuple(str(n) for n in names)
        if len(set(names)) != len(names):
            raise GraphError("duplicate node names")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}
        marks: dict[tuple[int, int], tuple[str, str]] = {}
        for a, b, ma, mb in edges:
            i, j = self._resolve(a), self._resolve(b)
            if i == j:
                raise GraphError(f"self-loop at node '{self.names[i]}'")
            if ma not in _MARKS or mb not in _MARKS:
                raise GraphError(f"invalid endpoint mark ({ma!r}, {mb!r})")
            if i > j:
                i, j, ma, mb = j, i, mb, ma
            if (i, j) in marks:
                raise GraphError(
                    f"duplicate edge between '{self.names[i]}' and '{self.names[j]}'"
                )
            marks[(i, j)] = (ma, mb)
        self._marks = marks
        n = len(names)
        self._adj = [set() for _ in range(n)]
        self._parents = [set() for _ in range(n)]   # u -> v directed edges only
        self._children = [set() for _ in range(n)]
        for (i, j), (ma, mb) in marks.items():
            self._adj[i].add(j)
            self._adj[j].add(i)
            if (ma, mb) == (TAIL, ARROW):
                self._children[i].add(j)
                self._parents[j].add(i)
            elif (ma, mb) == (ARROW, TAIL):
                self._children[j].add(i)
                self._parents[i].add(j)

    # -- node / edge access ------------------------------------------------

    def _resolve(self, v) -> int:
        if isinstance(v, (int,)) and not isinstance(v, bool):
            if 0 <= v < len(self.names):
                return v
            raise GraphError(f"unknown node id {v}")
        try:
            return self._index[v]
        except KeyError:
            raise GraphError(f"unknown node '{v}'") from None

    @property
    def n_nodes(self) -> int:
        return len(self.names)

    @property
    def n_edges(self) -> int:
        return len(self._marks)

    def has_edge(self, a, b) -> bool:
        i, j = self._resolve(a), self._resolve(b)
        return (min(i, j), max(i, j)) in self._marks

    def edge_marks(self, a, b) -> tuple[str, str]:
        """Marks (at a, at b) of the edge between a and b."""
        i, j = self._resolve(a), self._resolve(b)
        key = (min(i, j), max(i, j))
        if key not in self._marks:
            raise GraphError(
                f"no edge between '{self.names[i]}' and '{self.names[j]}'"
            )
        ma, mb = self._marks[key]
        return (ma, mb) if i < j else (mb, ma)

    def edges(self) -> list[tuple[int, int, str, str]]:
        """Canonical edge list, sorted, with i < j."""
        return [(i, j, ma, mb) for (i, j), (ma, mb) in sorted(self._marks.items())]

    def adjacent(self, v) -> set[int]:
        return set(self._adj[self._resolve(v)])

    def parents(self, v) -> set[int]:
        """Nodes u with a directed edge u -> v."""
        return set(self._parents[self._resolve(v)])

    def children(self, v) -> set[int]:
        return set(self._children[self._resolve(v)])

    def is_directed_edge(self, a, b) -> bool:
        """True iff the edge a -> b exists with (tail, arrow) marks."""
        i, j = self._resolve(a), self._resolve(b)
        return j in self._children[i]

    def is_undirected_edge(self, a, b) -> bool:
        i, j = self._resolve(a), self._resolve(b)
        key = (min(i, j), max(i, j))
        return self._marks.get(key) == (TAIL, TAIL)

    def all_directed(self) -> bool:
        return all(m in ((TAIL, ARROW), (ARROW, TAIL)) for m in self._marks.values())

    def skeleton_pairs(self) -> set[tuple[int, int]]:
        return set(self._marks)

    def __eq__(self, other):
        return (
            isinstance(other, MixedGraph)
            and self.names == other.names
            and self._marks == other._marks
        )

    def __hash__(self):
        return hash((self.names, tuple(sorted(self._marks.items()))))

    def __repr__(self):
        kind = type(self).__name__
        return f"{kind}({list(self.names)}, {self.edges()})"


class Dag(MixedGraph):
    """Directed acyclic graph; edges given as (parent, child) pairs."""

    def __init__(self, names: Sequence[str], edges: Iterable[tuple] = ()):
        super().__init__(names, [(a, b, TAIL, ARROW) for a, b in edges])
        order = _topological_order(self)
        if order is None:
            raise GraphError("graph contains a directed cycle")
        self._topo = order

    def topological_order(self) -> list[int]:
        return list(self._topo)


class Cpdag(MixedGraph):
    """Partially directed graph whose directed part is acyclic.

    ``directed`` edges are (parent, child) pairs, ``undirected`` are
    unordered pairs.
    """

    def __init__(self, names, directed=(), undirected=()):
        spec = [(a, b, TAIL, ARROW) for a, b in directed]
        spec += [(a, b, TAIL, TAIL) for a, b in undirected]
        super().__init__(names, spec)
        if _topological_order(self) is None:
            raise GraphError("directed part of the CPDAG contains a cycle")


def _topological_order(g: MixedGraph):
    """Kahn's algorithm over the directed part; None if cyclic."""
    indeg = [len(g._parents[v]) for v in range(g.n_nodes)]
    ready = deque(v for v in range(g.n_nodes) if indeg[v] == 0)
    order = []
    while ready:
        v = ready.popleft()
        order.append(v)
        for c in sorted(g._children[v]):
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return order if len(order) == g.n_nodes else None


def _require_all_directed(g: MixedGraph, what: str):
    for (i, j), (ma, mb) in g._marks.items():
        if (ma, mb) not in ((TAIL, ARROW), (ARROW, TAIL)):
            raise GraphError(
                f"unsupported mark ({ma}, {mb}) between '{g.names[i]}' and "
                f"'{g.names[j]}': {what} requires a fully directed graph"
            )


def _require_dag(g: MixedGraph, what: str):
    _require_all_directed(g, what)
    if not isinstance(g, Dag) and _topological_order(g) is None:
        raise GraphError(f"{what} requires an acyclic graph")


def _reach(g: MixedGraph, start: int, step) -> set[int]:
    seen, stack = set(), [start]
    while stack:
        v = stack.pop()
        for u in step(v):
            if u not in seen:
                seen.add(u)
                stack.append(u)
    seen.discard(start)
    return seen


def relatives(g: MixedGraph, v, kind: str) -> set[int]:
    """Parents, children, ancestors, descendants, or adjacent set of v.

    Ancestors and descendants exclude v itself.
    """
    i = g._resolve(v)
    if kind == "parents":
        return g.parents(i)
    if kind == "children":
        return g.children(i)
    if kind == "adjacent":
        return g.adjacent(i)
    if kind == "ancestors":
        _require_dag(g, "ancestor query")
        return _reach(g, i, lambda u: g._parents[u])
    if kind == "descendants":
        _require_dag(g, "descendant query")
        return _reach(g, i, lambda u: g._children[u])
    raise GraphError(f"unknown relative kind '{kind}' (expected one of {RELATIVE_KINDS})")


def is_acyclic(g: MixedGraph) -> bool:
    """True iff the (fully directed) graph admits a topological order."""
    _require_all_directed(g, "acyclicity test")
    return _topological_order(g) is not None


def classify_triple(g: MixedGraph, x, z, y) -> str:
    """Classify x-z-y as chain, fork, collider, or none.

    Requires the x-z and z-y edges (where present) to be directed.
    """
    xi, zi, yi = g._resolve(x), g._resolve(z), g._resolve(y)
    if len({xi, zi, yi}) != 3:
        raise GraphError("triple nodes must be distinct")
    if zi not in g._adj[xi] or zi not in g._adj[yi]:
        return "none"
    for a, b in ((xi, zi), (zi, yi)):
        marks = g.edge_marks(a, b)
        if marks not in ((TAIL, ARROW), (ARROW, TAIL)):
            raise GraphError("triple not fully oriented")
    into_z_from_x = g.is_directed_edge(xi, zi)
    into_z_from_y = g.is_directed_edge(yi, zi)
    if into_z_from_x and into_z_from_y:
        return "collider"
    if not into_z_from_x and not into_z_from_y:
        return "fork"
    return "chain"


def d_separated(g: MixedGraph, x, y, cond: Iterable = ()) -> bool:
    """True iff every path between x and y is blocked given ``cond``.

    Reachability ("Bayes ball") formulation: y is dependent on x exactly
    when some trail from x reaches y travelling through open nodes.
    """
    _require_dag(g, "d-separation")
    xi, yi = g._resolve(x), g._resolve(y)
    zs = frozenset(g._resolve(c) for c in cond)
    if xi == yi:
        raise GraphError("d-separation query needs two distinct nodes")
    if xi in zs or yi in zs:
        raise GraphError("query nodes may not appear in the conditioning set")

    # ancestors of the conditioning set, conditioning set included
    anc = set(zs)
    stack = list(zs)
    while stack:
        v = stack.pop()
        for p in g._parents[v]:
            if p not in anc:
                anc.add(p)
                stack.append(p)

    UP, DOWN = 0, 1  # direction of arrival: from a child / from a parent
    queue = deque([(xi, UP)])
    visited = set()
    while queue:
        v, d = queue.popleft()
        if (v, d) in visited:
            continue
        visited.add((v, d))
        if v == yi:
            return False
        if d == UP:
            if v not in zs:
                queue.extend((p, UP) for p in g._parents[v])
                queue.extend((c, DOWN) for c in g._children[v])
        else:
            if v not in zs:
                queue.extend((c, DOWN) for c in g._children[v])
            if v in anc:  # collider open: v in cond or has a descendant there
                queue.extend((p, UP) for p in g._parents[v])
    return True


def _v_structures(g: MixedGraph) -> set[tuple[int, int, int]]:
    """Unshielded colliders as (min parent, max parent, collider) triples."""
    out = set()
    for z in range(g.n_nodes):
        ps = sorted(g._parents[z])
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                x, y = ps[a], ps[b]
                if y not in g._adj[x]:
                    out.add((x, y, z))
    return out


def markov_equivalent(g1: MixedGraph, g2: MixedGraph) -> bool:
    """Same skeleton and same unshielded colliders."""
    _require_dag(g1, "Markov equivalence")
    _require_dag(g2, "Markov equivalence")
    if set(g1.names) != set(g2.names):
        raise GraphError("graphs are over different node sets")
    remap = [g1._resolve(n) for n in g2.names]

    def skel(g, ids):
        return {frozenset((ids[i], ids[j])) for i, j in g.skeleton_pairs()}

    ids1 = list(range(g1.n_nodes))
    if skel(g1, ids1) != skel(g2, remap):
        return False
    v1 = {(frozenset((x, y)), z) for x, y, z in _v_structures(g1)}
    v2 = {
        (frozenset((remap[x], remap[y])), remap[z])
        for x, y, z in _v_structures(g2)
    }
    return v1 == v2


def intervene(g: Dag, targets: Iterable) -> Dag:
    """Graph surgery: remove every edge into each target node."""
    _require_dag(g, "intervention")
    tset = {g._resolve(t) for t in targets}
    kept = []
    for i, j, ma, mb in g.edges():
        p, c = (i, j) if (ma, mb) == (TAIL, ARROW) else (j, i)
        if c not in tset:
            kept.append((p, c))
    return Dag(g.names, kept)


def backdoor_satisfied(g: Dag, x, y, cond: Iterable = ()) -> bool:
    """Backdoor criterion: cond holds no descendant of x and blocks every
    path into x that reaches y."""
    _require_dag(g, "backdoor check")
    xi, yi = g._resolve(x), g._resolve(y)
    zs = {g._resolve(c) for c in cond}
    if xi == yi:
        raise GraphError("treatment and outcome must differ")
    if xi in zs or yi in zs:
        raise GraphError("conditioning set may not contain treatment or outcome")
    if zs & relatives(g, xi, "descendants"):
        return False
    # dropping x's outgoing edges leaves exactly the paths into x
    kept = []
    for i, j, ma, mb in g.edges():
        p, c = (i, j) if (ma, mb) == (TAIL, ARROW) else (j, i)
        if p != xi:
            kept.append((p, c))
    stripped = Dag(g.names, kept)
    return d_separated(stripped, xi, yi, zs)


def find_backdoor_set(g: Dag, x, y, unobserved: Iterable = (), max_size: int = 4):
    """Smallest adjustment set satisfying the backdoor criterion.

    Candidates are observed non-descendants of x (excluding x and y);
    subsets are scanned by increasing size with index-order tie-breaking.
    Returns None when nothing admissible exists within ``max_size``.
    """
    from itertools import combinations

    xi, yi = g._resolve(x), g._resolve(y)
    hidden = {g._resolve(u) for u in unobserved}
    banned = relatives(g, xi, "descendants") | {xi, yi} | hidden
    candidates = [v for v in range(g.n_nodes) if v not in banned]
    for size in range(0, min(max_size, len(candidates)) + 1):
        for subset in combinations(candidates, size):
            if backdoor_satisfied(g, xi, yi, set(subset)):
                return set(subset)
    return None


# -- serialization ---------------------------------------------------------

_DOT_HEAD = {TAIL: "none", ARROW: "normal", CIRCLE: "odot"}
_DOT_HEAD_INV = {v: k for k, v in _DOT_HEAD.items()}
_DOT_ID = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _dot_name(name: str) -> str:
    if _DOT_ID.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(g: MixedGraph) -> str:
    """Graphviz text; plain ``a -> b`` for directed edges, explicit
    arrowhead/arrowtail attributes otherwise."""
    lines = ["digraph G {"]
    for name in g.names:
        lines.append(f"  {_dot_name(name)};")
    for i, j, ma, mb in g.edges():
        a, b = _dot_name(g.names[i]), _dot_name(g.names[j])
        if (ma, mb) == (TAIL, ARROW):
            lines.append(f"  {a} -> {b};")
        elif (ma, mb) == (ARROW, TAIL):
            lines.append(f"  {b} -> {a};")
        else:
            attrs = f"dir=both, arrowtail={_DOT_HEAD[ma]}, arrowhead={_DOT_HEAD[mb]}"
            lines.append(f"  {a} -> {b} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_DOT_NODE_RE = re.compile(r'^\s*("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*;\s*$')
_DOT_EDGE_RE = re.compile(
    r'^\s*("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*->\s*'
    r'("(?:[^"\\]|\\.)*"|[A-Za-z_][A-Za-z0-9_]*)\s*(?:\[([^\]]*)\])?\s*;\s*$'
)


def _dot_unquote(tok: str) -> str:
    if tok.startswith('"'):
        return tok[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    return tok


def from_dot(text: str) -> MixedGraph:
    """Parse the dialect emitted by :func:`to_dot`."""
    names: list[str] = []
    edges = []
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith(("digraph", "}")):
            continue
        m = _DOT_NODE_RE.match(line)
        if m:
            names.append(_dot_unquote(m.group(1)))
            continue
        m = _DOT_EDGE_RE.match(line)
        if not m:
            raise GraphError(f"unparseable DOT line: {stripped!r}")
        a, b = _dot_unquote(m.group(1)), _dot_unquote(m.group(2))
        attrs = m.group(3)
        if attrs is None:
            edges.append((a, b, TAIL, ARROW))
        else:
            kv = dict(
                part.strip().split("=", 1)
                for part in attrs.split(",")
                if "=" in part
            )
            try:
                ma = _DOT_HEAD_INV[kv["arrowtail"].strip()]
                mb = _DOT_HEAD_INV[kv["arrowhead"].strip()]
            except KeyError as exc:
                raise GraphError(f"unknown DOT arrow attribute in {stripped!r}") from exc
            edges.append((a, b, ma, mb))
    for a, b, *_ in edges:
        for nm in (a, b):
            if nm not in names:
                names.append(nm)
    return MixedGraph(names, edges)


def graph_to_dict(g: MixedGraph) -> dict:
    return {
        "nodes": list(g.names),
        "edges": [
            {"a": g.names[i], "b": g.names[j], "mark_a": ma, "mark_b": mb}
            for i, j, ma, mb in g.edges()
        ],
    }


def graph_from_dict(obj: dict) -> MixedGraph:
    try:
        names = obj["nodes"]
        edges = [(e["a"], e["b"], e["mark_a"], e["mark_b"]) for e in obj["edges"]]
    except (KeyError, TypeError) as exc:
        raise GraphError(f"malformed graph JSON: missing {exc}") from exc
    return MixedGraph(names, edges)


def graph_to_json(g: MixedGraph) -> str:
    return json.dumps(graph_to_dict(g), indent=2) + "\n"


def graph_from_json(text: str) -> MixedGraph:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphError(f"invalid graph JSON: {exc}") from exc
    return graph_from_dict(obj)


def as_dag(g: MixedGraph) -> Dag:
    """Reinterpret a fully directed MixedGraph as a Dag."""
    if isinstance(g, Dag):
        return g
    _require_all_directed(g, "DAG conversion")
    pairs = [
        ((i, j) if (ma, mb) == (TAIL, ARROW) else (j, i))
        for i, j, ma, mb in g.edges()
    ]
    return Dag(g.names, pairs)
