"""Mixed graphs with endpoint marks: DAGs, MAGs and PAGs.

Every edge carries one mark at each endpoint (tail, arrow or circle).
``A -> B`` is stored as ``(A, B, TAIL, ARROW)``, ``A <-> B`` as
``(A, B, ARROW, ARROW)`` and ``A o-> B`` as ``(A, B, CIRCLE, ARROW)``.

Graphs are immutable; helpers such as :meth:`MixedGraph.with_edge` return
new instances.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from collections.abc import Iterable, Sequence
from pathlib import Path


class Mark(enum.Enum):
    TAIL = "tail"
    ARROW = "arrow"
    CIRCLE = "circle"

    def __repr__(self) -> str:
        return f"Mark.{self.name}"


TAIL, ARROW, CIRCLE = Mark.TAIL, Mark.ARROW, Mark.CIRCLE

DAG = "DAG"
MAG = "MAG"
PAG = "PAG"
UNCLASSIFIED = "Unclassified"
KINDS = (DAG, MAG, PAG, UNCLASSIFIED)


class GraphError(ValueError):
    """Raised for malformed graphs or invalid node references."""


class MixedGraph:
    """Graph with at most one edge per node pair and a mark at each end.

    Parameters
    ----------
    nodes : iterable of str
        Node identifiers. They are stored in lexicographic order, which is
        the canonical iteration order for every algorithm in the package.
    edges : iterable of (u, v, mark_at_u, mark_at_v)
    kind : {"DAG", "MAG", "PAG", "Unclassified"}
        A label only; use :func:`validate_mag` to check MAG properties.
    """

    __slots__ = ("nodes", "kind", "_marks", "_index")

    def __init__(
        self,
        nodes: Iterable[str],
        edges: Iterable[tuple[str, str, Mark, Mark]] = (),
        kind: str = UNCLASSIFIED,
    ):
        if kind not in KINDS:
            raise GraphError(f"unknown graph kind {kind!r}")
        self.nodes: tuple[str, ...] = tuple(sorted(set(nodes)))
        self.kind = kind
        self._index = {v: i for i, v in enumerate(self.nodes)}
        # _marks[u][v] is the mark at v on the edge u - v
        self._marks: dict[str, dict[str, Mark]] = {v: {} for v in self.nodes}
        for u, v, mu, mv in edges:
            self._check_node(u)
            self._check_node(v)
            if u == v:
                raise GraphError(f"self-loop on {u}")
            if v in self._marks[u]:
                raise GraphError(f"more than one edge between {u} and {v}")
            self._marks[u][v] = Mark(mv)
            self._marks[v][u] = Mark(mu)

    # ------------------------------------------------------------------
    # basic queries

    def _check_node(self, v: str) -> None:
        if v not in self._index:
            raise GraphError(f"unknown node {v!r}")

    def __contains__(self, v: object) -> bool:
        return v in self._index

    def __len__(self) -> int:
        return len(self.nodes)

    def index(self, v: str) -> int:
        self._check_node(v)
        return self._index[v]

    def has_edge(self, u: str, v: str) -> bool:
        return v in self._marks.get(u, ())

    def mark(self, u: str, v: str) -> Mark:
        """Mark at ``v`` on the edge ``u - v``."""
        try:
            return self._marks[u][v]
        except KeyError:
            raise GraphError(f"no edge between {u!r} and {v!r}") from None

    def adjacent(self, v: str) -> list[str]:
        self._check_node(v)
        return sorted(self._marks[v])

    def is_directed(self, u: str, v: str) -> bool:
        """True iff ``u -> v``."""
        m = self._marks[u].get(v)
        return m is ARROW and self._marks[v][u] is TAIL

    def is_bidirected(self, u: str, v: str) -> bool:
        m = self._marks[u].get(v)
        return m is ARROW and self._marks[v][u] is ARROW

    def parents(self, v: str) -> list[str]:
        return [u for u in self.adjacent(v) if self.is_directed(u, v)]

    def children(self, v: str) -> list[str]:
        return [w for w in self.adjacent(v) if self.is_directed(v, w)]

    def spouses(self, v: str) -> list[str]:
        return [w for w in self.adjacent(v) if self.is_bidirected(v, w)]

    def edges(self) -> list[tuple[str, str, Mark, Mark]]:
        """Canonical edge list ``(a, b, mark_at_a, mark_at_b)`` with ``a < b``."""
        out = []
        for a in self.nodes:
            for b in sorted(self._marks[a]):
                if a < b:
                    out.append((a, b, self._marks[b][a], self._marks[a][b]))
        return out

    def num_edges(self) -> int:
        return sum(len(nb) for nb in self._marks.values()) // 2

    def directed_edges(self) -> list[tuple[str, str]]:
        return [
            (u, v) for u in self.nodes for v in sorted(self._marks[u]) if self.is_directed(u, v)
        ]

    def bidirected_edges(self) -> list[tuple[str, str]]:
        return [(a, b) for a, b, ma, mb in self.edges() if ma is ARROW and mb is ARROW]

    def ancestors(self, targets: Iterable[str]) -> set[str]:
        """Nodes with a directed path into ``targets`` (targets included)."""
        seen = set()
        stack = list(targets)
        for t in stack:
            self._check_node(t)
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(u for u in self._marks[v] if self.is_directed(u, v))
        return seen

    def descendants(self, sources: Iterable[str]) -> set[str]:
        seen = set()
        stack = list(sources)
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            stack.extend(w for w in self._marks[v] if self.is_directed(v, w))
        return seen

    # ------------------------------------------------------------------
    # derived graphs

    def with_edge(self, u: str, v: str, mu: Mark, mv: Mark, kind: str | None = None) -> MixedGraph:
        """Copy with the ``u - v`` edge set (replacing any existing one)."""
        edges = [e for e in self.edges() if {e[0], e[1]} != {u, v}]
        edges.append((u, v, mu, mv))
        return MixedGraph(self.nodes, edges, kind or self.kind)

    def without_edge(self, u: str, v: str) -> MixedGraph:
        edges = [e for e in self.edges() if {e[0], e[1]} != {u, v}]
        return MixedGraph(self.nodes, edges, self.kind)

    def skeleton(self, mark: Mark = CIRCLE) -> MixedGraph:
        kind = PAG if mark is CIRCLE else UNCLASSIFIED
        return MixedGraph(self.nodes, [(a, b, mark, mark) for a, b, _, _ in self.edges()], kind)

    def relabel_kind(self, kind: str) -> MixedGraph:
        return MixedGraph(self.nodes, self.edges(), kind)

    def subgraph(self, keep: Iterable[str]) -> MixedGraph:
        keep = set(keep)
        return MixedGraph(
            keep,
            [e for e in self.edges() if e[0] in keep and e[1] in keep],
            self.kind,
        )

    # ------------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MixedGraph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges() == other.edges()

    def __hash__(self) -> int:
        return hash((self.nodes, tuple(self.edges())))

    def __repr__(self) -> str:
        parts = [_edge_str(*e) for e in self.edges()]
        return f"MixedGraph({self.kind}, nodes={list(self.nodes)}, edges=[{', '.join(parts)}])"


_LEFT = {TAIL: "-", ARROW: "<", CIRCLE: "o"}
_RIGHT = {TAIL: "-", ARROW: ">", CIRCLE: "o"}


def _edge_str(a, b, ma, mb) -> str:
    return f"{a} {_LEFT[ma]}-{_RIGHT[mb]} {b}"


def from_edge_strings(nodes: Iterable[str], specs: Iterable[str], kind: str = UNCLASSIFIED) -> MixedGraph:
    """Build a graph from strings like ``"A -> B"``, ``"A <-> B"``, ``"A o-> B"``.

    Two-character ``->``, ``<-`` and ``--`` are shorthand for ``-->``,
    ``<--`` and ``---``.
    """
    short = {"->": "-->", "<-": "<--", "--": "---"}
    left = {"-": TAIL, "<": ARROW, "o": CIRCLE}
    right = {"-": TAIL, ">": ARROW, "o": CIRCLE}
    edges = []
    for spec in specs:
        try:
            a, op, b = spec.split()
        except ValueError:
            raise GraphError(f"cannot parse edge {spec!r}") from None
        op = short.get(op, op)
        if len(op) != 3 or op[1] != "-" or op[0] not in left or op[2] not in right:
            raise GraphError(f"cannot parse edge {spec!r}")
        edges.append((a, b, left[op[0]], right[op[2]]))
    return MixedGraph(nodes, edges, kind)


# ----------------------------------------------------------------------
# separation


def m_separated(g: MixedGraph, x: str, y: str, z: Iterable[str] = ()) -> bool:
    """Whether ``x`` and ``y`` are m-separated by ``z`` in a DAG or MAG.

    Reachability over (node, entered-through-arrowhead) states; a node is
    passable as a collider iff it is an ancestor of ``z`` and as a
    non-collider iff it is not in ``z``.
    """
    z = frozenset(z)
    for v in (x, y, *z):
        g._check_node(v)
    if x == y:
        raise GraphError("x and y must differ")
    if x in z or y in z:
        raise GraphError("x and y must not be in the conditioning set")
    an_z = g.ancestors(z)
    marks = g._marks
    stack = [(w, marks[x][w] is ARROW) for w in marks[x]]
    seen = set()
    while stack:
        state = stack.pop()
        if state in seen:
            continue
        seen.add(state)
        v, into = state
        if v == y:
            return False
        for w, at_w in marks[v].items():
            at_v = marks[w][v]
            if into and at_v is ARROW:
                if v not in an_z:
                    continue
            elif v in z:
                continue
            stack.append((w, at_w is ARROW))
    return True


def _dsep_set(g: MixedGraph, a: str, b: str) -> set[str]:
    return g.ancestors((a, b)) - {a, b}


# ----------------------------------------------------------------------
# validity


def _find_directed_cycle(g: MixedGraph) -> list[str] | None:
    color = dict.fromkeys(g.nodes, 0)
    parent: dict[str, str] = {}
    for root in g.nodes:
        if color[root]:
            continue
        stack = [(root, iter(g.children(root)))]
        color[root] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = 2
                stack.pop()
                continue
            if color[nxt] == 1:
                cycle = [v]
                while cycle[-1] != nxt:
                    cycle.append(parent[cycle[-1]])
                return cycle[::-1]
            if color[nxt] == 0:
                color[nxt] = 1
                parent[nxt] = v
                stack.append((nxt, iter(g.children(nxt))))
    return None


def _directed_path(g: MixedGraph, src: str, dst: str) -> list[str] | None:
    prev = {src: None}
    queue = deque([src])
    while queue:
        v = queue.popleft()
        if v == dst:
            path = [v]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return path[::-1]
        for w in g.children(v):
            if w not in prev:
                prev[w] = v
                queue.append(w)
    return None


def validate_mag(g: MixedGraph) -> list[str]:
    """Violations of MAG validity; an empty list means ``g`` is a MAG.

    Checks marks (tail/arrow only, no undirected edges), directed cycles,
    almost-directed cycles and maximality. Maximality uses the fact that a
    non-adjacent pair in an ancestral graph is m-separable iff it is
    separated by the ancestors of the pair.
    """
    problems = []
    for a, b, ma, mb in g.edges():
        if CIRCLE in (ma, mb):
            problems.append(f"circle mark on edge {a},{b}")
        elif ma is TAIL and mb is TAIL:
            problems.append(f"undirected edge {a},{b}")
    if problems:
        return problems
    cycle = _find_directed_cycle(g)
    if cycle is not None:
        return [f"directed cycle {','.join(cycle)}"]
    for a, b in g.bidirected_edges():
        for src, dst in ((a, b), (b, a)):
            path = _directed_path(g, src, dst)
            if path is not None:
                problems.append(f"almost-directed cycle {','.join(path)}<->{src}")
    if problems:
        return problems
    for a, b in itertools.combinations(g.nodes, 2):
        if not g.has_edge(a, b) and not m_separated(g, a, b, _dsep_set(g, a, b)):
            problems.append(f"non-maximal pair {a},{b}")
    return problems


def is_ancestral(g: MixedGraph) -> bool:
    return not [p for p in validate_mag(g) if not p.startswith("non-maximal")]


def is_dag(g: MixedGraph) -> bool:
    return all(ma is TAIL and mb is ARROW or ma is ARROW and mb is TAIL for _, _, ma, mb in g.edges()) and (
        _find_directed_cycle(g) is None
    )


# ----------------------------------------------------------------------
# structure


def c_components(g: MixedGraph) -> list[frozenset[str]]:
    """Connected components over bidirected edges, in canonical order."""
    parent = {v: v for v in g.nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in g.bidirected_edges():
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[str, set[str]] = {}
    for v in g.nodes:
        groups.setdefault(find(v), set()).add(v)
    return sorted((frozenset(s) for s in groups.values()), key=min)


def unshielded_triples(g: MixedGraph) -> list[tuple[str, str, str]]:
    """All ``(a, c, b)`` with ``a - c - b`` and ``a``, ``b`` non-adjacent, ``a < b``."""
    out = []
    for c in g.nodes:
        nb = g.adjacent(c)
        for a, b in itertools.combinations(nb, 2):
            if not g.has_edge(a, b):
                out.append((a, c, b))
    return sorted(out)


def latent_project(dag: MixedGraph, latents: Iterable[str]) -> MixedGraph:
    """MAG over the observed nodes of ``dag`` after marginalising ``latents``.

    Two observed nodes are adjacent iff an inducing path joins them, tested
    as d-connection given their observed ancestors. Adjacent pairs are
    oriented by ancestry in ``dag``: ``a -> b`` if ``a`` is an ancestor of
    ``b``, ``a <-> b`` if neither is an ancestor of the other.
    """
    latents = frozenset(latents)
    for v in latents:
        dag._check_node(v)
    if not is_dag(dag):
        raise GraphError("latent_project needs a DAG")
    observed = [v for v in dag.nodes if v not in latents]
    if not observed:
        raise GraphError("every node is latent")
    anc = {v: dag.ancestors([v]) for v in dag.nodes}
    edges = []
    for a, b in itertools.combinations(observed, 2):
        cond = (anc[a] | anc[b]) - latents - {a, b}
        if m_separated(dag, a, b, cond):
            continue
        if a in anc[b]:
            edges.append((a, b, TAIL, ARROW))
        elif b in anc[a]:
            edges.append((a, b, ARROW, TAIL))
        else:
            edges.append((a, b, ARROW, ARROW))
    return MixedGraph(observed, edges, MAG)


def separation_statements(g: MixedGraph, nodes: Sequence[str] | None = None) -> frozenset:
    """Every ``(x, y, z)`` with ``x < y`` and ``x`` m-separated from ``y`` by ``z``."""
    nodes = list(g.nodes if nodes is None else nodes)
    out = set()
    for x, y in itertools.combinations(sorted(nodes), 2):
        rest = [v for v in nodes if v not in (x, y)]
        for k in range(len(rest) + 1):
            for z in itertools.combinations(rest, k):
                if m_separated(g, x, y, z):
                    out.add((x, y, frozenset(z)))
    return frozenset(out)


def markov_equivalent(m1: MixedGraph, m2: MixedGraph) -> bool:
    """Whether two MAGs imply the same m-separation statements.

    Exhaustive over every pair and conditioning subset, so exponential in
    the number of nodes; the skeleton comparison is a cheap early exit.
    """
    if m1.nodes != m2.nodes:
        raise GraphError("node sets differ")
    if m1.skeleton() != m2.skeleton():
        return False
    return separation_statements(m1) == separation_statements(m2)


# ----------------------------------------------------------------------
# MAG -> PAG


class _Marks:
    """Mutable endpoint-mark table used while orienting a PAG."""

    def __init__(self, g: MixedGraph):
        self.nodes = g.nodes
        self.m = {v: dict(nb) for v, nb in g._marks.items()}

    def adj(self, v):
        return sorted(self.m[v])

    def has(self, u, v):
        return v in self.m[u]

    def at(self, u, v):
        """Mark at v on edge u - v."""
        return self.m[u][v]

    def set(self, u, v, mark) -> bool:
        if self.m[u][v] is mark:
            return False
        self.m[u][v] = mark
        return True

    def directed(self, u, v):
        return self.m[u][v] is ARROW and self.m[v][u] is TAIL

    def graph(self, kind):
        edges = []
        for a in self.nodes:
            for b, mb in self.m[a].items():
                if a < b:
                    edges.append((a, b, self.m[b][a], mb))
        return MixedGraph(self.nodes, edges, kind)


def _pd_edge(t: _Marks, u, v) -> bool:
    # edge u - v is potentially directed from u to v
    return t.at(v, u) is not ARROW and t.at(u, v) is not TAIL


def _uncovered_pd_first_steps(t: _Marks, alpha, target, first_candidates, forbid=()) -> set:
    """First nodes after ``alpha`` on uncovered p.d. paths from ``alpha`` to ``target``."""
    found = set()
    for mu in first_candidates:
        if mu in forbid or not _pd_edge(t, alpha, mu):
            continue
        if mu == target:
            found.add(mu)
            continue
        # DFS over simple paths
        stack = [(mu, alpha, (alpha, mu))]
        done = False
        while stack and not done:
            v, prev, path = stack.pop()
            for w in t.adj(v):
                if w in path or w in forbid or t.has(prev, w) or not _pd_edge(t, v, w):
                    continue
                if w == target:
                    done = True
                    break
                stack.append((w, v, path + (w,)))
        if done:
            found.add(mu)
    return found


def _discriminating_theta(t: _Marks, a, b, c):
    """End node of a discriminating path ``<theta, ..., a, b, c>`` for ``b``, or None."""
    # a must be a collider on the path (arrow at a from b) and a parent of c
    if t.at(b, a) is not ARROW or not t.directed(a, c):
        return None
    visited = {a, b, c}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        for w in t.adj(u):
            if w in visited or t.at(w, u) is not ARROW:
                continue
            if not t.has(w, c):
                return w
            if t.directed(w, c) and t.at(u, w) is ARROW:
                visited.add(w)
                queue.append(w)
    return None


def mag_to_pag(m: MixedGraph, check: bool = True) -> MixedGraph:
    """PAG of the Markov equivalence class of ``m``.

    Runs the FCI orientation rules (R0-R4, R8-R10; the selection-bias
    rules are not needed) with ``m`` itself as the separation oracle.
    """
    if check:
        problems = validate_mag(m)
        if problems:
            raise GraphError(f"not a valid MAG: {problems}")
    sep_cache: dict = {}

    def sepset(a, b):
        key = (a, b) if a < b else (b, a)
        if key not in sep_cache:
            sep_cache[key] = _dsep_set(m, a, b)
        return sep_cache[key]

    t = _Marks(m.skeleton())
    for a, c, b in unshielded_triples(m):
        if c not in sepset(a, b):
            t.set(a, c, ARROW)
            t.set(b, c, ARROW)

    changed = True
    while changed:
        changed = False
        for b in t.nodes:
            for a, c in itertools.permutations(t.adj(b), 2):
                changed |= _orient_triple_rules(t, a, b, c, sepset)
        for a in t.nodes:
            for g_ in t.adj(a):
                if t.at(g_, a) is CIRCLE and t.at(a, g_) is ARROW:
                    changed |= _orient_tail_rules(t, a, g_)
    return t.graph(PAG)


def _orient_triple_rules(t: _Marks, a, b, c, sepset) -> bool:
    """R1-R4 for the ordered triple ``a *-* b *-* c``."""
    changed = False
    ac_adj = t.has(a, c)
    # R1: a *-> b o-* c, a, c non-adjacent  =>  b -> c
    if not ac_adj and t.at(a, b) is ARROW and t.at(c, b) is CIRCLE:
        changed |= t.set(c, b, TAIL)
        changed |= t.set(b, c, ARROW)
    if ac_adj and t.at(a, c) is CIRCLE:
        # R2: a -> b *-> c  or  a *-> b -> c, with a *-o c  =>  a *-> c
        if (t.directed(a, b) and t.at(b, c) is ARROW) or (t.at(a, b) is ARROW and t.directed(b, c)):
            changed |= t.set(a, c, ARROW)
    # R3: a *-> b <-* c, a *-o d o-* c, a, c non-adjacent, d *-o b  =>  d *-> b
    if not ac_adj and a < c and t.at(a, b) is ARROW and t.at(c, b) is ARROW:
        for d in t.adj(b):
            if (
                d not in (a, c)
                and t.has(d, a)
                and t.has(d, c)
                and t.at(a, d) is CIRCLE
                and t.at(c, d) is CIRCLE
                and t.at(d, b) is CIRCLE
            ):
                changed |= t.set(d, b, ARROW)
    # R4: discriminating path <theta, ..., a, b, c> with b o-* c
    if ac_adj and t.at(c, b) is CIRCLE:
        theta = _discriminating_theta(t, a, b, c)
        if theta is not None:
            if b in sepset(theta, c):
                changed |= t.set(c, b, TAIL)
                changed |= t.set(b, c, ARROW)
            else:
                changed |= t.set(b, a, ARROW)
                changed |= t.set(a, b, ARROW)
                changed |= t.set(c, b, ARROW)
                changed |= t.set(b, c, ARROW)
    return changed


def _orient_tail_rules(t: _Marks, a, c) -> bool:
    """R8-R10 for ``a o-> c``; each turns it into ``a -> c``."""
    # R8: a -> b -> c  or  a -o b -> c
    for b in t.adj(a):
        if b == c or not t.has(b, c) or not t.directed(b, c):
            continue
        if t.at(b, a) is TAIL and t.at(a, b) in (ARROW, CIRCLE):
            return t.set(c, a, TAIL)
    # R9: uncovered p.d. path <a, b, d, ..., c> with b, c non-adjacent
    firsts = [b for b in t.adj(a) if b != c and not t.has(b, c)]
    if _uncovered_pd_first_steps(t, a, c, firsts):
        return t.set(c, a, TAIL)
    # R10: b -> c <- d, uncovered p.d. paths a..b and a..d whose first
    # nodes mu, omega are distinct and non-adjacent
    pars = [v for v in t.adj(c) if v != a and t.directed(v, c)]
    if len(pars) >= 2:
        cand = [v for v in t.adj(a) if v != c]
        reach = {p: _uncovered_pd_first_steps(t, a, p, cand, forbid=(c,)) for p in pars}
        for b, d in itertools.combinations(pars, 2):
            for mu in reach[b]:
                for om in reach[d]:
                    if mu != om and not t.has(mu, om):
                        return t.set(c, a, TAIL)
    return False


# ----------------------------------------------------------------------
# file format


def format_graph(g: MixedGraph) -> str:
    lines = ["nodes:" + ",".join(g.nodes)]
    rows = [f"{a},{b},{ma.value},{mb.value}" for a, b, ma, mb in g.edges()]
    lines.extend(sorted(rows))
    return "\n".join(lines) + "\n"


def parse_graph(text: str, kind: str | None = None) -> MixedGraph:
    """Inverse of :func:`format_graph`.

    Without an explicit ``kind`` the label is inferred: PAG if any circle
    mark, MAG if any bidirected edge, DAG if all edges are directed and
    acyclic, otherwise Unclassified.
    """
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or not lines[0].startswith("nodes:"):
        raise GraphError("graph file must start with 'nodes:'")
    header = lines[0][len("nodes:"):]
    nodes = [v for v in header.split(",") if v] if header else []
    edges = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 4:
            raise GraphError(f"bad edge line {ln!r}")
        a, b, ma, mb = parts
        try:
            edges.append((a, b, Mark(ma), Mark(mb)))
        except ValueError:
            raise GraphError(f"bad mark in line {ln!r}") from None
    g = MixedGraph(nodes, edges)
    if kind is None:
        marks = {m for e in g.edges() for m in e[2:]}
        if CIRCLE in marks:
            kind = PAG
        elif g.bidirected_edges():
            kind = MAG
        elif is_dag(g):
            kind = DAG
        else:
            kind = UNCLASSIFIED
    return g.relabel_kind(kind)


def write_graph(g: MixedGraph, path: str | Path) -> None:
    Path(path).write_text(format_graph(g), encoding="utf-8", newline="\n")


def read_graph(path: str | Path, kind: str | None = None) -> MixedGraph:
    return parse_graph(Path(path).read_text(encoding="utf-8"), kind)
