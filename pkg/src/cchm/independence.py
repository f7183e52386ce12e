"""Fisher-z conditional independence tests, skeleton search and triple classification.

All searches take a *test*: any callable ``test(x, y, z) -> CiResult`` over
node names that also exposes a ``nodes`` attribute. :class:`FisherZ` is the
statistical test; :class:`SeparationOracle` answers from a known graph.
"""

from __future__ import annotations

import csv
import itertools
import math
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graphs import CIRCLE, PAG, MixedGraph, m_separated, unshielded_triples
from .simulate import CovarianceMatrix


class DegenerateInputError(ValueError):
    """Singular covariance submatrix or zero-variance variable."""


class SearchTimeout(RuntimeError):
    pass


@dataclass(frozen=True)
class CiResult:
    statistic: float
    p_value: float
    conditioning_set: frozenset
    independent: bool
    r: float = float("nan")


def _as_matrix(cov, i, j, z):
    if isinstance(cov, CovarianceMatrix):
        return cov.matrix, cov.index(i), cov.index(j), [cov.index(v) for v in z]
    return np.asarray(cov), i, j, list(z)


def partial_correlation(cov, i, j, z=()) -> float:
    """Partial correlation of ``i`` and ``j`` given ``z`` from the inverse covariance.

    ``cov`` is a :class:`CovarianceMatrix` (variables by name) or a plain
    array (variables by index).
    """
    S, i, j, z = _as_matrix(cov, i, j, z)
    if i == j or i in z or j in z:
        raise ValueError("i, j and z must be disjoint")
    # canonical order makes the result bit-identical under swapping i, j
    i, j = min(i, j), max(i, j)
    idx = [i, j, *sorted(z)]
    sub = S[np.ix_(idx, idx)]
    if len(idx) == 2:
        denom = sub[0, 0] * sub[1, 1]
        if denom <= 0:
            raise DegenerateInputError("zero variance")
        r = sub[0, 1] / math.sqrt(denom)
    else:
        try:
            P = np.linalg.inv(sub)
        except np.linalg.LinAlgError:
            raise DegenerateInputError("singular covariance submatrix") from None
        denom = P[0, 0] * P[1, 1]
        if not np.isfinite(denom) or denom <= 0:
            raise DegenerateInputError("singular covariance submatrix")
        r = -P[0, 1] / math.sqrt(denom)
    return float(min(1.0, max(-1.0, r)))


def fisher_z_from_r(r: float, n: int, k: int, alpha: float) -> tuple[float, float, bool]:
    """``(statistic, two-sided p, independent)`` for a partial correlation ``r``."""
    if n - k - 3 <= 0:
        raise ValueError(f"need n > |z| + 3 (n={n}, |z|={k})")
    if abs(r) >= 1.0:
        return math.copysign(math.inf, r), 0.0, False
    stat = 0.5 * math.log((1 + r) / (1 - r)) * math.sqrt(n - k - 3)
    # two-sided tail of the standard normal
    p = math.erfc(abs(stat) / math.sqrt(2.0))
    return stat, p, p > alpha


def fisher_z_test(cov, i, j, z, n: int, alpha: float) -> CiResult:
    z = tuple(z)
    r = partial_correlation(cov, i, j, z)
    stat, p, indep = fisher_z_from_r(r, n, len(z), alpha)
    return CiResult(stat, p, frozenset(z), indep, r)


class FisherZ:
    """Cached Fisher-z test over the variables of a covariance matrix.

    Parameters
    ----------
    cov : CovarianceMatrix
    n : int, optional
        Sample size; defaults to ``cov.n``.
    alpha : float
    audit : list, optional
        If given, one ``(i, j, z, r, stat, p, decision)`` tuple is appended
        per distinct test performed.
    """

    def __init__(self, cov: CovarianceMatrix, n: int | None = None, alpha: float = 0.01, audit=None):
        self.cov = cov
        self.n = cov.n if n is None else n
        self.alpha = alpha
        self.nodes = tuple(cov.names)
        self.audit = audit
        self._cache: dict = {}
        self.calls = 0

    def __call__(self, x: str, y: str, z=()) -> CiResult:
        if y < x:
            x, y = y, x
        key = (x, y, frozenset(z))
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.calls += 1
        res = fisher_z_test(self.cov, x, y, tuple(sorted(key[2])), self.n, self.alpha)
        self._cache[key] = res
        if self.audit is not None:
            self.audit.append((x, y, tuple(sorted(key[2])), res.r, res.statistic, res.p_value, res.independent))
        return res


class SeparationOracle:
    """Independence answers read off a DAG/MAG by m-separation."""

    def __init__(self, graph: MixedGraph):
        self.graph = graph
        self.nodes = graph.nodes
        self._cache: dict = {}

    def __call__(self, x, y, z=()) -> CiResult:
        key = (min(x, y), max(x, y), frozenset(z))
        if key not in self._cache:
            sep = m_separated(self.graph, x, y, key[2])
            self._cache[key] = CiResult(0.0 if sep else math.inf, 1.0 if sep else 0.0, key[2], sep)
        return self._cache[key]


def write_audit(rows, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "conditioning_set", "r", "z", "p", "decision"])
        for i, j, z, r, stat, p, indep in rows:
            w.writerow([i, j, ";".join(z), repr(r), repr(stat), repr(p), "independent" if indep else "dependent"])


# ----------------------------------------------------------------------


@dataclass
class Sepsets:
    """Every separating set found for each unordered node pair."""

    sets: dict[frozenset, list[frozenset]] = field(default_factory=dict)

    def add(self, a, b, z) -> None:
        z = frozenset(z)
        if a in z or b in z:
            raise ValueError("a separating set cannot contain its endpoints")
        found = self.sets.setdefault(frozenset((a, b)), [])
        if z not in found:
            found.append(z)

    def get(self, a, b) -> list[frozenset]:
        return self.sets.get(frozenset((a, b)), [])

    def __contains__(self, pair) -> bool:
        return frozenset(pair) in self.sets


class _Adjacency:
    def __init__(self, nodes):
        self.nodes = tuple(sorted(nodes))
        self.adj = {v: set(self.nodes) - {v} for v in self.nodes}

    def remove(self, a, b):
        self.adj[a].discard(b)
        self.adj[b].discard(a)

    def edges(self):
        return [(a, b) for a in self.nodes for b in sorted(self.adj[a]) if a < b]

    def graph(self) -> MixedGraph:
        return MixedGraph(self.nodes, [(a, b, CIRCLE, CIRCLE) for a, b in self.edges()], PAG)


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise SearchTimeout("constraint phase exceeded its time budget")


def _separating_sets(test, x, y, pools, k):
    found = []
    seen = set()
    for pool in pools:
        for z in itertools.combinations(sorted(pool), k):
            if z in seen:
                continue
            seen.add(z)
            if test(x, y, z).independent:
                found.append(frozenset(z))
    return found


def learn_skeleton(
    test,
    max_sepset: int = 4,
    possible_dsep: bool = True,
    max_path_length: int = 4,
    deadline: float | None = None,
) -> tuple[MixedGraph, Sepsets]:
    """Adjacency search by edge deletion, recording all separating sets.

    Level ``k`` tests every size-``k`` subset of the current neighbours of
    each endpoint. Edges are visited in ascending order of their marginal
    p-value (ties lexicographic). With ``possible_dsep`` the adjacency
    search is followed by the Possible-D-SEP pass of FCI, which removes
    edges between nodes separable only by non-neighbours; paths used to
    build Possible-D-SEP sets are capped at ``max_path_length`` edges
    (negative for no cap).
    """
    if max_sepset < 0:
        raise ValueError("max_sepset must be >= 0")
    state = _Adjacency(test.nodes)
    sepsets = Sepsets()
    marginal_p = {}
    for a, b in state.edges():
        _check_deadline(deadline)
        res = test(a, b, ())
        marginal_p[(a, b)] = res.p_value
        if res.independent:
            state.remove(a, b)
            sepsets.add(a, b, ())
    for k in range(1, max_sepset + 1):
        edges = sorted(state.edges(), key=lambda e: (marginal_p[e], e))
        if not any(len(state.adj[a]) - 1 >= k or len(state.adj[b]) - 1 >= k for a, b in edges):
            break
        for a, b in edges:
            if b not in state.adj[a]:
                continue
            _check_deadline(deadline)
            pools = [state.adj[a] - {b}, state.adj[b] - {a}]
            found = _separating_sets(test, a, b, [p for p in pools if len(p) >= k], k)
            if found:
                state.remove(a, b)
                for z in found:
                    sepsets.add(a, b, z)
    if possible_dsep:
        _possible_dsep_pass(test, state, sepsets, max_sepset, max_path_length, deadline)
    return state.graph(), sepsets


def _possible_collider(state: _Adjacency, sepsets: Sepsets, a, c, b) -> bool:
    if b in state.adj[a]:
        return False
    found = sepsets.get(a, b)
    return not found or not all(c in z for z in found)


def possible_dsep_sets(state_or_graph, sepsets: Sepsets, max_path_length: int = -1) -> dict[str, set]:
    """Possible-D-SEP set of every node.

    ``w`` is in the set of ``x`` if some path ``x .. w`` has every interior
    node either a possible collider (not in every sepset of its unshielded
    neighbours) or the middle of a triangle.
    """
    if isinstance(state_or_graph, MixedGraph):
        state = _Adjacency(state_or_graph.nodes)
        state.adj = {v: set(state_or_graph.adjacent(v)) for v in state.nodes}
    else:
        state = state_or_graph
    out = {}
    for x in state.nodes:
        reach = set()
        seen = set()
        queue = deque((x, w, 1) for w in sorted(state.adj[x]))
        while queue:
            prev, cur, length = queue.popleft()
            if (prev, cur) in seen:
                continue
            seen.add((prev, cur))
            reach.add(cur)
            if 0 <= max_path_length <= length:
                continue
            for nxt in sorted(state.adj[cur]):
                if nxt in (prev, x):
                    continue
                if nxt in state.adj[prev] or _possible_collider(state, sepsets, prev, cur, nxt):
                    queue.append((cur, nxt, length + 1))
        reach.discard(x)
        out[x] = reach
    return out


def _possible_dsep_pass(test, state, sepsets, max_sepset, max_path_length, deadline):
    pds = possible_dsep_sets(state, sepsets, max_path_length)
    for a, b in state.edges():
        pools = [pds[a] - {b}, pds[b] - {a}]
        # sets inside the current neighbourhoods were already tried
        if pools[0] <= state.adj[a] and pools[1] <= state.adj[b]:
            continue
        for k in range(0, max_sepset + 1):
            _check_deadline(deadline)
            found = _separating_sets(test, a, b, [p for p in pools if len(p) >= k], k)
            if found:
                state.remove(a, b)
                for z in found:
                    sepsets.add(a, b, z)
                break


# ----------------------------------------------------------------------


@dataclass
class TripleLists:
    """Definite colliders (whitelist), definite non-colliders (blacklist), and the rest."""

    whitelist: set = field(default_factory=set)
    blacklist: set = field(default_factory=set)
    ambiguous: set = field(default_factory=set)


def classify_triples(
    skeleton: MixedGraph,
    test,
    max_sepset: int = 4,
    sepsets: Sepsets | None = None,
    deadline: float | None = None,
) -> TripleLists:
    """Conservative collider classification of unshielded triples.

    For a triple ``(a, c, b)`` every subset (up to ``max_sepset``) of the
    neighbours of ``a`` and of ``b`` is tested; separating sets recorded in
    ``sepsets`` are added to those found. ``c`` in none of them makes the
    triple a definite collider, ``c`` in all of them a definite
    non-collider; anything else is ambiguous.
    """
    lists = TripleLists()
    pair_sets: dict = {}
    for a, c, b in unshielded_triples(skeleton):
        key = (a, b)
        if key not in pair_sets:
            _check_deadline(deadline)
            pools = [set(skeleton.adjacent(a)) - {b}, set(skeleton.adjacent(b)) - {a}]
            found = []
            for k in range(0, max_sepset + 1):
                for z in _separating_sets(test, a, b, [p for p in pools if len(p) >= k], k):
                    if z not in found:
                        found.append(z)
            if sepsets is not None:
                found.extend(z for z in sepsets.get(a, b) if z not in found)
            pair_sets[key] = found
        found = pair_sets[key]
        if not found:
            lists.ambiguous.add((a, c, b))
        elif all(c not in z for z in found):
            lists.whitelist.add((a, c, b))
        elif all(c in z for z in found):
            lists.blacklist.add((a, c, b))
        else:
            lists.ambiguous.add((a, c, b))
    return lists
