"""CCHM: constraint phase, BIC hill climbing over MAG orientations, effect-based orientation.

The score phase searches over orientations of the fixed skeleton found by
the constraint phase. Every edge ``a - b`` (``a < b``) takes one of three
states, ``a -> b``, ``a <- b`` or ``a <-> b``; a state is admissible when
the induced graph is ancestral, every whitelisted triple is a collider and
no blacklisted triple is.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

from .effects import orient_pair
from .graphs import ARROW, MAG, TAIL, MixedGraph, mag_to_pag, validate_mag
from .independence import (
    FisherZ,
    SearchTimeout,
    Sepsets,
    TripleLists,
    classify_triples,
    learn_skeleton,
)
from .scoring import BicScorer
from .simulate import CovarianceMatrix, Dataset, covariance, second_moments

log = logging.getLogger(__name__)

FORWARD, BACKWARD, BIDIRECTED = 0, 1, 2
_STATE_NAMES = ("->", "<-", "<->")
_ORIENT_MARKS = {
    FORWARD: (TAIL, ARROW),
    BACKWARD: (ARROW, TAIL),
    BIDIRECTED: (ARROW, ARROW),
}


def _arrow_at_low(o: int) -> bool:
    return o != FORWARD


def _arrow_at_high(o: int) -> bool:
    return o != BACKWARD


@dataclass
class CchmConfig:
    """Run settings. ``timeout`` is in seconds and covers the whole run.

    ``seed`` is not consumed by the deterministic search; it is carried
    into reports so a run can be tied to the data that produced it.
    """

    alpha: float = 0.01
    max_sepset: int = 4
    max_path_length: int = 4
    possible_dsep: bool = True
    ricf_tol: float = 1e-8
    ricf_max_iter: int = 200
    score_epsilon: float = 1e-6
    seed: int = 0
    timeout: float = 240 * 60.0
    standardize: bool = False
    centred_effects: bool = False


@dataclass
class Constraints:
    skeleton: MixedGraph
    triples: TripleLists = field(default_factory=TripleLists)
    sepsets: Sepsets = field(default_factory=Sepsets)

    @property
    def whitelist(self):
        return self.triples.whitelist

    @property
    def blacklist(self):
        return self.triples.blacklist


@dataclass(frozen=True)
class SearchState:
    """One orientation per canonical skeleton edge, with its BIC."""

    assignment: tuple[int, ...]
    score: float
    valid: bool = True
    timed_out: bool = False
    steps: int = 0


class OrientationSpace:
    """Admissibility checks and scoring for orientations of one skeleton."""

    def __init__(self, constraints: Constraints, scorer: BicScorer | None = None):
        self.constraints = constraints
        skel = constraints.skeleton
        self.nodes = skel.nodes
        self.idx = {v: i for i, v in enumerate(self.nodes)}
        self.edges = [(self.idx[a], self.idx[b]) for a, b, _, _ in skel.edges()]
        self.edge_of = {e: k for k, e in enumerate(self.edges)}
        self.scorer = scorer
        if scorer is not None and tuple(scorer.cov.names) != self.nodes:
            raise ValueError("scorer covariance must list variables in canonical order")
        self.dropped: list[tuple[str, str, str]] = []
        self._set_triples()

    def _set_triples(self):
        def enc(t):
            a, c, b = (self.idx[v] for v in t)
            return c, self._edge_key(a, c), self._edge_key(c, b)

        self.white = [enc(t) for t in sorted(self.constraints.whitelist) if t not in self.dropped]
        self.black = [enc(t) for t in sorted(self.constraints.blacklist) if t not in self.dropped]

    def _edge_key(self, u, v):
        e = self.edge_of[(min(u, v), max(u, v))]
        return e

    def arrow_at(self, assign, e, node) -> bool:
        lo, _ = self.edges[e]
        o = assign[e]
        return _arrow_at_low(o) if node == lo else _arrow_at_high(o)

    def structure(self, assign):
        p = len(self.nodes)
        parents = [[] for _ in range(p)]
        spouses = [[] for _ in range(p)]
        for (a, b), o in zip(self.edges, assign):
            if o == FORWARD:
                parents[b].append(a)
            elif o == BACKWARD:
                parents[a].append(b)
            else:
                spouses[a].append(b)
                spouses[b].append(a)
        return parents, spouses

    def ancestor_masks(self, assign) -> list[int] | None:
        """Bitmask of strict ancestors per node, or None if there is a directed cycle."""
        parents, _ = self.structure(assign)
        p = len(parents)
        children = [[] for _ in range(p)]
        indeg = [len(pa) for pa in parents]
        for v, pa in enumerate(parents):
            for u in pa:
                children[u].append(v)
        ready = [v for v in range(p) if indeg[v] == 0]
        anc = [0] * p
        seen = 0
        while ready:
            v = ready.pop()
            seen += 1
            for w in children[v]:
                anc[w] |= anc[v] | (1 << v)
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
        return anc if seen == p else None

    def is_ancestral(self, assign) -> bool:
        anc = self.ancestor_masks(assign)
        if anc is None:
            return False
        for (a, b), o in zip(self.edges, assign):
            if o == BIDIRECTED and ((anc[b] >> a) & 1 or (anc[a] >> b) & 1):
                return False
        return True

    def satisfies_triples(self, assign) -> bool:
        for c, e1, e2 in self.white:
            if not (self.arrow_at(assign, e1, c) and self.arrow_at(assign, e2, c)):
                return False
        for c, e1, e2 in self.black:
            if self.arrow_at(assign, e1, c) and self.arrow_at(assign, e2, c):
                return False
        return True

    def is_valid(self, assign) -> bool:
        return self.satisfies_triples(assign) and self.is_ancestral(assign)

    def score(self, assign) -> float:
        return self.scorer.score(*self.structure(assign))

    def graph(self, assign) -> MixedGraph:
        edges = []
        for (a, b), o in zip(self.edges, assign):
            ma, mb = _ORIENT_MARKS[o]
            edges.append((self.nodes[a], self.nodes[b], ma, mb))
        return MixedGraph(self.nodes, edges, MAG)

    def assignment_of(self, g: MixedGraph) -> tuple[int, ...]:
        out = []
        for a, b in self.edges:
            u, v = self.nodes[a], self.nodes[b]
            if g.is_directed(u, v):
                out.append(FORWARD)
            elif g.is_directed(v, u):
                out.append(BACKWARD)
            elif g.is_bidirected(u, v):
                out.append(BIDIRECTED)
            else:
                raise ValueError(f"edge {u} - {v} is not a MAG edge")
        return tuple(out)


def initial_assignment(space: OrientationSpace) -> tuple[int, ...]:
    """All edges bidirected, then blacklist repairs.

    Repairs are single-edge changes, made ancestral by redirecting
    bidirected edges that now join an ancestor to its descendant, that
    keep the whitelist intact. The change leaving the fewest violated blacklisted
    triples is applied while that count strictly drops (ties go to the
    canonical order); when no single change helps, the best pair of
    changes is tried. Triples still violated afterwards are dropped and
    recorded in ``space.dropped``.
    """
    assign = (BIDIRECTED,) * len(space.edges)
    violated = _blacklist_violations(space, assign)
    while violated:
        moves = _repair_moves(space, assign)
        best = min(moves, key=lambda m: m[0], default=None)
        if best is None or best[0] >= len(violated):
            best = _best_move_pair(space, moves, len(violated))
        if best is None:
            break
        assign = best[1]
        violated = _blacklist_violations(space, assign)
    if violated:
        bad = set(violated)
        active = [t for t in sorted(space.constraints.blacklist) if t not in space.dropped]
        for triple, enc in zip(active, space.black):
            if enc in bad:
                space.dropped.append(triple)
                log.info("dropping unsatisfiable blacklist triple %s", triple)
        space._set_triples()
    return assign


def _ancestral_closure(space, assign):
    """Turn each ``u <-> v`` with ``u`` an ancestor of ``v`` into ``u -> v``.

    Ancestor sets do not change (``u`` already reaches ``v``) and only
    arrowheads are removed, so no blacklisted triple becomes violated.
    Returns None if ``assign`` has a directed cycle.
    """
    anc = space.ancestor_masks(assign)
    if anc is None:
        return None
    out = list(assign)
    for e, ((a, b), o) in enumerate(zip(space.edges, assign)):
        if o == BIDIRECTED:
            if (anc[b] >> a) & 1:
                out[e] = FORWARD
            elif (anc[a] >> b) & 1:
                out[e] = BACKWARD
    return tuple(out)


def _repair_moves(space, assign):
    """``(violations, assignment)`` for every admissible single-edge change, canonical order.

    Each change is followed by :func:`_ancestral_closure`.
    """
    out = []
    seen = set()
    for e in range(len(assign)):
        for o in (FORWARD, BACKWARD, BIDIRECTED):
            if o == assign[e]:
                continue
            trial = _ancestral_closure(space, assign[:e] + (o,) + assign[e + 1:])
            if trial is None or trial in seen or trial == assign:
                continue
            seen.add(trial)
            if _white_ok(space, trial):
                out.append((len(_blacklist_violations(space, trial)), trial))
    return out


def _best_move_pair(space, first_moves, current):
    best = None
    for _, mid in first_moves:
        for count, trial in _repair_moves(space, mid):
            if count < current and (best is None or count < best[0]):
                best = (count, trial)
                if count == 0:
                    return best
    return best


def _blacklist_violations(space, assign):
    return [t for t in space.black if space.arrow_at(assign, t[1], t[0]) and space.arrow_at(assign, t[2], t[0])]


def _white_ok(space, assign):
    return all(space.arrow_at(assign, e1, c) and space.arrow_at(assign, e2, c) for c, e1, e2 in space.white)


def initial_state(constraints: Constraints, space: OrientationSpace | None = None) -> SearchState:
    space = space or OrientationSpace(constraints)
    assign = initial_assignment(space)
    score = space.score(assign) if space.scorer is not None else math.nan
    return SearchState(assign, score, space.is_valid(assign))


def neighbor_assignments(space: OrientationSpace, assign) -> list[tuple[int, ...]]:
    """Admissible assignments differing from ``assign`` in exactly one edge."""
    out = []
    for e in range(len(assign)):
        for o in (FORWARD, BACKWARD, BIDIRECTED):
            if o == assign[e]:
                continue
            trial = assign[:e] + (o,) + assign[e + 1:]
            if space.is_valid(trial):
                out.append(trial)
    return out


def neighbors(state: SearchState, space: OrientationSpace) -> list[SearchState]:
    out = []
    for a in neighbor_assignments(space, state.assignment):
        score = space.score(a) if space.scorer is not None else math.nan
        out.append(SearchState(a, score))
    return out


def hill_climb(
    space: OrientationSpace,
    start: tuple[int, ...] | None = None,
    score_epsilon: float = 1e-6,
    deadline: float | None = None,
) -> SearchState:
    """Steepest descent on BIC; ties go to the first neighbour in canonical order.

    A move is taken only if it lowers BIC by more than ``score_epsilon``.
    """
    assign = initial_assignment(space) if start is None else tuple(start)
    current = space.score(assign)
    steps = 0
    while True:
        best, best_score = None, current
        for trial in neighbor_assignments(space, assign):
            if deadline is not None and time.monotonic() > deadline:
                return SearchState(assign, current, True, timed_out=True, steps=steps)
            s = space.score(trial)
            if s < best_score:
                best, best_score = trial, s
        if best is None or best_score >= current - score_epsilon:
            return SearchState(assign, current, True, steps=steps)
        assign, current = best, best_score
        steps += 1


def orient_by_effects(
    space: OrientationSpace,
    assign: tuple[int, ...],
    moments: CovarianceMatrix,
    score_epsilon: float = 1e-6,
) -> tuple[tuple[int, ...], list[dict]]:
    """Direct edges whose orientation the score cannot decide.

    Edges are visited in canonical order. The direction preferred by
    :func:`orient_pair` replaces the current orientation (directed or
    bidirected) when the result stays admissible and changes BIC by less
    than ``score_epsilon``.
    """
    current = space.score(assign)
    flips = []
    for e, (a, b) in enumerate(space.edges):
        u, v = space.nodes[a], space.nodes[b]
        pair = orient_pair(moments, u, v)
        if pair.chosen is None:
            continue
        target = FORWARD if pair.chosen == (u, v) else BACKWARD
        if assign[e] == target:
            continue
        trial = assign[:e] + (target,) + assign[e + 1:]
        if not space.is_valid(trial):
            continue
        s = space.score(trial)
        if abs(s - current) < score_epsilon:
            flips.append({"edge": [u, v], "from": _STATE_NAMES[assign[e]], "to": _STATE_NAMES[target], "beta_a": pair.beta_a, "beta_b": pair.beta_b})
            assign, current = trial, s
    return assign, flips


# ----------------------------------------------------------------------


@dataclass
class CchmResult:
    mag: MixedGraph
    pag: MixedGraph
    report: list[dict]
    skeleton: MixedGraph
    constraints: Constraints
    timed_out: bool = False

    def report_without_timings(self) -> list[dict]:
        return [{k: v for k, v in r.items() if k != "wall_seconds"} for r in self.report]


def run_constraint_phase(cov: CovarianceMatrix, config: CchmConfig, deadline=None, audit=None) -> tuple[Constraints, FisherZ]:
    test = FisherZ(cov, cov.n, config.alpha, audit=audit)
    skeleton, sepsets = learn_skeleton(
        test,
        config.max_sepset,
        possible_dsep=config.possible_dsep,
        max_path_length=config.max_path_length,
        deadline=deadline,
    )
    triples = classify_triples(skeleton, test, config.max_sepset, sepsets, deadline=deadline)
    return Constraints(skeleton, triples, sepsets), test


def cchm(dataset: Dataset, config: CchmConfig | None = None, audit=None) -> CchmResult:
    """Learn a MAG and its PAG from continuous data.

    Raises :class:`SearchTimeout` if the constraint phase runs out of time;
    a timeout during hill climbing returns the best graph so far with
    ``timed_out`` set.
    """
    config = config or CchmConfig()
    t_start = time.monotonic()
    deadline = t_start + config.timeout
    if len(dataset.columns) < 2:
        raise ValueError("need at least two variables")
    if dataset.n <= config.max_sepset + 3:
        raise ValueError("need more rows than max_sepset + 3")
    data = dataset.standardized() if config.standardize else dataset
    full_cov = covariance(data)
    degenerate = set(full_cov.degenerate)
    active = [c for c in data.columns if c not in degenerate]
    data = data.select(sorted(active))
    cov = covariance(data)
    report = []

    constraints, test = run_constraint_phase(cov, config, deadline, audit)
    t_constraints = time.monotonic()
    report.append(
        {
            "phase": "constraints",
            "wall_seconds": t_constraints - t_start,
            "variables": len(active),
            "degenerate": sorted(degenerate),
            "edges": constraints.skeleton.num_edges(),
            "tests": test.calls,
            "whitelist": len(constraints.whitelist),
            "blacklist": len(constraints.blacklist),
            "ambiguous": len(constraints.triples.ambiguous),
        }
    )

    scorer = BicScorer(cov, cov.n, config.ricf_tol, config.ricf_max_iter)
    space = OrientationSpace(constraints, scorer)
    start = initial_assignment(space)
    start_score = space.score(start)
    state = hill_climb(space, start, config.score_epsilon, deadline)
    t_climb = time.monotonic()
    report.append(
        {
            "phase": "hill_climb",
            "wall_seconds": t_climb - t_constraints,
            "initial_bic": float(start_score),
            "final_bic": float(state.score),
            "steps": state.steps,
            "component_fits": scorer.fits,
            "dropped_blacklist": [list(t) for t in space.dropped],
            "timed_out": state.timed_out,
        }
    )

    assign = state.assignment
    flips = []
    if not state.timed_out:
        moments = second_moments(data, centred=config.centred_effects)
        assign, flips = orient_by_effects(space, assign, moments, config.score_epsilon)
    t_effects = time.monotonic()
    final_score = space.score(assign)
    report.append(
        {
            "phase": "effects",
            "wall_seconds": t_effects - t_climb,
            "flips": flips,
            "bic": float(final_score),
        }
    )

    mag = space.graph(assign)
    if degenerate:
        mag = MixedGraph(list(mag.nodes) + sorted(degenerate), mag.edges(), MAG)
    problems = validate_mag(mag)
    if problems:
        log.warning("learned graph is not a valid MAG: %s", problems)
    pag = mag_to_pag(mag, check=False)
    report.append(
        {
            "phase": "output",
            "wall_seconds": time.monotonic() - t_start,
            "bic": float(final_score),
            "mag_edges": mag.num_edges(),
            "bidirected": len(mag.bidirected_edges()),
            "mag_problems": problems,
            "config": asdict(config),
        }
    )
    return CchmResult(mag, pag, report, constraints.skeleton, constraints, state.timed_out)
