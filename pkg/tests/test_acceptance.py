"""Acceptance criteria 1-11, one test each.

Each test records a PASS/FAIL line (also shown in the terminal summary)
before asserting, so a failing criterion still reports its measured value.
"""

import itertools
import time

import numpy as np
import pytest

import oracles as O
from cchm import simulate as sim
from cchm.cli import RunSpec, cmd_bench
from cchm.effects import orient_pair
from cchm.graphs import ARROW, CIRCLE, TAIL, MixedGraph, latent_project, m_separated, mag_to_pag, unshielded_triples
from cchm.independence import SeparationOracle, classify_triples, learn_skeleton
from cchm.metrics import ConfusionCounts, bsf, confusion, precision_recall, shd
from cchm.scoring import bic, implied_covariance, ricf_fit
from cchm.search import CchmConfig, cchm


def random_mixed_graph(rng, max_nodes=5):
    n = int(rng.integers(2, max_nodes + 1))
    nodes = [chr(ord("A") + i) for i in range(n)]
    edges = []
    for a, b in itertools.combinations(nodes, 2):
        r = rng.random()
        if r < 0.25:
            edges.append((a, b, TAIL, ARROW))
        elif r < 0.5:
            edges.append((a, b, ARROW, TAIL))
        elif r < 0.65:
            edges.append((a, b, ARROW, ARROW))
    return MixedGraph(nodes, edges)


def test_criterion_01_m_separation_oracle(criterion):
    rng = np.random.default_rng(1)
    t0 = time.monotonic()
    checked = disagree = 0
    for _ in range(500):
        g = random_mixed_graph(rng)
        for x, y in itertools.combinations(g.nodes, 2):
            rest = [v for v in g.nodes if v not in (x, y)]
            for k in range(len(rest) + 1):
                for z in itertools.combinations(rest, k):
                    checked += 1
                    disagree += m_separated(g, x, y, z) != O.m_separated_by_paths(g, x, y, z)
    dt = time.monotonic() - t0
    ok = disagree == 0 and dt < 60
    criterion(1, ok, f"{checked - disagree}/{checked} triples agree in {dt:.1f}s")
    assert ok


def test_criterion_02_latent_projection(criterion):
    t0 = time.monotonic()
    mismatched = 0
    rng = np.random.default_rng(2)
    for seed in range(200):
        dag = sim.random_dag(6, 3, seed)
        k = int(rng.integers(1, 3))
        latents = set(rng.choice(dag.nodes, size=k, replace=False).tolist())
        mag = latent_project(dag, latents)
        obs = [v for v in dag.nodes if v not in latents]
        want = O.separations(dag, obs, sep=O.d_separated_nx)
        got = O.separations(mag, obs, sep=m_separated)
        mismatched += want != got
    dt = time.monotonic() - t0
    ok = mismatched == 0 and dt < 120
    criterion(2, ok, f"{200 - mismatched}/200 projections preserve the margin's separations in {dt:.1f}s")
    assert ok


def test_criterion_03_mag_to_pag(criterion):
    t0 = time.monotonic()
    nodes, skeletons = O.connected_skeletons(4)
    total = wrong = 0
    for sk in skeletons:
        for cls in O.equivalence_classes(list(sk), list(nodes)):
            want = O.consensus(cls)
            for m in cls:
                total += 1
                wrong += mag_to_pag(m) != want
    dt = time.monotonic() - t0
    ok = wrong == 0 and dt < 300
    criterion(3, ok, f"{total - wrong}/{total} MAGs over {len(skeletons)} skeletons match the class consensus in {dt:.1f}s")
    assert ok


def _regression_bic(data: sim.Dataset, dag: MixedGraph) -> float:
    X = data.values - data.values.mean(axis=0)
    n, p = X.shape
    idx = {v: i for i, v in enumerate(data.columns)}
    logdet = 0.0
    for v in dag.nodes:
        y = X[:, idx[v]]
        pa = [idx[u] for u in dag.parents(v)]
        if pa:
            coef, *_ = np.linalg.lstsq(X[:, pa], y, rcond=None)
            y = y - X[:, pa] @ coef
        logdet += np.log(y @ y / (n - 1))
    loglik = -n / 2 * (p * np.log(2 * np.pi) + logdet + (n - 1) / n * p)
    return -2 * loglik + np.log(n) * (2 * p + dag.num_edges())


def test_criterion_04_ricf_bic(criterion):
    t0 = time.monotonic()
    # (a) DAG models against regression BIC
    worst_a = 0.0
    for seed in range(100):
        dag = sim.random_dag(3 + seed % 6, 3, seed)
        data = sim.sample_sem(dag, sim.random_params(dag, seed), 500, seed)
        got = bic(dag.relabel_kind("MAG"), sim.covariance(data))
        want = _regression_bic(data, dag)
        worst_a = max(worst_a, abs(got - want) / abs(want))
    # (b) fitting the population margin of a latent model reproduces it
    worst_b = 0.0
    for seed in range(30):
        dag = sim.random_dag(7, 3, seed)
        params = sim.random_params(dag, seed)
        hidden = sorted(dag.nodes)[seed % 7::4][:2]
        mag = latent_project(dag, hidden)
        obs = list(mag.nodes)
        full = params.population_covariance(list(dag.nodes))
        keep = [dag.nodes.index(v) for v in obs]
        pop = sim.CovarianceMatrix(tuple(obs), full[np.ix_(keep, keep)], 1000)
        fit = ricf_fit(mag, pop, tol=1e-13, max_iter=20000)
        worst_b = max(worst_b, np.abs(fit.Sigma - pop.matrix).max(), np.abs(implied_covariance(fit.B, fit.Omega) - fit.Sigma).max())
    # (c) monotone fitting objective
    monotone = True
    for seed in range(30):
        dag = sim.random_dag(8, 3, seed)
        data = sim.sample_sem(dag, sim.random_params(dag, seed), 300, seed)
        obs, hidden = sim.hide_latents(data, 0.25, seed)
        mag = latent_project(dag, hidden)
        fit = ricf_fit(mag, sim.covariance(obs), tol=1e-10, max_iter=2000)
        monotone &= all(b >= a - 1e-9 * abs(a) for a, b in zip(fit.trace, fit.trace[1:]))
    # (d) Markov-equivalent MAGs score the same
    worst_d = 0.0
    nodes, skeletons = O.connected_skeletons(4)
    dag = MixedGraph(
        ["A", "B", "C", "D", "L"],
        [("L", "A", TAIL, ARROW), ("L", "B", TAIL, ARROW), ("A", "C", TAIL, ARROW), ("B", "C", TAIL, ARROW), ("C", "D", TAIL, ARROW), ("A", "D", TAIL, ARROW)],
        "DAG",
    )
    data = sim.sample_sem(dag, sim.random_params(dag, 4), 1000, 4)
    cov = sim.covariance(data.select(["A", "B", "C", "D"]))
    pairs = 0
    for sk in skeletons:
        for cls in O.equivalence_classes(list(sk), list(nodes)):
            if len(cls) < 2:
                continue
            scores = [bic(m, cov, tol=1e-12, max_iter=5000) for m in cls]
            pairs += len(cls) - 1
            worst_d = max(worst_d, max(scores) - min(scores))
    dt = time.monotonic() - t0
    ok = worst_a < 1e-6 and worst_b < 1e-8 and monotone and worst_d < 1e-5 and dt < 180
    criterion(
        4, ok,
        f"(a) max rel err {worst_a:.2e}; (b) max abs err {worst_b:.2e}; (c) monotone={monotone}; "
        f"(d) max |dBIC| {worst_d:.2e} over {pairs} pairs; {dt:.1f}s",
    )
    assert ok


def test_criterion_05_effect_ratio(criterion):
    t0 = time.monotonic()
    dag = MixedGraph(["A", "B"], [("A", "B", TAIL, ARROW)], "DAG")
    worst_ratio = 0.0
    worst_rate = 1.0
    lines = []
    for k in range(1, 10):
        beta = k / 10
        params = sim.SemParams({("A", "B"): beta}, {"A": 1.0, "B": 1.0})
        ratios, correct = [], 0
        for seed in range(50):
            data = sim.sample_sem(dag, params, 10_000, 1000 * k + seed)
            pair = orient_pair(sim.second_moments(data), "A", "B")
            ratios.append(pair.beta_a / pair.beta_b)
            correct += pair.chosen == ("A", "B")
        err = abs(np.mean(ratios) - (beta**2 + 1))
        worst_ratio = max(worst_ratio, err)
        if beta >= 0.3:
            worst_rate = min(worst_rate, correct / 50)
        lines.append(f"{beta:.1f}:{np.mean(ratios):.3f}/{correct}")
    dt = time.monotonic() - t0
    ok = worst_ratio <= 0.05 and worst_rate >= 0.95 and dt < 120
    criterion(5, ok, f"max |mean ratio - (b^2+1)| {worst_ratio:.4f}; min correct rate (b>=0.3) {worst_rate:.2f}; {dt:.1f}s [{' '.join(lines)}]")
    assert ok


def test_criterion_06_oracle_constraints(criterion):
    t0 = time.monotonic()
    skel_errors = label_errors = ambiguous = 0
    for seed in range(100):
        dag = sim.random_dag(8, 3, seed)
        rng = np.random.default_rng(seed)
        hidden = rng.choice(dag.nodes, size=2, replace=False).tolist()
        truth = latent_project(dag, hidden)
        oracle = SeparationOracle(truth)
        skeleton, sepsets = learn_skeleton(oracle, max_sepset=4)
        if skeleton != truth.skeleton():
            skel_errors += 1
            continue
        lists = classify_triples(skeleton, oracle, 4, sepsets)
        for a, c, b in unshielded_triples(truth):
            is_collider = truth.mark(a, c) is ARROW and truth.mark(b, c) is ARROW
            t = (a, c, b)
            if t in lists.ambiguous:
                ambiguous += 1
            elif (t in lists.whitelist) != is_collider or (t in lists.blacklist) == is_collider:
                label_errors += 1
    dt = time.monotonic() - t0
    ok = skel_errors == 0 and label_errors == 0 and ambiguous == 0 and dt < 120
    criterion(6, ok, f"skeleton errors {skel_errors}/100, triple label errors {label_errors}, ambiguous {ambiguous}; {dt:.1f}s")
    assert ok


def test_criterion_07_end_to_end(criterion):
    t0 = time.monotonic()
    prec, rec, shd_full, shd_skel = [], [], [], []
    for seed in range(20):
        dag = sim.random_dag(10, 3, seed)
        data = sim.sample_sem(dag, sim.random_params(dag, seed + 100), 10_000, seed + 200)
        obs, hidden = sim.hide_latents(data, 0.1, seed + 300)
        truth = mag_to_pag(latent_project(dag, hidden))
        res = cchm(obs, CchmConfig(alpha=0.01))
        p, r = precision_recall(confusion(res.pag, truth))
        prec.append(p)
        rec.append(r)
        shd_full.append(shd(res.pag, truth))
        shd_skel.append(shd(res.skeleton.skeleton(CIRCLE), truth))
    dt = time.monotonic() - t0
    mp, mr, ms, m0 = map(np.mean, (prec, rec, shd_full, shd_skel))
    ok = mp >= 0.85 and mr >= 0.70 and ms < m0 and dt < 900
    criterion(7, ok, f"precision {mp:.3f}, recall {mr:.3f}, SHD {ms:.2f} vs skeleton-only {m0:.2f}; {dt:.1f}s")
    assert ok


def test_criterion_08_confounder(criterion):
    t0 = time.monotonic()
    nodes = ["A", "B", "C", "D", "L"]
    dag = MixedGraph(nodes, [("C", "A", TAIL, ARROW), ("L", "A", TAIL, ARROW), ("L", "B", TAIL, ARROW), ("D", "B", TAIL, ARROW)], "DAG")
    hits = 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        coefs = {e: float(rng.choice([-1, 1]) * rng.uniform(0.5, 0.9)) for e in dag.directed_edges()}
        params = sim.SemParams(coefs, dict.fromkeys(nodes, 1.0))
        data = sim.sample_sem(dag, params, 10_000, seed).select(["A", "B", "C", "D"])
        mag = cchm(data).mag
        hits += mag.has_edge("A", "B") and mag.is_bidirected("A", "B")
    dt = time.monotonic() - t0
    ok = hits >= 45 and dt < 120
    criterion(8, ok, f"A<->B found in {hits}/50 (C->A<-L->B<-D, L hidden); {dt:.1f}s")
    assert ok


def test_criterion_09_metric_anchors(criterion):
    nodes = ["A", "B", "C", "D"]
    truth = MixedGraph(nodes, [("A", "B", CIRCLE, ARROW), ("B", "C", TAIL, ARROW), ("C", "D", ARROW, ARROW)], "PAG")
    empty = MixedGraph(nodes, [], "PAG")
    full = MixedGraph(nodes, [(a, b, CIRCLE, CIRCLE) for a, b in itertools.combinations(nodes, 2)], "PAG")
    complement = MixedGraph(nodes, [(a, b, CIRCLE, CIRCLE) for a, b in itertools.combinations(nodes, 2) if not truth.has_edge(a, b)], "PAG")
    values = {
        "perfect": bsf(confusion(truth, truth)),
        "empty": bsf(confusion(empty, truth)),
        "full": bsf(confusion(full, truth)),
        "complement": bsf(confusion(complement, truth)),
    }
    directed = MixedGraph(["A", "B"], [("A", "B", TAIL, ARROW)])
    bidirected = MixedGraph(["A", "B"], [("A", "B", ARROW, ARROW)])
    flipped = truth.without_edge("B", "C").with_edge("B", "C", CIRCLE, ARROW)
    extra = truth.with_edge("A", "D", CIRCLE, CIRCLE)
    shds = (shd(truth, truth), shd(directed, bidirected), shd(flipped, truth), shd(extra, truth))
    ok = values == {"perfect": 1.0, "empty": 0.0, "full": 0.0, "complement": -1.0} and shds == (0, 1, 1, 1)
    ok &= bsf(ConfusionCounts(3, 0, 3, 0)) == 1.0
    criterion(9, ok, f"bsf {values}; shd identical/A->B vs A<->B/one mark/extra edge = {shds}")
    assert ok


def test_criterion_10_bench_determinism(criterion, tmp_path):
    t0 = time.monotonic()
    outputs = []
    for k in range(2):
        spec = RunSpec(v=(6, 8), d=(3,), n=(2000,), latent_rate=(0.1,), alpha=(0.01,), reps=3, seed=7, timeout_min=10, out=tmp_path / f"run{k}")
        outputs.append(cmd_bench(spec).read_bytes())
    dt = time.monotonic() - t0
    rows = outputs[0].decode().count("\n") - 1
    ok = outputs[0] == outputs[1] and rows == 8 and dt < 1200
    criterion(10, ok, f"two bench runs byte-identical={outputs[0] == outputs[1]} ({rows} rows); {dt:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_11_scale(criterion):
    dag = sim.random_dag(50, 3, 11)
    data = sim.sample_sem(dag, sim.random_params(dag, 111), 10_000, 211)
    t0 = time.monotonic()
    res = cchm(data)
    dt = time.monotonic() - t0
    ok = dt < 600 and not res.timed_out
    criterion(11, ok, f"V=50 d=3 n=10000 run took {dt:.1f}s ({res.mag.num_edges()} edges)")
    assert ok
