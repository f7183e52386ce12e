import numpy as np
import pytest

from cchm import simulate as sim
from cchm.effects import DegenerateEffectError, direct_effect, orient_pair
from cchm.graphs import ARROW, TAIL, MixedGraph


def moments(X, names="AB"):
    return sim.second_moments(sim.Dataset(tuple(names), np.asarray(X, dtype=float)))


def simulate(beta, n, seed):
    dag = MixedGraph(["A", "B"], [("A", "B", TAIL, ARROW)], "DAG")
    params = sim.SemParams({("A", "B"): beta}, {"A": 1.0, "B": 1.0})
    return sim.sample_sem(dag, params, n, seed)


def test_exact_arithmetic():
    m = moments(np.column_stack([[1, -1, 1, -1], [2, -2, 2, -2]]))
    assert direct_effect(m, "A", "B") == 2.0
    assert direct_effect(m, "B", "A") == 0.5


def test_independent_gives_small_effect():
    X = np.random.default_rng(0).standard_normal((100_000, 2))
    assert abs(direct_effect(moments(X), "A", "B")) < 0.02


def test_recovers_coefficient():
    m = sim.second_moments(simulate(0.5, 100_000, 1))
    assert direct_effect(m, "A", "B") == pytest.approx(0.5, abs=0.02)


def test_population_ratio():
    # population moments of A -> B, beta = 1: E[A^2] = 1, E[AB] = 1, E[B^2] = 2
    m = sim.CovarianceMatrix(("A", "B"), np.array([[1.0, 1.0], [1.0, 2.0]]), 1)
    pair = orient_pair(m, "A", "B")
    assert pair.beta_a == 1.0 and pair.beta_b == 0.5
    assert pair.chosen == ("A", "B")
    assert pair.beta_a / pair.beta_b == 1.0**2 + 1


@pytest.mark.parametrize("beta", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_empirical_ratio(beta):
    ratios = []
    for seed in range(10):
        pair = orient_pair(sim.second_moments(simulate(beta, 10_000, seed)), "A", "B")
        ratios.append(pair.beta_a / pair.beta_b)
    assert np.mean(ratios) == pytest.approx(beta**2 + 1, abs=0.05)


def test_tie():
    m = sim.CovarianceMatrix(("A", "B"), np.array([[1.0, 0.4], [0.4, 1.0]]), 1)
    pair = orient_pair(m, "A", "B")
    assert pair.is_tie and pair.chosen is None


def test_antisymmetry():
    m = sim.second_moments(simulate(0.6, 5000, 3))
    assert orient_pair(m, "A", "B").chosen == orient_pair(m, "B", "A").chosen == ("A", "B")


def test_common_scaling_keeps_choice():
    data = simulate(0.4, 5000, 4)
    scaled = sim.Dataset(data.columns, data.values * 7.5)
    assert orient_pair(sim.second_moments(data), "A", "B").chosen == orient_pair(sim.second_moments(scaled), "A", "B").chosen


def test_orientation_rate():
    correct = sum(orient_pair(sim.second_moments(simulate(-0.3, 10_000, s)), "A", "B").chosen == ("A", "B") for s in range(100))
    assert correct >= 95


def test_degenerate():
    m = moments(np.column_stack([np.zeros(4), [1, 2, 3, 4]]))
    with pytest.raises(DegenerateEffectError):
        direct_effect(m, "A", "B")
    both = moments(np.zeros((4, 2)))
    with pytest.raises(DegenerateEffectError):
        orient_pair(both, "A", "B")
