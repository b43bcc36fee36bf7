import random

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import OPTIMAL, S2
from costcluster.ecr import EvidenceState, conditional_cost, evaluate_ecr
from costcluster.model import Action, ClusterNode, TroubleshootingModel
from costcluster.sim import estimate_ecr, simulate_once
from strategies import model_and_permutation


class Fixed:
    def __init__(self, u):
        self.u = u

    def random(self):
        return self.u


def test_certain_first_action():
    m = TroubleshootingModel([ClusterNode("r"), ClusterNode("k", "r", 2, 1)],
                             [Action("a", 1.5, 1.0, "k"), Action("b", 1, 0.0, "r")])
    assert simulate_once(m, ["a", "b"], random.Random(0)) == (4.5, True)


def test_all_zero_probabilities():
    m = TroubleshootingModel([ClusterNode("r"), ClusterNode("k", "r", 2, 1)],
                             [Action("a", 1, 0.0, "k"), Action("b", 1, 0.0, "r")])
    assert simulate_once(m, ["a", "b"], random.Random(0)) == (5.0, False)


def test_second_step_solves(example1):
    # u in [P(g1), P(g1)+P(g2)) means g2 solves
    assert simulate_once(example1, OPTIMAL, Fixed(0.3)) == (3.0, True)


def test_single_action_exact_mean():
    m = TroubleshootingModel([ClusterNode("r")], [Action("a", 5, 0.4, "r")])
    s = estimate_ecr(m, ["a"], 1000, seed=1)
    assert s.mean_cost == 5 and s.std_error == 0 and s.solve_rate == pytest.approx(0.4, abs=0.06)


def test_one_trial():
    m = TroubleshootingModel([ClusterNode("r")], [Action("a", 5, 0.4, "r")])
    assert estimate_ecr(m, ["a"], 1, seed=0).std_error == 0
    with pytest.raises(ValueError):
        estimate_ecr(m, ["a"], 0)


def test_reproducible(example1):
    a = estimate_ecr(example1, OPTIMAL, 20000, seed=7)
    b = estimate_ecr(example1, OPTIMAL, 20000, seed=7)
    assert a == b
    assert estimate_ecr(example1, OPTIMAL, 20000, seed=8) != a


def test_backends_bit_identical(example1):
    from costcluster import kernels
    if not kernels.HAVE_COMPILED:
        pytest.skip("compiled kernels not built")
    a = estimate_ecr(example1, S2, 50000, seed=3, backend="compiled")
    b = estimate_ecr(example1, S2, 50000, seed=3, backend="python")
    assert a == b


def test_parallel_agrees_in_distribution(example1):
    s = estimate_ecr(example1, S2, 200000, seed=5, workers=4)
    assert s.trials == 200000
    assert abs(s.mean_cost - 4.83) <= 4 * s.std_error
    assert s == estimate_ecr(example1, S2, 200000, seed=5, workers=4)


def test_example1_estimates(example1):
    for seq, target in ((OPTIMAL, 4.71), (S2, 4.83)):
        s = estimate_ecr(example1, seq, 200000, seed=11)
        assert abs(s.mean_cost - target) <= 4 * s.std_error
        assert s.solve_rate == 1.0


@settings(max_examples=50, deadline=None)
@given(model_and_permutation(max_actions=8, max_clusters=4, max_depth=3))
def test_trial_cost_bounds(mp):
    m, seq = mp
    rng = np.random.default_rng(0)
    first = conditional_cost(m, seq[0], EvidenceState.initial(m))
    sunk = sum(evaluate_ecr(m, seq).step_costs)
    for _ in range(30):
        cost, _ = simulate_once(m, seq, rng)
        assert first - 1e-12 <= cost <= sunk + 1e-12


def test_unbiased_across_seeds(example1):
    target = evaluate_ecr(example1, S2).ecr
    hits = sum(abs((s := estimate_ecr(example1, S2, 5000, seed=k)).mean_cost - target) <= 4 * s.std_error
               for k in range(100))
    assert hits >= 99
