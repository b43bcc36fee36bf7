from fractions import Fraction

import pytest
from hypothesis import given, settings

from conftest import OPTIMAL, S2, chain_model
from costcluster.ecr import (
    EvidenceState, SequenceError, apply_action, conditional_cost, ecr_by_evidence, ecr_decomposed,
    evaluate_ecr, evaluate_plan, subsequence_efficiency,
)
from costcluster.model import Action, ClusterNode, TroubleshootingModel
from strategies import model_and_permutation


def test_example1_optimal(example1):
    r = evaluate_ecr(example1, OPTIMAL)
    assert r.ecr == pytest.approx(4.71, abs=1e-12)
    assert r.step_costs == (2, 1, 1, 1, 3, 1)
    assert r.step_survival == pytest.approx((1, 0.75, 0.55, 0.41, 0.30, 0.10))
    assert r.opening_indices == (0, 4)
    assert r.step_openings[0] == ("Kg",) and r.step_openings[4] == ("Kb",)


def test_example1_s2(example1):
    assert evaluate_ecr(example1, S2).ecr == pytest.approx(4.83, abs=1e-12)


def test_example1_exact(example1_exact):
    assert evaluate_ecr(example1_exact, OPTIMAL).ecr == Fraction(471, 100)
    assert evaluate_ecr(example1_exact, S2).ecr == Fraction(483, 100)


def test_single_action():
    m = TroubleshootingModel([ClusterNode("r")], [Action("a", 5, 0.3, "r")])
    assert evaluate_ecr(m, ["a"]).ecr == 5


def test_errors(example1):
    with pytest.raises(SequenceError):
        evaluate_ecr(example1, ["a1", "a1"])
    with pytest.raises(SequenceError):
        evaluate_ecr(example1, ["zz"])
    with pytest.raises(SequenceError):
        evaluate_plan(example1, ["a1", "zz"])
    with pytest.raises(SequenceError):
        evaluate_plan(example1, ["a1", "a1"])


def test_survival_clamped_at_zero():
    m = TroubleshootingModel([ClusterNode("r")], [Action("a", 1, 0.6, "r"), Action("b", 1, 0.4 + 1e-10, "r"),
                                                    Action("c", 1, 0.0, "r")])
    r = evaluate_ecr(m, ["a", "b", "c"])
    assert r.step_survival[2] == 0


def test_conditional_cost(example1):
    ev = EvidenceState.initial(example1)
    assert conditional_cost(example1, "g1", ev) == 2
    assert conditional_cost(example1, "a1", ev) == 1
    with pytest.raises(SequenceError):
        conditional_cost(example1, "nope", ev)


def test_conditional_cost_grandchild():
    m = chain_model(costs=(2, 3))
    assert conditional_cost(m, "x", EvidenceState.initial(m)) == 6


def test_apply_action(example1):
    ev = apply_action(EvidenceState.initial(example1), example1, "g1")
    assert ev.opened == {"Ka", "Kg"} and ev.performed == ("g1",)
    again = apply_action(ev, example1, "a1")
    assert again.opened == ev.opened
    with pytest.raises(SequenceError):
        apply_action(again, example1, "g1")


def test_apply_opens_all_ancestors():
    m = chain_model()
    ev = apply_action(EvidenceState.initial(m), m, "x")
    assert ev.opened == {"r", "K1", "K2"}


def test_free_and_confined(example1):
    ev = apply_action(EvidenceState.initial(example1), example1, "g1")
    assert ev.free_actions(example1) == {"a1", "a2", "g2"}
    assert ev.confined_actions(example1) == {"b1", "b2"}


def test_decomposition_example1(example1):
    act, opening = ecr_decomposed(example1, OPTIMAL)
    # plain costs weighted by survival: 1 + .75 + .55 + .41 + .30 + .10
    assert act == pytest.approx(3.11, abs=1e-12)
    assert opening == pytest.approx(1 * 1 + 2 * 0.30, abs=1e-12)
    assert act + opening == pytest.approx(4.71, abs=1e-12)


def test_decomposition_zero_cost_clusters():
    m = TroubleshootingModel([ClusterNode("r"), ClusterNode("k", "r")], [Action("a", 1, 0.5, "k")])
    assert ecr_decomposed(m, ["a"])[1] == 0


def test_decomposition_root_only():
    m = TroubleshootingModel([ClusterNode("r")], [Action("a", 1, 0.5, "r"), Action("b", 2, 0.1, "r")])
    assert ecr_decomposed(m, ["a", "b"])[1] == 0
    assert evaluate_ecr(m, ["a", "b"]).opening_indices == ()


def test_subsequence_efficiency(example1):
    assert subsequence_efficiency(example1, OPTIMAL, 0, 2) == pytest.approx(0.15)
    assert subsequence_efficiency(example1, ("a1",), 0, 1) == pytest.approx(0.14)
    with pytest.raises(ValueError):
        subsequence_efficiency(example1, OPTIMAL, 2, 2)


def test_subsequence_efficiency_zero_probability():
    m = TroubleshootingModel([ClusterNode("r")], [Action("a", 1, 0.0, "r"), Action("b", 2, 0.0, "r")])
    assert subsequence_efficiency(m, ["a", "b"], 0, 2) == 0


def test_cumulative_ecr(example1):
    r = evaluate_ecr(example1, OPTIMAL)
    assert r.cumulative_ecr[-1] == pytest.approx(r.ecr, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(model_and_permutation())
def test_invariants(mp):
    m, seq = mp
    r = evaluate_ecr(m, seq)
    assert r.step_survival[0] == 1
    for i in range(1, len(seq)):
        assert r.step_survival[i] <= r.step_survival[i - 1]
        assert r.step_survival[i] == pytest.approx(
            max(0.0, r.step_survival[i - 1] - m.action_map[seq[i - 1]].repair_prob), abs=1e-12)
    assert r.ecr == pytest.approx(sum(c * s for c, s in zip(r.step_costs, r.step_survival)), abs=1e-12)
    # one opening index per opened non-root cluster that holds an action
    touched = set()
    for aid in seq:
        touched.update(m.chains[m.action_map[aid].cluster_id])
    assert sum(len(o) for o in r.step_openings) == len(touched)
    assert len(r.opening_indices) == sum(1 for o in r.step_openings if o)


@settings(max_examples=200, deadline=None)
@given(model_and_permutation())
def test_independent_evaluations_agree(mp):
    m, seq = mp
    ref = evaluate_ecr(m, seq)
    assert ecr_by_evidence(m, seq) == pytest.approx(ref.ecr, abs=1e-12)
    assert sum(ecr_decomposed(m, seq)) == pytest.approx(ref.ecr, abs=1e-12)
    fast = evaluate_plan(m, seq)
    assert fast.ecr == pytest.approx(ref.ecr, abs=1e-12)
    assert fast.opening_indices == ref.opening_indices
    assert fast.step_openings == ref.step_openings
    assert fast.step_costs == pytest.approx(ref.step_costs, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(model_and_permutation())
def test_opened_is_ancestor_closed(mp):
    m, seq = mp
    ev = EvidenceState.initial(m)
    for aid in seq:
        ev = apply_action(ev, m, aid)
        assert m.root_id in ev.opened
        for cid in ev.opened:
            assert set(m.chains[cid]) <= ev.opened
        free, confined = ev.free_actions(m), ev.confined_actions(m)
        assert not free & confined
        assert free | confined == set(m.action_map) - set(ev.performed)
