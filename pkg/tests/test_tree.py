import pytest
from hypothesis import given, settings

from conftest import OPTIMAL
from costcluster.flat import p_over_c, plan_flat
from costcluster.model import Action, ClusterNode, TroubleshootingModel
from costcluster.oracle import best_subtree_compound, brute_force_maximizing_set, brute_force_optimal, maximizing_compound
from costcluster.tree import (
    AbsorbedCluster, CompoundAction, absorb, entry_cost, entry_prob, induce_absorption, plan_tree, unfold_order,
)
from costcluster import kernels
from strategies import models

needs_compiled = pytest.mark.skipif(not kernels.HAVE_COMPILED, reason="compiled kernels not built")


def entries(absorbed):
    return absorbed.peek_entries()


def test_absorb_example1(example1):
    root = AbsorbedCluster.from_members(example1, "Ka")
    kids = [AbsorbedCluster.from_members(example1, c) for c in ("Kb", "Kg")]
    out = absorb(example1, root, kids)
    comps = {e.cluster_id: e for e in entries(out) if isinstance(e, CompoundAction)}
    atoms = [e.action_id for e in entries(out) if not isinstance(e, CompoundAction)]
    assert comps["Kb"].total_prob == pytest.approx(0.30) and comps["Kb"].total_cost == 4
    assert comps["Kb"].efficiency == pytest.approx(0.075)
    assert comps["Kg"].total_prob == pytest.approx(0.45) and comps["Kg"].total_cost == 3
    assert comps["Kg"].efficiency == pytest.approx(0.15)
    assert sorted(atoms) == ["a1", "a2"]


def test_single_action_child():
    m = TroubleshootingModel([ClusterNode("r"), ClusterNode("k", "r", 1, 0)], [Action("x", 1, 0.2, "k")])
    (c,) = entries(induce_absorption(m))
    assert (c.total_prob, c.total_cost) == (0.2, 2)
    assert c.efficiency == pytest.approx(0.1)


def test_leftover_below_compound():
    m = TroubleshootingModel([ClusterNode("r"), ClusterNode("k", "r", 1, 0)],
                             [Action("x", 1, 0.5, "k"), Action("y", 1, 0.01, "k")])
    es = entries(induce_absorption(m))
    comp = next(e for e in es if isinstance(e, CompoundAction))
    left = next(e for e in es if not isinstance(e, CompoundAction))
    assert comp.unfold() == ["x"] and left.action_id == "y"
    assert left.efficiency < comp.efficiency
    assert brute_force_maximizing_set(m.cluster_map["k"], m.members["k"])[0] == {"x"}


def test_empty_child_dropped():
    m = TroubleshootingModel([ClusterNode("r"), ClusterNode("k", "r", 1, 0)], [Action("x", 1, 0.2, "r")])
    assert [e.action_id for e in entries(induce_absorption(m))] == ["x"]


def test_absorb_rejects_non_child(example1):
    root = AbsorbedCluster.from_members(example1, "Kb")
    with pytest.raises(ValueError):
        absorb(example1, root, [AbsorbedCluster.from_members(example1, "Kg")])


def test_depth1_absorption_is_one_absorb(example1):
    a = induce_absorption(example1)
    b = absorb(example1, AbsorbedCluster.from_members(example1, "Ka"),
               [AbsorbedCluster.from_members(example1, c) for c in ("Kb", "Kg")])
    assert entries(a) == entries(b)


def test_chain_gives_nested_compound():
    m = TroubleshootingModel(
        [ClusterNode("r"), ClusterNode("K1", "r", 1, 0), ClusterNode("K2", "K1", 1, 0)],
        [Action("a0", 1, 0.1, "r"), Action("a1", 1, 0.2, "K1"), Action("a2", 1, 0.4, "K2")],
    )
    es = entries(induce_absorption(m))
    assert len(es) == 2
    (outer,) = [e for e in es if isinstance(e, CompoundAction)]
    assert outer.cluster_id == "K1"
    inner = outer.items[0]
    assert isinstance(inner, CompoundAction) and inner.cluster_id == "K2"
    assert outer.unfold() == ["a2", "a1"]
    assert outer.total_cost == 1 + (1 + 1) + 1


def test_plan_tree_example1(example1):
    for backend in (None, "python"):
        r = plan_tree(example1, backend=backend)
        assert r.sequence == OPTIMAL and r.ecr == pytest.approx(4.71, abs=1e-9)
        assert r.algorithm == "tree"


def test_plan_tree_exact(example1_exact):
    from fractions import Fraction
    assert plan_tree(example1_exact).ecr == Fraction(471, 100)


def test_plan_tree_root_only():
    m = TroubleshootingModel([ClusterNode("r")], [Action("a", 3, 0.2, "r"), Action("b", 1, 0.3, "r")])
    assert list(plan_tree(m).sequence) == p_over_c(m.actions)


def test_plan_tree_empty_model():
    m = TroubleshootingModel([ClusterNode("r")], [])
    assert plan_tree(m).sequence == () and plan_tree(m).ecr == 0


def test_bad_backend(example1):
    with pytest.raises(ValueError):
        plan_tree(example1, backend="gpu")


def _check_compound(c):
    atoms = list(c.atoms())
    assert atoms
    assert sum(entry_prob(a) for a in atoms) == pytest.approx(c.total_prob, abs=1e-12)
    for a in atoms:
        assert a.efficiency >= c.efficiency - 1e-12
    for item in c.items:
        if isinstance(item, CompoundAction):
            _check_compound(item)


@settings(max_examples=100, deadline=None)
@given(models(max_actions=12, max_clusters=6, max_depth=3))
def test_compound_invariants(m):
    absorbed = induce_absorption(m)
    seen = []
    for e in entries(absorbed):
        if isinstance(e, CompoundAction):
            _check_compound(e)
            sub = m.subtree(e.cluster_id)
            assert all(a.cluster_id in sub for a in e.atoms())
            seen += e.unfold()
        else:
            seen.append(e.action_id)
    assert sorted(seen) == sorted(m.action_map)
    # cost aggregate = atoms plus every cluster opened inside
    for e in entries(absorbed):
        if isinstance(e, CompoundAction):
            clusters = {c.cluster_id for c in e.compounds()}
            expect = sum(a.cost for a in e.atoms()) + sum(m.combined_cost(c) for c in clusters)
            assert e.total_cost == pytest.approx(expect, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(models(max_actions=10, max_clusters=5, max_depth=3))
def test_leftovers_below_their_compound(m):
    for cid in m.preorder:
        es = entries(induce_absorption(m, cid))
        for comp in es:
            if not isinstance(comp, CompoundAction):
                continue
            sub = set(m.subtree(comp.cluster_id))
            for other in es:
                if other is comp:
                    continue
                atoms = list(other.atoms()) if isinstance(other, CompoundAction) else [other]
                if all(a.cluster_id in sub for a in atoms):
                    assert other.efficiency < comp.efficiency


@settings(max_examples=80, deadline=None)
@given(models(max_actions=7, max_clusters=4, max_depth=3))
def test_plan_tree_is_optimal(m):
    assert plan_tree(m).ecr == pytest.approx(brute_force_optimal(m).best_ecr, abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(models(max_actions=8, max_clusters=3, flat=True))
def test_tree_matches_flat_on_flat_models(m):
    assert plan_tree(m).ecr == pytest.approx(plan_flat(m).ecr, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(models(max_actions=10, max_clusters=5, max_depth=3))
def test_maximizing_compound_dominates_every_subtree_subset(m):
    for cid in m.preorder:
        best = maximizing_compound(m, cid)
        _, ef = best_subtree_compound(m, cid)
        if best is None:
            assert ef == 0
        else:
            assert best.efficiency >= ef - 1e-12


@needs_compiled
@settings(max_examples=200, deadline=None)
@given(models(max_actions=40, max_clusters=12, max_depth=None))
def test_compiled_matches_python(m):
    fast = plan_tree(m)
    slow = plan_tree(m, backend="python")
    assert fast.sequence == slow.sequence
    assert fast.ecr == pytest.approx(slow.ecr, abs=1e-12)
    assert fast.opening_indices == slow.opening_indices


def test_unfold_order_drains(example1):
    a = induce_absorption(example1)
    assert tuple(unfold_order(a)) == OPTIMAL
    assert len(a) == 0
