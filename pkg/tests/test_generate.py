import pytest

from costcluster.generate import random_model


def test_reproducible():
    assert random_model(5, 20, 6) == random_model(5, 20, 6)
    assert random_model(5, 20, 6) != random_model(6, 20, 6)


def test_ranges():
    m = random_model(1, 200, 20)
    assert all(0.5 <= a.cost <= 5 for a in m.actions)
    assert all(0 <= c.combined_cost <= 5 + 1e-12 for c in m.clusters)
    assert 0.5 - 1e-9 <= sum(a.repair_prob for a in m.actions) <= 1 + 1e-9


def test_flat_and_depth_limit():
    assert random_model(2, 30, 10, flat=True).depth <= 1
    assert random_model(2, 30, 10, max_depth=2).depth <= 2


def test_empty_and_errors():
    assert random_model(0, 0, 0).n_actions == 0
    with pytest.raises(ValueError):
        random_model(0, -1, 0)
