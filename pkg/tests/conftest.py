import pytest

from costcluster.document import EXAMPLE_1, build_model
from costcluster.model import Action, ClusterNode, TroubleshootingModel

OPTIMAL = ("g1", "g2", "a1", "a2", "b1", "b2")
S2 = ("a1", "g1", "a2", "g2", "b1", "b2")


@pytest.fixture
def example1():
    return build_model(EXAMPLE_1)


@pytest.fixture
def example1_exact():
    return build_model(EXAMPLE_1, exact=True)


def chain_model(costs=(2, 3), action_cost=1.0, p=0.5):
    """root -> K1 -> K2, one action in K2."""
    clusters = [ClusterNode("r"), ClusterNode("K1", "r", costs[0], 0), ClusterNode("K2", "K1", costs[1], 0)]
    return TroubleshootingModel(clusters, [Action("x", action_cost, p, "K2")])
