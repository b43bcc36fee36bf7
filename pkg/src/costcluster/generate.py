"""Seeded random models for tests and benchmarks."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .model import Action, ClusterNode, TroubleshootingModel


def random_model(
    seed=None,
    n_actions: int = 6,
    n_clusters: int = 2,
    max_depth: Optional[int] = None,
    flat: bool = False,
    cost_range: tuple[float, float] = (0.5, 5.0),
    cluster_cost_range: tuple[float, float] = (0.0, 5.0),
    mass_range: tuple[float, float] = (0.5, 1.0),
    root_weight: float = 1.0,
) -> TroubleshootingModel:
    """Random tree model.

    ``n_clusters`` counts non-root clusters. Each picks a uniform random parent
    among earlier clusters (only the root when ``flat``; limited by
    ``max_depth``). Action costs are uniform in ``cost_range`` and every
    cluster's combined cost is uniform in ``cluster_cost_range``, split at a
    random point into open and close parts. Repair probabilities are random
    weights normalized to a total mass drawn from ``mass_range``.
    Actions land in a uniformly chosen cluster, root included
    (``root_weight`` scales the root's share).
    """
    if n_actions < 0 or n_clusters < 0:
        raise ValueError("sizes must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    if flat:
        max_depth = 1

    ids = ["K0"] + [f"K{i}" for i in range(1, n_clusters + 1)]
    depth = np.zeros(n_clusters + 1, dtype=np.int64)
    parents = [None]
    for i in range(1, n_clusters + 1):
        if max_depth is None:
            p = int(rng.integers(0, i))
        else:
            allowed = np.flatnonzero(depth[:i] < max_depth)
            p = int(allowed[rng.integers(0, allowed.size)])
        depth[i] = depth[p] + 1
        parents.append(p)

    total = rng.uniform(*cluster_cost_range, size=n_clusters + 1)
    split = rng.random(n_clusters + 1)
    clusters = [ClusterNode("K0")]
    for i in range(1, n_clusters + 1):
        o = float(total[i] * split[i])
        clusters.append(ClusterNode(ids[i], ids[parents[i]], o, float(total[i]) - o))

    cost = rng.uniform(*cost_range, size=n_actions)
    weights = rng.random(n_actions)
    mass = rng.uniform(*mass_range) if n_actions else 0.0
    prob = weights / weights.sum() * mass if n_actions else weights
    share = np.ones(n_clusters + 1)
    share[0] = root_weight
    where = rng.choice(n_clusters + 1, size=n_actions, p=share / share.sum())
    actions = [Action(f"a{j}", float(cost[j]), float(prob[j]), ids[where[j]]) for j in range(n_actions)]
    return TroubleshootingModel(tuple(clusters), tuple(actions))
