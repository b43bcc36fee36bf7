"""P-over-C ordering, cluster maximizing sets, and the extended P-over-C planner for flat models."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

from .ecr import PlanResult, evaluate_plan
from .model import Action, ClusterNode, TroubleshootingModel

# Entry kinds in priority keys; lower sorts first, so clusters win ties against actions.
CLUSTER_KIND = 0
ACTION_KIND = 1


class EmptyClusterError(ValueError):
    """A maximizing set was requested for a cluster without actions."""


class DispatchError(ValueError):
    """The model's shape does not fit the requested planner."""


def action_key(a: Action):
    return (-a.efficiency, ACTION_KIND, a.action_id)


def p_over_c(actions: Iterable[Action]) -> list[str]:
    """Descending P/C, ties by ascending id."""
    actions = list(actions)
    if not actions:
        raise ValueError("p_over_c needs at least one action")
    return [a.action_id for a in sorted(actions, key=action_key)]


@dataclass(frozen=True)
class MaximizingSet:
    cluster_id: str
    members: frozenset[str]
    efficiency: float
    ordered_sequence: tuple[str, ...]
    total_prob: float
    total_cost: float  # includes the cluster's combined cost


def greedy_prefix(cluster_cost, entries):
    """Length of the maximizing prefix of ``entries`` and its (prob, cost) totals.

    ``entries`` yields ``(prob, cost, efficiency)`` in descending efficiency.
    An entry joins while the running ratio ``sum P / (cluster_cost + sum C)``
    would not decrease; equal-efficiency entries are taken so the set is the
    largest maximizer.
    """
    sp = 0
    sc = cluster_cost
    taken = 0
    for p, c, ef in entries:
        if taken and ef < sp / sc:
            break
        sp = sp + p
        sc = sc + c
        taken += 1
    return taken, sp, sc


def maximizing_set(cluster: ClusterNode, member_actions: Sequence[Action]) -> MaximizingSet:
    ordered = sorted(member_actions, key=action_key)
    if not ordered:
        raise EmptyClusterError(f"cluster {cluster.cluster_id!r} has no actions")
    k, sp, sc = greedy_prefix(cluster.combined_cost, ((a.repair_prob, a.cost, a.efficiency) for a in ordered))
    chosen = ordered[:k]
    return MaximizingSet(
        cluster.cluster_id,
        frozenset(a.action_id for a in chosen),
        sp / sc,
        tuple(a.action_id for a in chosen),
        sp,
        sc,
    )


def plan_basic(model: TroubleshootingModel) -> PlanResult:
    """Plain P-over-C over all actions, ignoring clusters."""
    seq = p_over_c(model.actions)
    return _result(model, seq, "basic")


def _result(model, seq, algorithm):
    r = evaluate_plan(model, seq)
    return replace(r, algorithm=algorithm)


def plan_flat(model: TroubleshootingModel) -> PlanResult:
    """Extended P-over-C for a root plus bottom-level clusters.

    Free actions and closed clusters compete in one max-queue by efficiency.
    A popped cluster emits its maximizing sequence; its remaining actions are
    released into the queue only then, at their plain efficiency.
    """
    if model.depth > 1:
        raise DispatchError("model has nested clusters (depth > 1); use plan_tree")
    if not model.actions:
        return _result(model, [], "flat")
    queue = []
    for a in model.members[model.root_id]:
        queue.append((action_key(a), a))
    for cid in model.children[model.root_id]:
        acts = model.members[cid]
        if not acts:
            continue
        ms = maximizing_set(model.cluster_map[cid], acts)
        queue.append(((-ms.efficiency, CLUSTER_KIND, cid), ms))
    heapq.heapify(queue)
    seq: list[str] = []
    while queue:
        _, item = heapq.heappop(queue)
        if isinstance(item, Action):
            seq.append(item.action_id)
            continue
        seq.extend(item.ordered_sequence)
        for a in model.members[item.cluster_id]:
            if a.action_id not in item.members:
                heapq.heappush(queue, (action_key(a), a))
    return _result(model, seq, "flat")
