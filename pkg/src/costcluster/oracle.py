"""Brute-force ground truth and checkers for the optimality structure of troubleshooting plans.

All checkers return lists of :class:`Violation`; an empty list means the
property holds. Inequalities are only counted as violated when they fail by
more than ``tol``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .ecr import _check_sequence, evaluate_ecr
from .flat import MaximizingSet
from .model import Action, ClusterNode, TroubleshootingModel
from .tree import CompoundAction, induce_absorption

CHECK_TOL = 1e-9
TIE_TOL = 1e-12


class OracleLimitError(ValueError):
    """The instance is too large for exhaustive search."""


@dataclass(frozen=True)
class OracleReport:
    best_sequence: tuple[str, ...]
    best_ecr: float
    sequences_examined: int
    ties: int


@dataclass(frozen=True)
class Violation:
    check: str
    index: int
    detail: str
    lhs: float = float("nan")
    rhs: float = float("nan")

    def __str__(self):
        return f"{self.check}@{self.index}: {self.detail}"


def _perm_chunks(n, size=100_000):
    it = itertools.permutations(range(n))
    while True:
        block = list(itertools.islice(it, size))
        if not block:
            return
        yield np.array(block, dtype=np.int_)


def brute_force_optimal(
    model: TroubleshootingModel, limit: int = 8, backend: Optional[str] = None
) -> OracleReport:
    """Minimum ECR over all n! orderings of the model's actions.

    Permutations are enumerated in lexicographic order of action id, so the
    reported sequence is the lexicographically smallest one within
    ``TIE_TOL`` of the minimum.
    """
    n = model.n_actions
    if n > limit:
        raise OracleLimitError(
            f"{n} actions exceed the oracle limit of {limit} ({n}! orderings); raise --limit or shrink the model"
        )
    ids = sorted(a.action_id for a in model.actions)
    if n == 0:
        return OracleReport((), 0.0, 1, 1)

    if not kernels.is_float_model(model):
        values = [evaluate_ecr(model, p).ecr for p in itertools.permutations(ids)]
        best = min(values)
        first = next(i for i, v in enumerate(values) if v == best)
        ties = sum(1 for v in values if v == best)
        best_seq = next(itertools.islice(itertools.permutations(ids), first, None))
        return OracleReport(tuple(best_seq), best, len(values), ties)

    arr = model.packed
    to_model = np.array([arr.index[a] for a in ids], dtype=np.int_)
    impl = kernels.backend(backend)
    parts = []
    for chunk in _perm_chunks(n):
        rows = np.ascontiguousarray(to_model[chunk])
        parts.append(impl.ecr_batch(rows, arr.cost, arr.prob, arr.cluster_of, arr.parent, arr.combined))
    values = np.concatenate(parts)
    best = float(values.min())
    close = values <= best + TIE_TOL * max(1.0, abs(best))
    first = int(np.argmax(close))
    best_seq = next(itertools.islice(itertools.permutations(ids), first, None))
    return OracleReport(tuple(best_seq), best, int(values.size), int(close.sum()))


def ecr_many(model: TroubleshootingModel, sequences, backend: Optional[str] = None) -> np.ndarray:
    """ECR of many full or partial sequences of equal length (float models)."""
    arr = model.packed
    rows = np.array([[arr.index[a] for a in s] for s in sequences], dtype=np.int_)
    return kernels.backend(backend).ecr_batch(rows, arr.cost, arr.prob, arr.cluster_of, arr.parent, arr.combined)


def random_permutation_ecr(model: TroubleshootingModel, count: int, seed=None, backend: Optional[str] = None):
    """ECR of ``count`` uniformly random full orderings; returns (values, index matrix)."""
    arr = model.packed
    rng = np.random.default_rng(seed)
    rows = np.argsort(rng.random((count, model.n_actions)), axis=1).astype(np.int_)
    impl = kernels.backend(backend)
    return impl.ecr_batch(rows, arr.cost, arr.prob, arr.cluster_of, arr.parent, arr.combined), rows


# -- per-step bookkeeping shared by the checkers ---------------------------


def _walk(model, sequence):
    """Opened-cluster set before each step, plus each step's cost and newly opened clusters."""
    opened = {model.root_id}
    before, costs, newly = [], [], []
    for aid in sequence:
        a = model.action_map[aid]
        before.append(frozenset(opened))
        c, new = _cost_under(model, a, opened)
        opened.update(new)
        costs.append(c)
        newly.append(new)
    return before, costs, newly


def _cost_under(model, a: Action, opened):
    c = a.cost
    new = []
    for cid in model.chains[a.cluster_id]:
        if cid in opened:
            break
        new.append(cid)
        c = c + model.cluster_map[cid].combined_cost
    return c, new


_CASES = {
    (True, False): "opening-then-free",
    (False, True): "free-then-opening",
    (True, True): "opening-opening",
    (False, False): "free-free",
}


def check_adjacency(model: TroubleshootingModel, sequence: Sequence[str], tol: float = CHECK_TOL) -> list[Violation]:
    """Adjacent-pair exchange conditions.

    For each pair ``(x, x+1)`` whose conditional costs would not change if the
    two were swapped, the earlier action must be at least as efficient (using
    cluster efficiency for opening actions). Pairs where the first action
    releases the second are not constrained.
    """
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    before, costs, newly = _walk(model, sequence)
    out = []
    for x in range(len(sequence) - 1):
        a = model.action_map[sequence[x]]
        b = model.action_map[sequence[x + 1]]
        b_first, b_new = _cost_under(model, b, before[x])
        a_second, _ = _cost_under(model, a, before[x] | set(b_new))
        if b_first != costs[x + 1] or a_second != costs[x]:
            continue
        lhs = a.repair_prob / costs[x]
        rhs = b.repair_prob / costs[x + 1]
        if lhs < rhs - tol:
            case = _CASES[(bool(newly[x]), bool(newly[x + 1]))]
            out.append(Violation("adjacency", x, f"{case}: {a.action_id} ({lhs:.6g}) before {b.action_id} ({rhs:.6g})",
                                 float(lhs), float(rhs)))
    return out


def regular_partition(model: TroubleshootingModel, sequence: Sequence[str], mode: str = "cluster"):
    """Unique partition into maximal runs of same-cluster (or same top-level subtree) actions.

    Returns half-open ``(start, stop)`` ranges.
    """
    if mode == "cluster":
        label = [model.action_map[a].cluster_id for a in sequence]
    elif mode == "subtree":
        top = model.top_subtree
        label = [top[model.action_map[a].cluster_id] for a in sequence]
    else:
        raise ValueError(f"unknown partition mode {mode!r}")
    out = []
    start = 0
    for i in range(1, len(label) + 1):
        if i == len(label) or label[i] != label[start]:
            out.append((start, i))
            start = i
    return out


def _block_ef(model, sequence, start, stop, costs):
    p = sum((model.action_map[a].repair_prob for a in sequence[start:stop]), 0)
    return p / sum(costs[start:stop], 0)


def check_block_efficiency_order(
    model: TroubleshootingModel,
    sequence: Sequence[str],
    mode: Optional[str] = None,
    tol: float = CHECK_TOL,
) -> list[Violation]:
    """Adjacent maximal blocks must be in non-increasing block efficiency.

    Blocks are same-cluster runs (``mode="cluster"``, default for flat models)
    or same top-level-subtree runs (``mode="subtree"``, default for deeper
    trees). A pair is only constrained when swapping the two blocks leaves
    every conditional cost unchanged.
    """
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    if mode is None:
        mode = "cluster" if model.depth <= 1 else "subtree"
    blocks = regular_partition(model, sequence, mode)
    before, costs, _ = _walk(model, sequence)
    out = []
    for (x, y), (_, z) in zip(blocks, blocks[1:]):
        opened = set(before[x])
        swapped_costs = []
        for aid in sequence[y:z] + sequence[x:y]:
            c, new = _cost_under(model, model.action_map[aid], opened)
            opened.update(new)
            swapped_costs.append(c)
        if swapped_costs != list(costs[y:z]) + list(costs[x:y]):
            continue
        e1 = _block_ef(model, sequence, x, y, costs)
        e2 = _block_ef(model, sequence, y, z, costs)
        if e1 < e2 - tol:
            out.append(Violation("block_order", x, f"block [{x},{y}) ef {e1:.6g} before block [{y},{z}) ef {e2:.6g}",
                                 float(e1), float(e2)))
    return out


def _top_entries(model, cluster_id=None):
    absorbed = induce_absorption(model, cluster_id)
    return [item for _, item in absorbed.entries.items()]


def check_compound_structure(
    model: TroubleshootingModel, sequence: Sequence[str], tol: float = CHECK_TOL
) -> list[Violation]:
    """Every absorbed compound action (nested ones included) occurs as a contiguous block that starts
    by opening its cluster, and top-level entries appear in non-increasing efficiency.

    On flat models the compounds are exactly the clusters' maximizing sequences.
    """
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    pos = {a: i for i, a in enumerate(sequence)}
    _, _, newly = _walk(model, sequence)
    out = []
    entries = _top_entries(model)
    for top in entries:
        if not isinstance(top, CompoundAction):
            continue
        for comp in top.compounds():
            idx = sorted(pos[a] for a in comp.unfold())
            start = idx[0]
            if idx != list(range(start, start + len(idx))):
                out.append(Violation("compound", start, f"compound for {comp.cluster_id} is not contiguous"))
            elif comp.cluster_id not in newly[start]:
                out.append(Violation("compound", start, f"block for {comp.cluster_id} does not start by opening it"))
    if out:
        return out

    starts = {}
    for e in entries:
        first = e.unfold()[0] if isinstance(e, CompoundAction) else e.action_id
        starts[pos[first]] = e
    ordered = [starts[i] for i in sorted(starts)]
    for k, (e1, e2) in enumerate(zip(ordered, ordered[1:])):
        if e1.efficiency < e2.efficiency - tol:
            out.append(Violation("entry_order", k, f"entry {_name(e1)} ef {e1.efficiency:.6g} before "
                                                   f"{_name(e2)} ef {e2.efficiency:.6g}",
                                 float(e1.efficiency), float(e2.efficiency)))
    return out


def _name(e):
    return f"<{e.cluster_id}>" if isinstance(e, CompoundAction) else e.action_id


def check_segments_sorted(model: TroubleshootingModel, sequence: Sequence[str], tol: float = CHECK_TOL):
    """Between opening indices, actions run in non-increasing efficiency.

    A segment runs from just after one opening index up to and including the
    next; each step is compared at its conditional cost.
    """
    sequence = tuple(sequence)
    _, costs, newly = _walk(model, sequence)
    out = []
    for x in range(len(sequence) - 1):
        if newly[x]:
            continue
        e1 = model.action_map[sequence[x]].repair_prob / costs[x]
        e2 = model.action_map[sequence[x + 1]].repair_prob / costs[x + 1]
        if e1 < e2 - tol:
            out.append(Violation("segment", x, f"{sequence[x]} ({e1:.6g}) before {sequence[x + 1]} ({e2:.6g})",
                                 float(e1), float(e2)))
    return out


def check_all(model: TroubleshootingModel, sequence: Sequence[str], tol: float = CHECK_TOL) -> dict[str, list[Violation]]:
    return {
        "adjacency": check_adjacency(model, sequence, tol),
        "block_order": check_block_efficiency_order(model, sequence, tol=tol),
        "segments": check_segments_sorted(model, sequence, tol),
        "compound_structure": check_compound_structure(model, sequence, tol),
    }


# -- subset oracles --------------------------------------------------------


def brute_force_maximizing_set(cluster: ClusterNode, actions: Sequence[Action], limit: int = 20):
    """Largest subset maximizing ``sum P / (C_K + sum C)``, by enumerating every non-empty subset.

    Returns ``(frozenset of ids, efficiency)``. Float subsets within
    ``TIE_TOL`` of the best ratio count as maximizers.
    """
    actions = list(actions)
    k = len(actions)
    if k == 0:
        raise ValueError(f"cluster {cluster.cluster_id!r} has no actions")
    if k > limit:
        raise OracleLimitError(f"{k} actions exceed the subset limit of {limit}")
    ck = cluster.combined_cost
    plain = all(type(x) in (float, int) for a in actions for x in (a.cost, a.repair_prob)) and type(ck) in (float, int)
    if plain:
        masks = np.arange(1, 1 << k, dtype=np.int64)
        bits = ((masks[:, None] >> np.arange(k)) & 1).astype(bool)
        p = np.array([a.repair_prob for a in actions], dtype=np.float64)
        c = np.array([a.cost for a in actions], dtype=np.float64)
        ratio = (bits @ p) / (ck + bits @ c)
        best = ratio.max()
        cand = np.flatnonzero(ratio >= best - TIE_TOL * max(1.0, abs(best)))
        sizes = bits[cand].sum(axis=1)
        pick = cand[np.argmax(sizes)]
        chosen = frozenset(actions[i].action_id for i in np.flatnonzero(bits[pick]))
        sel = [a for a in actions if a.action_id in chosen]
        eff = sum((a.repair_prob for a in sel), 0) / (ck + sum((a.cost for a in sel), 0))
        return chosen, eff
    best_key = None
    for mask in range(1, 1 << k):
        sel = [actions[i] for i in range(k) if mask >> i & 1]
        r = sum((a.repair_prob for a in sel), 0) / (ck + sum((a.cost for a in sel), 0))
        key = (r, len(sel))
        if best_key is None or key > best_key:
            best_key = key
            best = frozenset(a.action_id for a in sel)
    return best, best_key[0]


def check_maximizing_boundary(ms: MaximizingSet, actions: Sequence[Action], tol: float = TIE_TOL) -> list[Violation]:
    """Members are at least as efficient as the set, non-members strictly less (ties belong inside)."""
    out = []
    for a in actions:
        ef = a.efficiency
        if a.action_id in ms.members:
            if ef < ms.efficiency - tol:
                out.append(Violation("boundary", 0, f"member {a.action_id} ef {ef:.6g} < set ef {ms.efficiency:.6g}",
                                     float(ef), float(ms.efficiency)))
        elif ef >= ms.efficiency:
            out.append(Violation("boundary", 0, f"non-member {a.action_id} ef {ef:.6g} >= set ef {ms.efficiency:.6g}",
                                 float(ef), float(ms.efficiency)))
    return out


def best_subtree_compound(model: TroubleshootingModel, cluster_id: str, limit: int = 10):
    """Most efficient set of actions strictly below ``cluster_id`` (``cluster_id`` itself open).

    Every subset is costed as one block: its actions plus every cluster on
    the way down to them. Returns ``(frozenset of ids, efficiency)`` or
    ``(frozenset(), 0)`` when nothing lies below.
    """
    below = [a for cid in model.subtree(cluster_id) if cid != cluster_id for a in model.members[cid]]
    if len(below) > limit:
        raise OracleLimitError(f"{len(below)} actions below {cluster_id!r} exceed limit {limit}")
    best, best_ef = frozenset(), 0
    for mask in range(1, 1 << len(below)):
        sel = [below[i] for i in range(len(below)) if mask >> i & 1]
        opened = {cluster_id}
        cost = 0
        for a in sel:
            c, new = _cost_under(model, a, opened | set(model.chains[cluster_id]) | {model.root_id})
            opened.update(new)
            cost = cost + c
        ef = sum((a.repair_prob for a in sel), 0) / cost
        if ef > best_ef:
            best, best_ef = frozenset(a.action_id for a in sel), ef
    return best, best_ef


def maximizing_compound(model: TroubleshootingModel, cluster_id: str) -> Optional[CompoundAction]:
    """Most efficient compound entry of the subtree absorbed into ``cluster_id``."""
    comps = [e for e in _top_entries(model, cluster_id) if isinstance(e, CompoundAction)]
    if not comps:
        return None
    return min(comps, key=lambda c: c.key)


__all__ = [
    "OracleReport",
    "Violation",
    "OracleLimitError",
    "brute_force_optimal",
    "check_adjacency",
    "regular_partition",
    "check_block_efficiency_order",
    "check_compound_structure",
    "check_segments_sorted",
    "check_all",
    "brute_force_maximizing_set",
    "best_subtree_compound",
    "maximizing_compound",
    "check_maximizing_boundary",
    "ecr_many",
    "random_permutation_ecr",
]
