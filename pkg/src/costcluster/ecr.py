"""Exact evaluation of troubleshooting sequences.

Positions are 0-based and ranges are half-open ``[start, stop)`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import TroubleshootingModel


class SequenceError(ValueError):
    """A sequence names an unknown action or repeats one."""


@dataclass(frozen=True)
class EvidenceState:
    """Failed actions so far plus the set of currently open clusters."""

    performed: tuple[str, ...]
    opened: frozenset[str]

    @classmethod
    def initial(cls, model: TroubleshootingModel) -> "EvidenceState":
        return cls((), frozenset([model.root_id]))

    def is_free(self, model: TroubleshootingModel, action_id: str) -> bool:
        """Unperformed and inside an open cluster."""
        return action_id not in self.performed and model.action_map[action_id].cluster_id in self.opened

    def free_actions(self, model: TroubleshootingModel) -> set[str]:
        return {a.action_id for a in model.actions if self.is_free(model, a.action_id)}

    def confined_actions(self, model: TroubleshootingModel) -> set[str]:
        return {a.action_id for a in model.actions
                if a.action_id not in self.performed and a.cluster_id not in self.opened}


@dataclass(frozen=True)
class PlanResult:
    sequence: tuple[str, ...]
    opening_indices: tuple[int, ...]
    ecr: float
    step_costs: tuple
    step_survival: tuple
    step_openings: tuple[tuple[str, ...], ...] = ()
    algorithm: str = "eval"

    @property
    def cumulative_ecr(self) -> list:
        out, acc = [], 0
        for c, s in zip(self.step_costs, self.step_survival):
            acc = acc + c * s
            out.append(acc)
        return out


def _action(model, action_id):
    try:
        return model.action_map[action_id]
    except KeyError:
        raise SequenceError(f"unknown action {action_id!r}") from None


def closed_ancestors(model: TroubleshootingModel, cluster_id: str, opened) -> list[str]:
    """Clusters on the path root -> cluster_id (root excluded) that are still closed, outermost first."""
    out = []
    for cid in model.chains[cluster_id]:
        if cid in opened:
            break
        out.append(cid)
    out.reverse()
    return out


def conditional_cost(model: TroubleshootingModel, action_id: str, evidence: EvidenceState):
    """Action cost plus the combined open+close cost of every closed cluster it needs."""
    a = _action(model, action_id)
    if action_id in evidence.performed:
        raise SequenceError(f"action {action_id!r} was already performed")
    c = a.cost
    for cid in model.chains[a.cluster_id]:
        if cid in evidence.opened:
            break
        c = c + model.cluster_map[cid].combined_cost
    return c


def apply_action(evidence: EvidenceState, model: TroubleshootingModel, action_id: str) -> EvidenceState:
    """Record a failed action; its cluster and all closed ancestors become open."""
    a = _action(model, action_id)
    if action_id in evidence.performed:
        raise SequenceError(f"repeating failed action {action_id!r} cannot fix the problem")
    newly = closed_ancestors(model, a.cluster_id, evidence.opened)
    return EvidenceState(evidence.performed + (action_id,), evidence.opened.union(newly))


def _check_sequence(model, sequence):
    seen = set()
    for aid in sequence:
        _action(model, aid)
        if aid in seen:
            raise SequenceError(f"duplicate action {aid!r} in sequence")
        seen.add(aid)


def evaluate_ecr(model: TroubleshootingModel, sequence: Sequence[str]) -> PlanResult:
    """Expected cost of repair of a (possibly partial) sequence.

    Survival before step i is ``1 - sum(P of earlier steps)``, clamped at 0.
    """
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    opened = {model.root_id}
    clusters = model.cluster_map
    costs, survival, openings, z = [], [], [], []
    acc_p = 0
    ecr = 0
    for i, aid in enumerate(sequence):
        a = model.action_map[aid]
        newly = []
        c = a.cost
        for cid in model.chains[a.cluster_id]:
            if cid in opened:
                break
            newly.append(cid)
            c = c + clusters[cid].combined_cost
        if newly:
            opened.update(newly)
            z.append(i)
        surv = 1 - acc_p
        if surv < 0:
            surv = 0 * surv
        costs.append(c)
        survival.append(surv)
        openings.append(tuple(reversed(newly)))
        ecr = ecr + c * surv
        acc_p = acc_p + a.repair_prob
    return PlanResult(sequence, tuple(z), ecr, tuple(costs), tuple(survival), tuple(openings))


def evaluate_plan(model: TroubleshootingModel, sequence: Sequence[str]) -> PlanResult:
    """Same result as :func:`evaluate_ecr`, through the compiled kernel when the model is float-valued."""
    from . import kernels

    sequence = tuple(sequence)
    if not (kernels.HAVE_COMPILED and kernels.is_float_model(model)):
        return evaluate_ecr(model, sequence)
    if len(set(sequence)) != len(sequence):
        _check_sequence(model, sequence)
    try:
        idx = model.packed.indices(sequence)
    except KeyError as exc:
        raise SequenceError(f"unknown action {exc.args[0]!r}") from None
    return evaluate_indices(model, idx, sequence)


def evaluate_indices(model: TroubleshootingModel, idx, sequence=None) -> PlanResult:
    """Kernel evaluation of a sequence given as action indices (no validation)."""
    from . import kernels

    arr = model.packed
    if sequence is None:
        sequence = kernels.ids_of(arr, idx)
    ecr, costs, surv, opened_at = kernels.backend().sequence_steps(
        idx, arr.cost, arr.prob, arr.cluster_of, arr.parent, arr.combined,
    )
    steps: dict[int, list[str]] = {}
    for k in (opened_at >= 0).nonzero()[0].tolist():
        steps.setdefault(int(opened_at[k]), []).append(arr.cluster_ids[k])
    chains = model.chains
    openings = [()] * len(sequence)
    for i, cids in steps.items():
        openings[i] = tuple(sorted(cids, key=lambda c: len(chains[c])))
    return PlanResult(
        tuple(sequence), tuple(sorted(steps)), float(ecr), tuple(costs.tolist()), tuple(surv.tolist()),
        tuple(openings),
    )


def ecr_by_evidence(model: TroubleshootingModel, sequence: Sequence[str]):
    """ECR accumulated by threading EvidenceState and summing P of the *unperformed* mass.

    Independent of :func:`evaluate_ecr`; used to cross-check it.
    """
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    ev = EvidenceState.initial(model)
    total_p = sum((a.repair_prob for a in model.actions), 0)
    remaining = total_p
    unexplained = 1 - total_p  # mass of faults no action addresses
    ecr = 0
    for aid in sequence:
        surv = remaining + unexplained
        ecr = ecr + conditional_cost(model, aid, ev) * (surv if surv > 0 else 0)
        ev = apply_action(ev, model, aid)
        remaining = remaining - model.action_map[aid].repair_prob
    return ecr


def ecr_decomposed(model: TroubleshootingModel, sequence: Sequence[str]):
    """Split ECR into ``(action_term, opening_term)``.

    The action term weighs plain action costs by survival; the opening term
    charges, at each opening index, the combined cost of all clusters that
    step opens.
    """
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    opened = {model.root_id}
    action_term = 0
    opening_term = 0
    acc_p = 0
    for aid in sequence:
        a = model.action_map[aid]
        surv = 1 - acc_p
        if surv < 0:
            surv = 0 * surv
        action_term = action_term + a.cost * surv
        charge = 0
        for cid in model.chains[a.cluster_id]:
            if cid in opened:
                break
            opened.add(cid)
            charge = charge + model.cluster_map[cid].combined_cost
        opening_term = opening_term + charge * surv
        acc_p = acc_p + a.repair_prob
    return action_term, opening_term


def subsequence_efficiency(
    model: TroubleshootingModel,
    sequence: Sequence[str],
    start: int,
    stop: int,
    evidence: Optional[EvidenceState] = None,
):
    """Summed repair probability over summed conditional cost of ``sequence[start:stop]``.

    ``evidence`` is the state just before ``sequence[start]``; by default it
    is obtained by performing ``sequence[:start]`` from the initial state.
    """
    if not 0 <= start < stop <= len(sequence):
        raise ValueError(f"empty or invalid range [{start}, {stop}) for sequence of length {len(sequence)}")
    if evidence is None:
        evidence = EvidenceState.initial(model)
        for aid in sequence[:start]:
            evidence = apply_action(evidence, model, aid)
    p_sum = 0
    c_sum = 0
    for aid in sequence[start:stop]:
        c_sum = c_sum + conditional_cost(model, aid, evidence)
        p_sum = p_sum + model.action_map[aid].repair_prob
        evidence = apply_action(evidence, model, aid)
    return p_sum / c_sum
