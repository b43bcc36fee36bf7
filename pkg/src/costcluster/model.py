"""Troubleshooting model: actions, a rooted tree of cost clusters, optional fault layer.

Numbers may be ``float``/``int`` or :class:`fractions.Fraction`. Every routine
in the package only uses ``+ - * /`` and comparisons on them, so a model built
with ``exact=True`` is evaluated and planned in exact rational arithmetic.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

PROB_TOL = 1e-9

Number = numbers.Real


class ModelError(ValueError):
    """A model failed validation.

    ``issues`` holds ``(code, offending_id, message)`` triples; all problems
    found in one pass are reported together.
    """

    def __init__(self, issues: Sequence[tuple[str, Optional[str], str]]):
        self.issues = list(issues)
        lines = [f"[{code}] {ident}: {msg}" if ident is not None else f"[{code}] {msg}"
                 for code, ident, msg in self.issues]
        super().__init__("invalid model:\n  " + "\n  ".join(lines))


class IndependenceError(ModelError):
    """A fault is addressed by more than one action."""


@dataclass(frozen=True)
class FaultSpec:
    fault_id: str
    prior: Number


@dataclass(frozen=True)
class Action:
    action_id: str
    cost: Number
    repair_prob: Number
    cluster_id: str

    @property
    def efficiency(self):
        return self.repair_prob / self.cost


@dataclass(frozen=True)
class ClusterNode:
    cluster_id: str
    parent: Optional[str] = None
    open_cost: Number = 0
    close_cost: Number = 0

    @property
    def combined_cost(self):
        return self.open_cost + self.close_cost

    @property
    def is_root(self) -> bool:
        return self.parent is None


def _clamp_prob(value, ident, issues, code="probability"):
    if not isinstance(value, numbers.Real) or value != value:
        issues.append((code, ident, f"not a real number: {value!r}"))
        return value
    if value < -PROB_TOL or value > 1 + PROB_TOL:
        issues.append((code, ident, f"{value} outside [0, 1]"))
        return value
    if value < 0:
        return type(value)(0)
    if value > 1:
        return type(value)(1)
    return value


def repair_probabilities(
    faults: Sequence[FaultSpec],
    success: Mapping[str, Mapping[str, Number]],
) -> dict[str, Number]:
    """Repair probability of every action under the single-fault assumption.

    ``success[action_id][fault_id]`` is P(action fixes the problem | fault);
    missing entries are zero. Returns ``P_a = sum_f success[a][f] * P(f)``.
    """
    issues: list = []
    priors: dict[str, Number] = {}
    for f in faults:
        if f.fault_id in priors:
            issues.append(("duplicate_fault", f.fault_id, "fault id used twice"))
        priors[f.fault_id] = _clamp_prob(f.prior, f.fault_id, issues, "prior")
    if issues:
        raise ModelError(issues)
    total = sum(priors.values())
    if abs(total - 1) > PROB_TOL:
        raise ModelError([("priors_not_normalized", None, f"fault priors sum to {total}, expected 1")])

    addressed_by: dict[str, str] = {}
    rows: dict[str, dict[str, Number]] = {}
    for action_id, row in success.items():
        clean = {}
        for fault_id, value in row.items():
            if fault_id not in priors:
                issues.append(("unknown_fault", action_id, f"success row names unknown fault {fault_id!r}"))
                continue
            value = _clamp_prob(value, f"{action_id}/{fault_id}", issues, "success")
            clean[fault_id] = value
            if value > 0:
                other = addressed_by.setdefault(fault_id, action_id)
                if other != action_id:
                    issues.append((
                        "independence", fault_id,
                        f"fault addressed by both {other!r} and {action_id!r}",
                    ))
        rows[action_id] = clean
    if any(code == "independence" for code, _, _ in issues):
        raise IndependenceError(issues)
    if issues:
        raise ModelError(issues)

    result = {}
    for action_id, clean in rows.items():
        acc = 0
        for fault_id, value in clean.items():
            acc = acc + value * priors[fault_id]
        result[action_id] = acc
    return result


@dataclass(frozen=True)
class TroubleshootingModel:
    """Immutable, validated model.

    ``clusters`` and ``actions`` keep document order. The fault layer
    (``faults`` + ``success``) is either fully present or absent.
    """

    clusters: tuple[ClusterNode, ...]
    actions: tuple[Action, ...]
    faults: tuple[FaultSpec, ...] = ()
    success: Mapping[str, Mapping[str, Number]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "clusters", tuple(self.clusters))
        object.__setattr__(self, "actions", tuple(self.actions))
        object.__setattr__(self, "faults", tuple(self.faults))
        self._validate()

    # -- validation -----------------------------------------------------

    def _validate(self):
        issues: list = []
        ids: dict[str, ClusterNode] = {}
        for c in self.clusters:
            if c.cluster_id in ids:
                issues.append(("duplicate_cluster", c.cluster_id, "cluster id used twice"))
            ids[c.cluster_id] = c
            for name in ("open_cost", "close_cost"):
                v = getattr(c, name)
                if not isinstance(v, numbers.Real) or v != v or v < 0:
                    issues.append(("cluster_cost", c.cluster_id, f"{name} must be a non-negative real, got {v!r}"))
        roots = [c for c in self.clusters if c.parent is None]
        if len(roots) != 1:
            issues.append(("root", None, f"expected exactly one root cluster, found {len(roots)}"))
        for r in roots:
            if isinstance(r.open_cost, numbers.Real) and isinstance(r.close_cost, numbers.Real):
                if r.open_cost != 0 or r.close_cost != 0:
                    issues.append(("root_cost", r.cluster_id, "root cluster must have zero open and close cost"))
        for c in self.clusters:
            if c.parent is not None and c.parent not in ids:
                issues.append(("dangling_parent", c.cluster_id, f"parent {c.parent!r} does not exist"))
        if not issues:
            for c in self.clusters:
                seen = {c.cluster_id}
                p = c.parent
                while p is not None:
                    if p in seen:
                        issues.append(("cycle", c.cluster_id, "parent links form a cycle"))
                        break
                    seen.add(p)
                    p = ids[p].parent

        action_ids: set[str] = set()
        total = 0
        # columnar copy gathered in the same pass; the kernels pack from it
        col_ids, col_cost, col_prob, col_cluster = [], [], [], []
        plain = (float, int)
        float_valued = all(type(c.open_cost) in plain and type(c.close_cost) in plain for c in self.clusters)
        for a in self.actions:
            col_ids.append(a.action_id)
            col_cost.append(a.cost)
            col_prob.append(a.repair_prob)
            col_cluster.append(a.cluster_id)
            if float_valued and not (type(a.cost) in plain and type(a.repair_prob) in plain):
                float_valued = False
            if a.action_id in action_ids:
                issues.append(("duplicate_action", a.action_id, "action id used twice"))
            action_ids.add(a.action_id)
            if a.cluster_id not in ids:
                issues.append(("dangling_cluster", a.action_id, f"cluster {a.cluster_id!r} does not exist"))
            if not isinstance(a.cost, numbers.Real) or a.cost != a.cost or a.cost <= 0:
                issues.append(("action_cost", a.action_id, f"cost must be positive, got {a.cost!r}"))
            if not isinstance(a.repair_prob, numbers.Real) or a.repair_prob != a.repair_prob or not (
                -PROB_TOL <= a.repair_prob <= 1 + PROB_TOL
            ):
                issues.append(("probability", a.action_id, f"repair_prob {a.repair_prob!r} outside [0, 1]"))
            else:
                total = total + a.repair_prob
        if isinstance(total, numbers.Real) and total > 1 + PROB_TOL:
            issues.append(("probability_sum", None, f"repair probabilities sum to {total} > 1 (single-fault assumption)"))

        if self.faults:
            for f in self.faults:
                if not isinstance(f.prior, numbers.Real) or not (-PROB_TOL <= f.prior <= 1 + PROB_TOL):
                    issues.append(("prior", f.fault_id, f"prior {f.prior!r} outside [0, 1]"))
            fault_ids = {f.fault_id for f in self.faults}
            addressed: dict[str, str] = {}
            for action_id, row in self.success.items():
                if action_id not in action_ids:
                    issues.append(("unknown_action", action_id, "success row for unknown action"))
                for fault_id, v in row.items():
                    if fault_id not in fault_ids:
                        issues.append(("unknown_fault", action_id, f"unknown fault {fault_id!r}"))
                    elif v > 0 and addressed.setdefault(fault_id, action_id) != action_id:
                        issues.append(("independence", fault_id, "fault addressed by more than one action"))
        if issues:
            raise ModelError(issues)
        object.__setattr__(self, "_columns", (col_ids, col_cost, col_prob, col_cluster))
        object.__setattr__(self, "_float_valued", float_valued)

    # -- structure ------------------------------------------------------

    @cached_property
    def cluster_map(self) -> dict[str, ClusterNode]:
        return {c.cluster_id: c for c in self.clusters}

    @cached_property
    def action_map(self) -> dict[str, Action]:
        return {a.action_id: a for a in self.actions}

    @cached_property
    def root_id(self) -> str:
        return next(c.cluster_id for c in self.clusters if c.parent is None)

    @cached_property
    def children(self) -> dict[str, tuple[str, ...]]:
        kids: dict[str, list[str]] = {c.cluster_id: [] for c in self.clusters}
        for c in self.clusters:
            if c.parent is not None:
                kids[c.parent].append(c.cluster_id)
        return {k: tuple(v) for k, v in kids.items()}

    @cached_property
    def members(self) -> dict[str, tuple[Action, ...]]:
        out: dict[str, list[Action]] = {c.cluster_id: [] for c in self.clusters}
        for a in self.actions:
            out[a.cluster_id].append(a)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def chains(self) -> dict[str, tuple[str, ...]]:
        """Cluster -> its non-root ancestors, itself first, walking up to the root."""
        out: dict[str, tuple[str, ...]] = {}
        for cid in self.preorder:
            node = self.cluster_map[cid]
            out[cid] = () if node.parent is None else (cid,) + out[node.parent]
        return out

    @cached_property
    def preorder(self) -> tuple[str, ...]:
        order = []
        stack = [self.root_id]
        while stack:
            cid = stack.pop()
            order.append(cid)
            stack.extend(reversed(self.children[cid]))
        return tuple(order)

    @cached_property
    def depth(self) -> int:
        """Longest root-to-cluster path length; 0 for a root-only model."""
        return max((len(ch) for ch in self.chains.values()), default=0)

    @cached_property
    def top_subtree(self) -> dict[str, str]:
        """Cluster -> the child of the root whose subtree holds it (root maps to itself)."""
        return {cid: (ch[-1] if ch else self.root_id) for cid, ch in self.chains.items()}

    def subtree(self, cluster_id: str) -> list[str]:
        out, stack = [], [cluster_id]
        while stack:
            cid = stack.pop()
            out.append(cid)
            stack.extend(self.children[cid])
        return out

    def combined_cost(self, cluster_id: str):
        return self.cluster_map[cluster_id].combined_cost

    @property
    def float_valued(self) -> bool:
        """Every number is a plain float/int (no Fractions)."""
        return self._float_valued

    @cached_property
    def packed(self):
        """Array view used by the compiled/numpy kernels."""
        from .kernels import pack

        return pack(self)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def has_fault_layer(self) -> bool:
        return bool(self.faults)


def exact_number(value):
    """Convert a float to the Fraction of its shortest decimal repr (0.1 -> 1/10)."""
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, numbers.Rational):
        return Fraction(value)
    return value


def make_model(
    clusters: Iterable[ClusterNode],
    actions: Iterable[Action],
    faults: Iterable[FaultSpec] = (),
    success: Optional[Mapping[str, Mapping[str, Number]]] = None,
) -> TroubleshootingModel:
    """Build a model; when a fault layer is given, repair probabilities are derived from it."""
    faults = tuple(faults)
    actions = tuple(actions)
    if faults:
        success = {a.action_id: dict((success or {}).get(a.action_id, {})) for a in actions}
        probs = repair_probabilities(faults, success)
        actions = tuple(
            Action(a.action_id, a.cost, probs[a.action_id], a.cluster_id) for a in actions
        )
        return TroubleshootingModel(tuple(clusters), actions, faults, success)
    return TroubleshootingModel(tuple(clusters), actions)
