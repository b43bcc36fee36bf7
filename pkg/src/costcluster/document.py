"""Model documents: the JSON form of a model and its conversion to/from TroubleshootingModel.

Layout::

    {
      "clusters": [{"id": "root"},
                   {"id": "K1", "parent": "root", "open_cost": 1.5, "close_cost": 0.5}],
      "actions":  [{"id": "a1", "cluster": "root", "cost": 1, "p": 0.3}, ...],
      "faults":   [{"id": "f1", "prior": 0.6}, ...]          # optional
    }

With a ``faults`` list, every action carries ``"success": {fault_id: prob}``
instead of ``"p"``. Mixing the two forms is rejected.
"""

from __future__ import annotations

import json
import numbers
from pathlib import Path
from typing import Any, Mapping

from .model import (
    PROB_TOL,
    Action,
    ClusterNode,
    FaultSpec,
    ModelError,
    TroubleshootingModel,
    exact_number,
    make_model,
)

CLUSTER_FIELDS = {"id", "parent", "open_cost", "close_cost"}
ACTION_FIELDS = {"id", "cluster", "cost", "p", "success"}
FAULT_FIELDS = {"id", "prior"}
TOP_FIELDS = {"clusters", "actions", "faults"}


def _num(value, issues, code, ident, exact):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        issues.append((code, ident, f"expected a number, got {value!r}"))
        return None
    return exact_number(value) if exact else value


def _clamp(p):
    if -PROB_TOL <= p < 0:
        return type(p)(0)
    if 1 < p <= 1 + PROB_TOL:
        return type(p)(1)
    return p


def _check_fields(obj, allowed, where, ident, issues, strict):
    if not isinstance(obj, Mapping):
        issues.append(("type", ident, f"{where} entry must be an object"))
        return False
    extra = set(obj) - allowed
    if extra and strict:
        issues.append(("unknown_field", ident, f"{where} has unknown field(s) {sorted(extra)}"))
    return True


def build_model(document: Mapping[str, Any], *, strict: bool = True, exact: bool = False) -> TroubleshootingModel:
    """Validate a parsed model document and build the model.

    Structural problems are collected and raised together as one
    :class:`ModelError`; no partially built model is ever returned.
    ``exact=True`` turns every number into a Fraction of its decimal form.
    """
    issues: list = []
    if not isinstance(document, Mapping):
        raise ModelError([("type", None, "document must be an object")])
    extra = set(document) - TOP_FIELDS
    if extra and strict:
        issues.append(("unknown_field", None, f"unknown top-level field(s) {sorted(extra)}"))
    for key in ("clusters", "actions"):
        if not isinstance(document.get(key), list):
            issues.append(("missing", None, f"{key!r} must be a list"))
    if issues:
        raise ModelError(issues)

    clusters = []
    for i, raw in enumerate(document["clusters"]):
        ident = raw.get("id", f"clusters[{i}]") if isinstance(raw, Mapping) else f"clusters[{i}]"
        if not _check_fields(raw, CLUSTER_FIELDS, "cluster", ident, issues, strict):
            continue
        if not isinstance(raw.get("id"), str):
            issues.append(("missing", ident, "cluster needs a string 'id'"))
            continue
        parent = raw.get("parent")
        if parent is not None and not isinstance(parent, str):
            issues.append(("type", ident, "parent must be a string id"))
            continue
        oc = _num(raw.get("open_cost", 0), issues, "cluster_cost", ident, exact)
        cc = _num(raw.get("close_cost", 0), issues, "cluster_cost", ident, exact)
        if oc is None or cc is None:
            continue
        clusters.append(ClusterNode(raw["id"], parent, oc, cc))

    faults_raw = document.get("faults")
    has_faults = faults_raw is not None
    faults = []
    if has_faults:
        if not isinstance(faults_raw, list) or not faults_raw:
            issues.append(("missing", None, "'faults' must be a non-empty list"))
        else:
            for i, raw in enumerate(faults_raw):
                ident = raw.get("id", f"faults[{i}]") if isinstance(raw, Mapping) else f"faults[{i}]"
                if not _check_fields(raw, FAULT_FIELDS, "fault", ident, issues, strict):
                    continue
                if not isinstance(raw.get("id"), str):
                    issues.append(("missing", ident, "fault needs a string 'id'"))
                    continue
                prior = _num(raw.get("prior"), issues, "prior", ident, exact)
                if prior is not None:
                    faults.append(FaultSpec(raw["id"], _clamp(prior)))

    actions = []
    success: dict[str, dict[str, Any]] = {}
    for i, raw in enumerate(document["actions"]):
        ident = raw.get("id", f"actions[{i}]") if isinstance(raw, Mapping) else f"actions[{i}]"
        if not _check_fields(raw, ACTION_FIELDS, "action", ident, issues, strict):
            continue
        if not isinstance(raw.get("id"), str) or not isinstance(raw.get("cluster"), str):
            issues.append(("missing", ident, "action needs string 'id' and 'cluster'"))
            continue
        cost = _num(raw.get("cost"), issues, "action_cost", ident, exact)
        if has_faults:
            if "p" in raw:
                issues.append(("mixed_form", ident, "use 'success' rows, not 'p', when faults are given"))
                continue
            row = raw.get("success", {})
            if not isinstance(row, Mapping):
                issues.append(("type", ident, "'success' must map fault ids to probabilities"))
                continue
            clean = {}
            for fid, v in row.items():
                v = _num(v, issues, "success", f"{ident}/{fid}", exact)
                if v is not None:
                    clean[fid] = _clamp(v)
            success[raw["id"]] = clean
            p = 0
        else:
            if "success" in raw:
                issues.append(("mixed_form", ident, "'success' rows require a 'faults' list"))
                continue
            if "p" not in raw:
                issues.append(("missing", ident, "action needs 'p'"))
                continue
            p = _num(raw["p"], issues, "probability", ident, exact)
            if p is None:
                continue
            p = _clamp(p)
        if cost is None:
            continue
        actions.append(Action(raw["id"], cost, p, raw["cluster"]))

    if issues:
        raise ModelError(issues)
    if has_faults:
        return make_model(clusters, actions, faults, success)
    return make_model(clusters, actions)


def _plain(x):
    if isinstance(x, numbers.Integral):
        return int(x)
    return float(x)


def to_document(model: TroubleshootingModel) -> dict[str, Any]:
    """Inverse of :func:`build_model` (numbers are emitted as JSON floats/ints)."""
    clusters = []
    for c in model.clusters:
        entry: dict[str, Any] = {"id": c.cluster_id}
        if c.parent is not None:
            entry["parent"] = c.parent
            entry["open_cost"] = _plain(c.open_cost)
            entry["close_cost"] = _plain(c.close_cost)
        clusters.append(entry)
    actions = []
    for a in model.actions:
        entry = {"id": a.action_id, "cluster": a.cluster_id, "cost": _plain(a.cost)}
        if model.has_fault_layer:
            entry["success"] = {f: _plain(v) for f, v in model.success.get(a.action_id, {}).items()}
        else:
            entry["p"] = _plain(a.repair_prob)
        actions.append(entry)
    doc: dict[str, Any] = {"clusters": clusters, "actions": actions}
    if model.has_fault_layer:
        doc["faults"] = [{"id": f.fault_id, "prior": _plain(f.prior)} for f in model.faults]
    return doc


def load_model(path, *, strict: bool = True, exact: bool = False) -> TroubleshootingModel:
    text = Path(path).read_text(encoding="utf-8")
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError([("syntax", None, f"{path}: {exc}")]) from None
    return build_model(document, strict=strict, exact=exact)


def dump_model(model: TroubleshootingModel, path) -> None:
    Path(path).write_text(json.dumps(to_document(model), indent=2) + "\n", encoding="utf-8")


EXAMPLE_1 = {
    "clusters": [
        {"id": "Ka"},
        {"id": "Kb", "parent": "Ka", "open_cost": 1, "close_cost": 1},
        {"id": "Kg", "parent": "Ka", "open_cost": 0.5, "close_cost": 0.5},
    ],
    "actions": [
        {"id": "a1", "cluster": "Ka", "cost": 1, "p": 0.14},
        {"id": "a2", "cluster": "Ka", "cost": 1, "p": 0.11},
        {"id": "b1", "cluster": "Kb", "cost": 1, "p": 0.20},
        {"id": "b2", "cluster": "Kb", "cost": 1, "p": 0.10},
        {"id": "g1", "cluster": "Kg", "cost": 1, "p": 0.25},
        {"id": "g2", "cluster": "Kg", "cost": 1, "p": 0.20},
    ],
}
"""Three-cluster reference model: root Ka, children Kb (combined cost 2) and Kg (combined cost 1)."""
