"""Backend selection for the array kernels.

The Cython extension ``_ckernels`` is used when it was built; otherwise the
numpy fallback in ``_pykernels``. Set ``COSTCLUSTER_PURE=1`` to force the
fallback. Kernels only handle float models; exact (Fraction) models always
take the pure-Python reference paths.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from functools import cached_property
from operator import itemgetter

import numpy as np

from . import _pykernels

log = logging.getLogger(__name__)

try:
    if os.environ.get("COSTCLUSTER_PURE"):
        raise ImportError("COSTCLUSTER_PURE is set")
    from . import _ckernels
except ImportError as exc:
    log.debug("compiled kernels unavailable (%s); using numpy fallback", exc)
    _ckernels = None

HAVE_COMPILED = _ckernels is not None
BACKEND = "compiled" if HAVE_COMPILED else "python"


def backend(name: str | None = None):
    """Kernel module by name: ``"compiled"``, ``"python"``, or None for the default."""
    if name is None:
        return _ckernels if HAVE_COMPILED else _pykernels
    if name == "python":
        return _pykernels
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernels are not built; reinstall with Cython available")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class ModelArrays:
    """Index-based view of a model. Action/cluster indices follow model order."""

    action_ids: tuple[str, ...]
    cluster_ids: tuple[str, ...]
    cost: np.ndarray
    prob: np.ndarray
    cluster_of: np.ndarray
    parent: np.ndarray
    combined: np.ndarray
    action_rank: np.ndarray
    cluster_rank: np.ndarray

    @cached_property
    def index(self) -> dict:
        return {aid: i for i, aid in enumerate(self.action_ids)}

    def indices(self, sequence) -> np.ndarray:
        return np.fromiter((self.index[a] for a in sequence), dtype=np.int_, count=len(sequence))


def is_float_model(model) -> bool:
    """True when every number is a plain float/int (kernels would round Fractions)."""
    return model.float_valued


def _rank(ids):
    r = np.empty(len(ids), dtype=np.int_)
    r[sorted(range(len(ids)), key=ids.__getitem__)] = np.arange(len(ids))
    return r


def pack(model) -> ModelArrays:
    ids, cost, prob, clus = model._columns
    action_ids = tuple(ids)
    cluster_ids = tuple(c.cluster_id for c in model.clusters)
    cidx = {cid: i for i, cid in enumerate(cluster_ids)}
    return ModelArrays(
        action_ids,
        cluster_ids,
        np.array(cost, dtype=np.float64),
        np.array(prob, dtype=np.float64),
        np.array([cidx[c] for c in clus], dtype=np.int_),
        np.array([-1 if c.parent is None else cidx[c.parent] for c in model.clusters], dtype=np.int_),
        np.array([float(c.combined_cost) for c in model.clusters], dtype=np.float64),
        _rank(action_ids),
        _rank(cluster_ids),
    )


def tree_order_arrays(model, arrays: ModelArrays | None = None) -> np.ndarray:
    """Compiled bottom-up planner order as action indices (requires the extension)."""
    impl = backend("compiled")
    arr = arrays or model.packed
    L = len(arr.cluster_ids)
    cidx = {cid: i for i, cid in enumerate(arr.cluster_ids)}
    post = np.array([cidx[c] for c in reversed(model.preorder)], dtype=np.int_)
    # children grouped by parent
    kids = np.flatnonzero(arr.parent >= 0)
    kids = kids[np.argsort(arr.parent[kids], kind="stable")]
    child_start = np.zeros(L + 1, dtype=np.int_)
    np.cumsum(np.bincount(arr.parent[kids], minlength=L), out=child_start[1:])
    return impl.tree_order(
        arr.cost, arr.prob, arr.action_rank, arr.cluster_of, arr.combined,
        arr.cluster_rank, post, child_start, kids.astype(np.int_),
    )


def ids_of(arrays: ModelArrays, order) -> tuple[str, ...]:
    if len(order) == 0:
        return ()
    if len(order) == 1:
        return (arrays.action_ids[int(order[0])],)
    return itemgetter(*order.tolist())(arrays.action_ids)
