"""Wall-time benchmark of the tree planner on synthetic models, compiled vs pure Python."""

from __future__ import annotations

import copy
import gc
import time
from dataclasses import dataclass
from functools import cached_property

from . import kernels
from .generate import random_model
from .model import TroubleshootingModel
from .tree import plan_tree


@dataclass(frozen=True)
class BenchRow:
    n: int
    clusters: int
    backend: str
    seconds: float
    ecr: float


def _cached_names(cls):
    return [k for k, v in vars(cls).items() if isinstance(v, cached_property)]


_CACHED = _cached_names(TroubleshootingModel)


def uncached(model: TroubleshootingModel) -> TroubleshootingModel:
    """Shallow copy with derived structure (chains, packed arrays, ...) dropped, so timing includes it."""
    fresh = copy.copy(model)
    for name in _CACHED:
        fresh.__dict__.pop(name, None)
    return fresh


def _timed(model, backend):
    m = uncached(model)
    gc_was_on = gc.isenabled()
    gc.disable()  # as timeit does: collector pauses would swamp the planner
    try:
        t0 = time.perf_counter()
        result = plan_tree(m, backend=backend)
        return time.perf_counter() - t0, result
    finally:
        if gc_was_on:
            gc.enable()


def time_plan(model: TroubleshootingModel, backend: str | None = None, repeats: int = 3):
    """Best-of-``repeats`` wall time of planning a fresh copy of ``model``; returns (seconds, result)."""
    best = float("inf")
    result = None
    for _ in range(max(1, repeats)):
        secs, result = _timed(model, backend)
        best = min(best, secs)
    return best, result


def scaling_ratio(small: TroubleshootingModel, large: TroubleshootingModel, rounds: int = 7, backend=None):
    """Best times of both models, measured in alternation so drift hits both alike.

    Returns ``(t_small, t_large, t_large / t_small)``.
    """
    ts = tl = float("inf")
    for _ in range(max(1, rounds)):
        ts = min(ts, _timed(small, backend)[0])
        tl = min(tl, _timed(large, backend)[0])
    return ts, tl, tl / ts


def default_clusters(n: int) -> int:
    """Total cluster count (root included) used when none is given."""
    return max(1, n // 100)


def run_bench(sizes, seed=0, clusters=None, backends=None, repeats: int = 3) -> list[BenchRow]:
    """One row per (size, backend). ``clusters`` is the total cluster count, root included."""
    sizes = list(sizes)
    if any(n < 2 for n in sizes):
        raise ValueError("benchmark sizes must be at least 2")
    if backends is None:
        backends = ["compiled", "python"] if kernels.HAVE_COMPILED else ["python"]
    rows = []
    for n in sizes:
        ell = default_clusters(n) if clusters is None else clusters
        model = random_model(seed, n_actions=n, n_clusters=ell - 1)
        for b in backends:
            secs, res = time_plan(model, b, repeats)
            rows.append(BenchRow(n, ell, b, secs, res.ecr))
    return rows
