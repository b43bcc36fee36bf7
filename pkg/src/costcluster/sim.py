"""Monte Carlo troubleshooting sessions.

Each trial draws which step (if any) solves the problem from the mutually
exclusive outcomes ``(P_1, ..., P_n, 1 - sum P)`` and pays conditional costs
up to and including that step. An unsolved trial pays the full sunk cost.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .ecr import _check_sequence


@dataclass(frozen=True)
class SimulationSummary:
    trials: int
    mean_cost: float
    std_error: float
    solve_rate: float
    seed: Optional[int]


def _step_costs(model, sequence):
    # kept independent of the evaluator on purpose
    opened = {model.root_id}
    out = []
    for aid in sequence:
        a = model.action_map[aid]
        c = float(a.cost)
        cid = a.cluster_id
        while cid not in opened:
            node = model.cluster_map[cid]
            c += float(node.open_cost) + float(node.close_cost)
            opened.add(cid)
            cid = node.parent
        out.append(c)
    return out


def simulate_once(model, sequence: Sequence[str], random_source) -> tuple[float, bool]:
    """One session. ``random_source`` is a ``random.Random`` or numpy Generator (anything with ``.random()``)."""
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    u = random_source.random()
    cost = 0.0
    acc = 0.0
    for aid, c in zip(sequence, _step_costs(model, sequence)):
        cost += c
        acc += float(model.action_map[aid].repair_prob)
        if u < acc:
            return cost, True
    return cost, False


def _run(u, cum, steps, backend):
    return kernels.backend(backend).walk_trials(u, cum, steps)


def estimate_ecr(
    model,
    sequence: Sequence[str],
    trials: int,
    seed: Optional[int] = None,
    workers: int = 1,
    backend: Optional[str] = None,
) -> SimulationSummary:
    """Mean session cost over ``trials`` independent sessions.

    With ``workers == 1`` one stream from ``seed`` drives every trial, so the
    result is bit-identical for fixed arguments. With more workers each chunk
    gets a child seed spawned from ``seed``; results then agree with the
    serial run in distribution only.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sequence = tuple(sequence)
    _check_sequence(model, sequence)
    steps = np.asarray(_step_costs(model, sequence), dtype=np.float64)
    cum = np.cumsum([float(model.action_map[a].repair_prob) for a in sequence], dtype=np.float64)

    if workers <= 1:
        u = np.random.default_rng(seed).random(trials)
        costs, solved = _run(u, cum, steps, backend)
    else:
        children = np.random.SeedSequence(seed).spawn(workers)
        sizes = [trials // workers + (i < trials % workers) for i in range(workers)]
        jobs = [(np.random.default_rng(s).random(k), cum, steps, backend) for s, k in zip(children, sizes) if k]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda j: _run(*j), jobs))
        costs = np.concatenate([p[0] for p in parts])
        solved = np.concatenate([p[1] for p in parts])

    mean = float(costs.mean())
    se = float(costs.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return SimulationSummary(trials, mean, se, float(np.count_nonzero(solved) / trials), seed)
