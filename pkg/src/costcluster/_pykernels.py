"""Pure numpy versions of the compiled kernels; same signatures, bit-identical results."""

from __future__ import annotations

import numpy as np


def sequence_steps(seq, cost, prob, cluster_of, parent, combined):
    m = len(seq)
    costs = np.empty(m)
    surv = np.empty(m)
    opened_at = np.full(len(combined), -1, dtype=np.int_)
    acc = 0.0
    ecr = 0.0
    for i in range(m):
        a = seq[i]
        c = cost[a]
        k = cluster_of[a]
        while parent[k] >= 0 and opened_at[k] < 0:
            c = c + combined[k]
            opened_at[k] = i
            k = parent[k]
        s = 1.0 - acc
        if s < 0:
            s = 0.0
        costs[i] = c
        surv[i] = s
        ecr = ecr + c * s
        acc = acc + prob[a]
    return float(ecr), costs, surv, opened_at


def _chains(cluster_of, parent):
    """(n_actions, depth) matrix of each action's non-root ancestor clusters, own cluster first; -1 padded."""
    L = len(parent)
    per_cluster = []
    for k in range(L):
        chain = []
        while parent[k] >= 0:
            chain.append(k)
            k = parent[k]
        per_cluster.append(chain)
    depth = max((len(c) for c in per_cluster), default=0)
    table = np.full((L, max(depth, 1)), -1, dtype=np.int_)
    for k, chain in enumerate(per_cluster):
        table[k, : len(chain)] = chain
    return table[np.asarray(cluster_of)]


def ecr_batch(perms, cost, prob, cluster_of, parent, combined):
    perms = np.asarray(perms)
    rows, m = perms.shape
    cost = np.asarray(cost)
    prob = np.asarray(prob)
    combined = np.asarray(combined)
    anc = _chains(cluster_of, parent)
    root = int(np.flatnonzero(np.asarray(parent) < 0)[0])
    opened = np.zeros((rows, len(combined)), dtype=bool)
    opened[:, root] = True
    idx = np.arange(rows)
    acc = np.zeros(rows)
    ecr = np.zeros(rows)
    for i in range(m):
        a = perms[:, i]
        c = cost[a]
        for d in range(anc.shape[1]):
            k = anc[a, d]
            valid = k >= 0
            kk = np.where(valid, k, root)
            closed = valid & ~opened[idx, kk]
            c = np.where(closed, c + combined[kk], c)
            opened[idx, kk] |= valid
        s = 1.0 - acc
        s = np.where(s < 0, 0.0, s)
        ecr = ecr + c * s
        acc = acc + prob[a]
    return ecr


def walk_trials(u, cum_prob, step_cost):
    u = np.asarray(u)
    cum_prob = np.asarray(cum_prob)
    step_cost = np.asarray(step_cost)
    m = len(step_cost)
    k = np.searchsorted(cum_prob, u, side="right")
    solved = k < m
    cumcost = np.cumsum(step_cost)
    costs = cumcost[np.minimum(k, m - 1)]
    return costs, solved
