# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels over packed model arrays (see costcluster.kernels.ModelArrays).

Entry ids in tree_order: atoms are 0..n-1, the compound for cluster c is n + c.
Priority is descending efficiency, then kind (compound before atom), then id rank.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int32_t
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()


cdef struct Node:
    # only the fields heap operations touch; 24 bytes
    double ef
    int32_t tie     # compounds 0..L-1 by cluster rank, then atoms L + action rank
    int32_t child
    int32_t sib
    int32_t pad


cdef struct SortItem:
    double ef
    int32_t tie
    int32_t id


cdef int _cmp_items(const void *pa, const void *pb) noexcept nogil:
    cdef const SortItem *a = <const SortItem *> pa
    cdef const SortItem *b = <const SortItem *> pb
    if a.ef > b.ef:
        return -1
    if a.ef < b.ef:
        return 1
    return (a.tie > b.tie) - (a.tie < b.tie)


cdef inline bint _before(Node *nd, int32_t a, int32_t b) nogil:
    if nd[a].ef != nd[b].ef:
        return nd[a].ef > nd[b].ef
    return nd[a].tie < nd[b].tie


cdef inline int32_t _link(Node *nd, int32_t a, int32_t b) nogil:
    cdef int32_t t
    if a < 0:
        return b
    if b < 0:
        return a
    if _before(nd, b, a):
        t = a
        a = b
        b = t
    nd[b].sib = nd[a].child
    nd[a].child = b
    return a


cdef int32_t _pop(Node *nd, int32_t *buf, int32_t root) nogil:
    """Remove root, return the new root (two-pass pairing)."""
    cdef Py_ssize_t m = 0, i, p
    cdef int32_t x, r
    x = nd[root].child
    nd[root].child = -1
    while x >= 0:
        buf[m] = x
        m += 1
        r = nd[x].sib
        nd[x].sib = -1
        x = r
    if m == 0:
        return -1
    i = 0
    p = 0
    while i + 1 < m:
        buf[p] = _link(nd, buf[i], buf[i + 1])
        p += 1
        i += 2
    if i < m:
        buf[p] = buf[i]
        p += 1
    r = buf[p - 1]
    i = p - 2
    while i >= 0:
        r = _link(nd, buf[i], r)
        i -= 1
    return r


def tree_order(
    double[::1] cost,
    double[::1] prob,
    long[::1] action_rank,
    long[::1] cluster_of,
    double[::1] combined,
    long[::1] cluster_rank,
    long[::1] post_order,
    long[::1] child_start,
    long[::1] child_list,
):
    """Bottom-up absorption followed by unfolding; returns action indices in plan order.

    Internally atoms are renumbered so each cluster's members sit in one
    contiguous run sorted by priority; that run is the cluster's initial
    queue (a sorted path is a valid pairing heap).
    ``post_order`` lists clusters children-before-parent, root last;
    ``child_list[child_start[c]:child_start[c + 1]]`` are the children of c.
    """
    cdef Py_ssize_t n = cost.shape[0]
    cdef Py_ssize_t L = combined.shape[0]
    cdef Py_ssize_t E = n + L
    if E >= 2**31 - 1:
        raise OverflowError("model too large for 32-bit entry ids")
    out_a = np.empty(n, dtype=np.int_)
    cdef long[::1] out = out_a
    cdef Node *nd = <Node *> malloc(E * sizeof(Node))
    cdef SortItem *items = <SortItem *> malloc(E * sizeof(SortItem))
    cdef int32_t *buf = <int32_t *> malloc((E + 1) * sizeof(int32_t))
    cdef int32_t *nxt = <int32_t *> malloc(E * sizeof(int32_t))  # next item inside the enclosing compound
    cdef double *tp = <double *> malloc(E * sizeof(double))
    cdef double *tc = <double *> malloc(E * sizeof(double))
    cdef int32_t *orig = <int32_t *> malloc((n + 1) * sizeof(int32_t))
    cdef int32_t *heap = <int32_t *> malloc((L + 1) * sizeof(int32_t))
    cdef int32_t *stack = <int32_t *> malloc((L + 1) * sizeof(int32_t))
    cdef int32_t *tail = <int32_t *> malloc((L + 1) * sizeof(int32_t))
    cdef int32_t *head = <int32_t *> malloc((L + 1) * sizeof(int32_t))  # first item of each compound
    cdef Py_ssize_t *start = <Py_ssize_t *> malloc((L + 1) * sizeof(Py_ssize_t))
    cdef void *blocks[12]
    blocks[:] = [nd, items, buf, nxt, tp, tc, orig, heap, stack, tail, head, start]

    cdef Py_ssize_t i, j, pos, top
    cdef int32_t c, kid, e, r, last, comp, k
    cdef long cnt
    cdef double sp, sc
    try:
        for i in range(12):
            if blocks[i] == NULL:
                raise MemoryError()
        with nogil:
            # group atoms by cluster (counting sort), then sort each group by priority
            for j in range(L + 1):
                start[j] = 0
            for i in range(n):
                start[cluster_of[i] + 1] += 1
            for j in range(L):
                start[j + 1] += start[j]
                tail[j] = <int32_t> start[j]
            for i in range(n):
                c = <int32_t> cluster_of[i]
                k = tail[c]
                tail[c] += 1
                items[k].ef = prob[i] / cost[i]
                items[k].tie = <int32_t> (L + action_rank[i])
                items[k].id = <int32_t> i
            for j in range(L):
                heap[j] = -1
                if start[j + 1] > start[j]:
                    qsort(&items[start[j]], start[j + 1] - start[j], sizeof(SortItem), _cmp_items)
                    heap[j] = <int32_t> start[j]
            for i in range(n):
                e = items[i].id
                orig[i] = e
                nd[i].ef = items[i].ef
                nd[i].tie = items[i].tie
                nd[i].sib = -1
                nd[i].child = -1
                nxt[i] = -1
                tp[i] = prob[e]
                tc[i] = cost[e]
            for j in range(L):
                for i in range(start[j], start[j + 1] - 1):
                    nd[i].child = <int32_t> (i + 1)

            for j in range(L):
                c = <int32_t> post_order[j]
                for i in range(child_start[c], child_start[c + 1]):
                    kid = <int32_t> child_list[i]
                    r = heap[kid]
                    if r < 0:
                        continue
                    comp = <int32_t> (n + kid)
                    sp = 0.0
                    sc = combined[kid]
                    cnt = 0
                    last = -1
                    while r >= 0:
                        if cnt > 0 and nd[r].ef < sp / sc:
                            break
                        e = r
                        r = _pop(nd, buf, e)
                        if last < 0:
                            head[kid] = e
                        else:
                            nxt[last] = e
                        last = e
                        sp = sp + tp[e]
                        sc = sc + tc[e]
                        cnt += 1
                    nxt[last] = -1
                    tp[comp] = sp
                    tc[comp] = sc
                    nd[comp].ef = sp / sc
                    nd[comp].tie = <int32_t> cluster_rank[kid]
                    nd[comp].child = -1
                    nd[comp].sib = -1
                    nxt[comp] = -1
                    heap[c] = _link(nd, heap[c], comp)
                    heap[c] = _link(nd, heap[c], r)
                    heap[kid] = -1

            # Keys are unique, so popping the root queue dry equals sorting its entries.
            cnt = 0
            top = 0
            r = heap[post_order[L - 1]]
            if r >= 0:
                buf[0] = r
                top = 1
            while top > 0:
                top -= 1
                e = buf[top]
                items[cnt].ef = nd[e].ef
                items[cnt].tie = nd[e].tie
                items[cnt].id = e
                cnt += 1
                if nd[e].child >= 0:
                    buf[top] = nd[e].child
                    top += 1
                if nd[e].sib >= 0:
                    buf[top] = nd[e].sib
                    top += 1
            qsort(items, cnt, sizeof(SortItem), _cmp_items)

            pos = 0
            for j in range(cnt):
                e = items[j].id
                if e < n:
                    out[pos] = orig[e]
                    pos += 1
                    continue
                top = 0
                stack[0] = head[e - n]
                while top >= 0:
                    k = stack[top]
                    if k < 0:
                        top -= 1
                        continue
                    stack[top] = nxt[k]
                    if k < n:
                        out[pos] = orig[k]
                        pos += 1
                    else:
                        top += 1
                        stack[top] = head[k - n]
    finally:
        for i in range(12):
            free(blocks[i])
    return out_a[:pos]


def sequence_steps(
    long[::1] seq,
    double[::1] cost,
    double[::1] prob,
    long[::1] cluster_of,
    long[::1] parent,
    double[::1] combined,
):
    """Per-step conditional cost and survival, plus the step that opened each cluster (-1 if none)."""
    cdef long m = seq.shape[0]
    cdef long L = combined.shape[0]
    costs_a = np.empty(m, dtype=np.float64)
    surv_a = np.empty(m, dtype=np.float64)
    opened_a = np.full(L, -1, dtype=np.int_)
    cdef double[::1] costs = costs_a
    cdef double[::1] surv = surv_a
    cdef long[::1] opened_at = opened_a
    cdef long i, a, k
    cdef double acc = 0.0, c, s, ecr = 0.0
    with nogil:
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
    return ecr, costs_a, surv_a, opened_a


def ecr_batch(
    long[:, ::1] perms,
    double[::1] cost,
    double[::1] prob,
    long[::1] cluster_of,
    long[::1] parent,
    double[::1] combined,
):
    """ECR of every row of ``perms`` (rows are sequences of action indices)."""
    cdef long rows = perms.shape[0]
    cdef long m = perms.shape[1]
    cdef long L = combined.shape[0]
    out_a = np.empty(rows, dtype=np.float64)
    stamp_a = np.full(L, -1, dtype=np.int_)
    cdef double[::1] out = out_a
    cdef long[::1] stamp = stamp_a
    cdef long r, i, a, k
    cdef double acc, c, s, ecr
    with nogil:
        for r in range(rows):
            acc = 0.0
            ecr = 0.0
            for i in range(m):
                a = perms[r, i]
                c = cost[a]
                k = cluster_of[a]
                while parent[k] >= 0 and stamp[k] != r:
                    c = c + combined[k]
                    stamp[k] = r
                    k = parent[k]
                s = 1.0 - acc
                if s < 0:
                    s = 0.0
                ecr = ecr + c * s
                acc = acc + prob[a]
            out[r] = ecr
    return out_a


def walk_trials(double[::1] u, double[::1] cum_prob, double[::1] step_cost):
    """Cost and solved flag of each trial: walk steps until ``u < cum_prob[i]``."""
    cdef long t = u.shape[0]
    cdef long m = step_cost.shape[0]
    costs_a = np.empty(t, dtype=np.float64)
    solved_a = np.zeros(t, dtype=np.bool_)
    cdef double[::1] costs = costs_a
    cdef cnp.npy_bool[::1] solved = solved_a
    cdef long j, i
    cdef double acc, x
    with nogil:
        for j in range(t):
            x = u[j]
            acc = 0.0
            for i in range(m):
                acc = acc + step_cost[i]
                if x < cum_prob[i]:
                    solved[j] = 1
                    break
            costs[j] = acc
    return costs_a, solved_a
