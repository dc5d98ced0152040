"""Pure-Python reference kernels.

Every function here has a twin in ``_kernels.pyx`` with the same signature and
the same random-number consumption: one ``rng.random()`` per coin flip, coins
flipped in FIFO/CSR order, and only for edges with ``0 < p < 1`` whose target
is not yet marked. Given equal generator states, both backends return equal
arrays.
"""
from __future__ import annotations

from collections import deque

import numpy as np

NAME = "python"


def _reach(ptr, idx, p, seeds, mark, stamp, umark, ustamp, counted, rnd):
    """BFS over one live-edge draw. Returns newly covered, counted nodes."""
    gained = 0
    queue = deque()
    for s in seeds:
        if mark[s] != stamp:
            mark[s] = stamp
            queue.append(s)
            if umark[s] != ustamp:
                umark[s] = ustamp
                gained += counted[s]
    while queue:
        u = queue.popleft()
        for e in range(ptr[u], ptr[u + 1]):
            v = idx[e]
            if mark[v] == stamp:
                continue
            pe = p[e]
            if pe <= 0.0:
                continue
            if pe < 1.0 and rnd() >= pe:
                continue
            mark[v] = stamp
            queue.append(v)
            if umark[v] != ustamp:
                umark[v] = ustamp
                gained += counted[v]
    return gained


def mc_cumulative(out_ptr, out_idx, out_p, seed_ptr, seed_idx, counted, r, rng):
    """Cumulative counted-union size after each round, for ``r`` joint draws."""
    n = len(out_ptr) - 1
    T = len(seed_ptr) - 1
    ptr, idx, p = out_ptr.tolist(), out_idx.tolist(), out_p.tolist()
    cnt = counted.tolist()
    rounds = [seed_idx[seed_ptr[t]:seed_ptr[t + 1]].tolist() for t in range(T)]
    mark = [-1] * n
    umark = [-1] * n
    res = np.zeros((r, T), dtype=np.int64)
    rnd = rng.random
    stamp = 0
    for s in range(r):
        total = 0
        for t in range(T):
            total += _reach(ptr, idx, p, rounds[t], mark, stamp, umark, s, cnt, rnd)
            stamp += 1
            res[s, t] = total
    return res


def mc_marginal(out_ptr, out_idx, out_p, seed_ptr, seed_idx, cand, cand_round, counted, r, rng):
    """Per-draw gain of adding ``(cand, cand_round)`` to the schedule.

    Round ``cand_round`` is expanded from its seeds first; after all rounds
    are in the union, the same round's live-edge draw is extended from
    ``cand``. Nodes newly reached and not already in the union are counted.
    """
    n = len(out_ptr) - 1
    T = len(seed_ptr) - 1
    ptr, idx, p = out_ptr.tolist(), out_idx.tolist(), out_p.tolist()
    cnt = counted.tolist()
    rounds = [seed_idx[seed_ptr[t]:seed_ptr[t + 1]].tolist() for t in range(T)]
    mark = [-1] * n
    tmark = [-1] * n
    umark = [-1] * n
    res = np.zeros(r, dtype=np.int64)
    rnd = rng.random
    stamp = 0
    for s in range(r):
        for t in range(T):
            if t == cand_round:
                _reach(ptr, idx, p, rounds[t], tmark, s, umark, s, cnt, rnd)
            else:
                _reach(ptr, idx, p, rounds[t], mark, stamp, umark, s, cnt, rnd)
                stamp += 1
        res[s] = _reach(ptr, idx, p, (cand,), tmark, s, umark, s, cnt, rnd)
    return res


def reach_once(out_ptr, out_idx, out_p, seeds, rng):
    """One forward diffusion. Returns (nodes in BFS order, BFS depth of each)."""
    n = len(out_ptr) - 1
    ptr, idx, p = out_ptr.tolist(), out_idx.tolist(), out_p.tolist()
    depth = [-1] * n
    order = []
    queue = deque()
    for s in seeds.tolist():
        if depth[s] < 0:
            depth[s] = 0
            order.append(s)
            queue.append(s)
    rnd = rng.random
    while queue:
        u = queue.popleft()
        du = depth[u] + 1
        for e in range(ptr[u], ptr[u + 1]):
            v = idx[e]
            if depth[v] >= 0:
                continue
            pe = p[e]
            if pe <= 0.0:
                continue
            if pe < 1.0 and rnd() >= pe:
                continue
            depth[v] = du
            order.append(v)
            queue.append(v)
    nodes = np.array(order, dtype=np.int64)
    return nodes, np.array([depth[v] for v in order], dtype=np.int64)


def rr_sets(in_ptr, in_idx, in_p, roots, T, rng):
    """Reverse-reachable sets, ``T`` independent rounds per root.

    Element ``u`` of the round-``t`` set is encoded as ``u * T + t``, so for
    ``T == 1`` the encoding is the plain node id. Returns CSR (ptr, data).
    """
    n = len(in_ptr) - 1
    ptr, idx, p = in_ptr.tolist(), in_idx.tolist(), in_p.tolist()
    mark = [-1] * n
    out_ptr = [0]
    data = []
    rnd = rng.random
    stamp = 0
    for root in roots.tolist():
        for t in range(T):
            mark[root] = stamp
            data.append(root * T + t)
            queue = deque((root,))
            while queue:
                v = queue.popleft()
                for e in range(ptr[v], ptr[v + 1]):
                    u = idx[e]
                    if mark[u] == stamp:
                        continue
                    pe = p[e]
                    if pe <= 0.0:
                        continue
                    if pe < 1.0 and rnd() >= pe:
                        continue
                    mark[u] = stamp
                    data.append(u * T + t)
                    queue.append(u)
            stamp += 1
        out_ptr.append(len(data))
    return np.array(out_ptr, dtype=np.int64), np.array(data, dtype=np.int32)


def max_cover(ptr, data, inv_ptr, inv_sets, n_items, T, k, trace):
    """Greedy max cover under a per-round budget (item round = item % T).

    Picks up to ``T * k`` items; the argmax takes the lowest item id among
    ties. Returns (picks, covered flags, per-pick count snapshots or None).
    """
    nsets = len(ptr) - 1
    counts = np.diff(inv_ptr).astype(np.int64)
    covered = np.zeros(nsets, dtype=np.uint8)
    available = np.ones(n_items, dtype=bool)
    per_round = np.zeros(T, dtype=np.int64)
    picks = []
    snaps = [] if trace else None
    for _ in range(T * k):
        if not available.any():
            break
        item = int(np.argmax(np.where(available, counts, -1)))
        picks.append(item)
        available[item] = False
        rnd = item % T
        per_round[rnd] += 1
        if per_round[rnd] >= k:
            available[rnd::T] = False
        sets = inv_sets[inv_ptr[item]:inv_ptr[item + 1]]
        sets = sets[covered[sets] == 0]
        if len(sets):
            covered[sets] = 1
            starts, ends = ptr[sets], ptr[sets + 1]
            elems = np.concatenate([data[a:b] for a, b in zip(starts, ends)])
            np.subtract.at(counts, elems, 1)
        if trace:
            snaps.append(counts.copy())
    snap_arr = np.array(snaps, dtype=np.int64).reshape(len(picks), n_items) if trace else None
    return np.array(picks, dtype=np.int64), covered, snap_arr
