# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; see ``_pykernels`` for the reference semantics."""
import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer, PyCapsule_IsValid
from libc.stdint cimport int32_t, int64_t, uint8_t
from libcpp.vector cimport vector
from numpy.random cimport bitgen_t

NAME = "cython"


cdef bitgen_t* _bitgen(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    if not PyCapsule_IsValid(capsule, "BitGenerator"):
        raise ValueError("rng has no usable bit generator")
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef inline bint _live(double pe, bitgen_t* bg) noexcept nogil:
    if pe <= 0.0:
        return False
    if pe < 1.0 and bg.next_double(bg.state) >= pe:
        return False
    return True


cdef int64_t _reach(const int64_t[::1] ptr, const int32_t[::1] idx, const double[::1] p,
                    const int32_t* seeds, Py_ssize_t nseeds,
                    int64_t[::1] mark, int64_t stamp, int64_t[::1] umark, int64_t ustamp,
                    const uint8_t[::1] counted, int32_t[::1] queue, bitgen_t* bg) noexcept nogil:
    cdef int64_t gained = 0
    cdef Py_ssize_t head = 0, tail = 0, i
    cdef int64_t e
    cdef int32_t s, u, v
    for i in range(nseeds):
        s = seeds[i]
        if mark[s] != stamp:
            mark[s] = stamp
            queue[tail] = s
            tail += 1
            if umark[s] != ustamp:
                umark[s] = ustamp
                gained += counted[s]
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(ptr[u], ptr[u + 1]):
            v = idx[e]
            if mark[v] == stamp:
                continue
            if not _live(p[e], bg):
                continue
            mark[v] = stamp
            queue[tail] = v
            tail += 1
            if umark[v] != ustamp:
                umark[v] = ustamp
                gained += counted[v]
    return gained


def mc_cumulative(const int64_t[::1] out_ptr, const int32_t[::1] out_idx, const double[::1] out_p,
                  const int64_t[::1] seed_ptr, const int32_t[::1] seed_idx,
                  const uint8_t[::1] counted, Py_ssize_t r, object rng):
    cdef Py_ssize_t n = out_ptr.shape[0] - 1
    cdef Py_ssize_t T = seed_ptr.shape[0] - 1
    result = np.zeros((r, T), dtype=np.int64)
    cdef int64_t[:, ::1] res = result
    cdef int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] umark = np.full(n, -1, dtype=np.int64)
    cdef int32_t[::1] queue = np.empty(max(n, 1), dtype=np.int32)
    cdef bitgen_t* bg = _bitgen(rng)
    cdef Py_ssize_t s, t
    cdef int64_t total, stamp = 0
    cdef const int32_t* sp = &seed_idx[0] if seed_idx.shape[0] else NULL
    with rng.bit_generator.lock, nogil:
        for s in range(r):
            total = 0
            for t in range(T):
                total += _reach(out_ptr, out_idx, out_p, sp + seed_ptr[t], seed_ptr[t + 1] - seed_ptr[t],
                                mark, stamp, umark, s, counted, queue, bg)
                stamp += 1
                res[s, t] = total
    return result


def mc_marginal(const int64_t[::1] out_ptr, const int32_t[::1] out_idx, const double[::1] out_p,
                const int64_t[::1] seed_ptr, const int32_t[::1] seed_idx,
                int32_t cand, Py_ssize_t cand_round, const uint8_t[::1] counted,
                Py_ssize_t r, object rng):
    cdef Py_ssize_t n = out_ptr.shape[0] - 1
    cdef Py_ssize_t T = seed_ptr.shape[0] - 1
    result = np.zeros(r, dtype=np.int64)
    cdef int64_t[::1] res = result
    cdef int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] tmark = np.full(n, -1, dtype=np.int64)
    cdef int64_t[::1] umark = np.full(n, -1, dtype=np.int64)
    cdef int32_t[::1] queue = np.empty(max(n, 1), dtype=np.int32)
    cdef bitgen_t* bg = _bitgen(rng)
    cdef Py_ssize_t s, t
    cdef int64_t stamp = 0
    cdef int32_t c = cand
    cdef const int32_t* sp = &seed_idx[0] if seed_idx.shape[0] else NULL
    with rng.bit_generator.lock, nogil:
        for s in range(r):
            for t in range(T):
                if t == cand_round:
                    _reach(out_ptr, out_idx, out_p, sp + seed_ptr[t], seed_ptr[t + 1] - seed_ptr[t],
                           tmark, s, umark, s, counted, queue, bg)
                else:
                    _reach(out_ptr, out_idx, out_p, sp + seed_ptr[t], seed_ptr[t + 1] - seed_ptr[t],
                           mark, stamp, umark, s, counted, queue, bg)
                    stamp += 1
            res[s] = _reach(out_ptr, out_idx, out_p, &c, 1, tmark, s, umark, s, counted, queue, bg)
    return result


def reach_once(const int64_t[::1] out_ptr, const int32_t[::1] out_idx, const double[::1] out_p,
               const int64_t[::1] seeds, object rng):
    cdef Py_ssize_t n = out_ptr.shape[0] - 1
    depth_arr = np.full(n, -1, dtype=np.int64)
    order_arr = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] depth = depth_arr
    cdef int64_t[::1] order = order_arr
    cdef bitgen_t* bg = _bitgen(rng)
    cdef Py_ssize_t head = 0, tail = 0, i
    cdef int64_t u, v, e, s
    with rng.bit_generator.lock, nogil:
        for i in range(seeds.shape[0]):
            s = seeds[i]
            if depth[s] < 0:
                depth[s] = 0
                order[tail] = s
                tail += 1
        while head < tail:
            u = order[head]
            head += 1
            for e in range(out_ptr[u], out_ptr[u + 1]):
                v = out_idx[e]
                if depth[v] >= 0:
                    continue
                if not _live(out_p[e], bg):
                    continue
                depth[v] = depth[u] + 1
                order[tail] = v
                tail += 1
    nodes = order_arr[:tail].copy()
    return nodes, depth_arr[nodes]


def rr_sets(const int64_t[::1] in_ptr, const int32_t[::1] in_idx, const double[::1] in_p,
            const int64_t[::1] roots, Py_ssize_t T, object rng):
    cdef Py_ssize_t n = in_ptr.shape[0] - 1
    cdef Py_ssize_t nroots = roots.shape[0]
    ptr_arr = np.zeros(nroots + 1, dtype=np.int64)
    cdef int64_t[::1] optr = ptr_arr
    cdef int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef vector[int32_t] data
    cdef vector[int32_t] queue
    cdef bitgen_t* bg = _bitgen(rng)
    cdef Py_ssize_t i, t, head
    cdef int64_t stamp = 0, e
    cdef int32_t root, u, v
    queue.reserve(64)
    with rng.bit_generator.lock, nogil:
        for i in range(nroots):
            root = <int32_t> roots[i]
            for t in range(T):
                mark[root] = stamp
                data.push_back(root * <int32_t> T + <int32_t> t)
                queue.clear()
                queue.push_back(root)
                head = 0
                while head < <Py_ssize_t> queue.size():
                    v = queue[head]
                    head += 1
                    for e in range(in_ptr[v], in_ptr[v + 1]):
                        u = in_idx[e]
                        if mark[u] == stamp:
                            continue
                        if not _live(in_p[e], bg):
                            continue
                        mark[u] = stamp
                        data.push_back(u * <int32_t> T + <int32_t> t)
                        queue.push_back(u)
                stamp += 1
            optr[i + 1] = data.size()
    out = np.empty(data.size(), dtype=np.int32)
    cdef int32_t[::1] ov = out
    cdef Py_ssize_t j
    for j in range(<Py_ssize_t> data.size()):
        ov[j] = data[j]
    return ptr_arr, out


def max_cover(const int64_t[::1] ptr, const int32_t[::1] data,
              const int64_t[::1] inv_ptr, const int64_t[::1] inv_sets,
              Py_ssize_t n_items, Py_ssize_t T, Py_ssize_t k, bint trace):
    cdef Py_ssize_t nsets = ptr.shape[0] - 1
    counts_arr = np.diff(np.asarray(inv_ptr)).astype(np.int64)
    cdef int64_t[::1] counts = counts_arr
    covered_arr = np.zeros(nsets, dtype=np.uint8)
    cdef uint8_t[::1] covered = covered_arr
    cdef uint8_t[::1] available = np.ones(n_items, dtype=np.uint8)
    cdef int64_t[::1] per_round = np.zeros(T, dtype=np.int64)
    picks_arr = np.empty(T * k, dtype=np.int64)
    cdef int64_t[::1] picks = picks_arr
    snaps = [] if trace else None
    cdef Py_ssize_t npicked = 0, it, j, best, rnd
    cdef int64_t bestc, a, b, si, e
    for it in range(T * k):
        best = -1
        bestc = -1
        for j in range(n_items):
            if available[j] and counts[j] > bestc:
                bestc = counts[j]
                best = j
        if best < 0:
            break
        picks[npicked] = best
        npicked += 1
        available[best] = 0
        rnd = best % T
        per_round[rnd] += 1
        if per_round[rnd] >= k:
            j = rnd
            while j < n_items:
                available[j] = 0
                j += T
        for a in range(inv_ptr[best], inv_ptr[best + 1]):
            si = inv_sets[a]
            if covered[si]:
                continue
            covered[si] = 1
            for e in range(ptr[si], ptr[si + 1]):
                counts[data[e]] -= 1
        if trace:
            snaps.append(counts_arr.copy())
    snap_arr = np.array(snaps, dtype=np.int64).reshape(npicked, n_items) if trace else None
    return picks_arr[:npicked].copy(), covered_arr, snap_arr
