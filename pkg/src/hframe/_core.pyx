# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the two hot inner loops: candidate-pruning sweeps
and backtracking homomorphism search.

Behavior matches hframe._ref exactly; see that module for the contracts.
"""

from time import monotonic

import numpy as np

cimport numpy as cnp

BACKEND_NAME = "compiled"

ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64
ctypedef cnp.uint8_t u8


cdef inline i64 _lower_bound(const i32[:] a, i64 lo, i64 hi, i32 key) noexcept nogil:
    cdef i64 mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] < key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline i64 _upper_bound(const i32[:] a, i64 lo, i64 hi, i32 key) noexcept nogil:
    cdef i64 mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if a[mid] <= key:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline bint _edge_exists(
    const i64[:] out_indptr, const i32[:] out_lbl, const i32[:] out_dst,
    i64 a, i32 r, i32 b,
) noexcept nogil:
    cdef i64 lo = out_indptr[a]
    cdef i64 hi = out_indptr[a + 1]
    cdef i64 s = _lower_bound(out_lbl, lo, hi, r)
    cdef i64 e = _upper_bound(out_lbl, lo, hi, r)
    cdef i64 p = _lower_bound(out_dst, s, e, b)
    return p < e and out_dst[p] == b


def dualsim_run(
    const i32[:] q_esrc,
    const i32[:] q_elbl,
    const i32[:] q_edst,
    const i64[:] out_indptr,
    const i32[:] out_lbl,
    const i32[:] out_dst,
    const i64[:] in_indptr,
    const i32[:] in_lbl,
    const i32[:] in_src,
    u8[:, ::1] cand,
    long iters,
    bint label_aware,
):
    cdef Py_ssize_t ne = q_esrc.shape[0]
    cdef Py_ssize_t ng = cand.shape[1]
    cdef long sweeps = 0
    cdef bint changed
    cdef Py_ssize_t e, v
    cdef i64 idx
    cdef i32 u, r, u2
    cdef bint ok
    with nogil:
        while True:
            changed = False
            for e in range(ne):  # outgoing-edge pass
                u = q_esrc[e]
                r = q_elbl[e]
                u2 = q_edst[e]
                for v in range(ng):
                    if not cand[u, v]:
                        continue
                    ok = False
                    for idx in range(out_indptr[v], out_indptr[v + 1]):
                        if (not label_aware or out_lbl[idx] == r) and cand[u2, out_dst[idx]]:
                            ok = True
                            break
                    if not ok:
                        cand[u, v] = 0
                        changed = True
            for e in range(ne):  # incoming-edge pass
                u2 = q_esrc[e]
                r = q_elbl[e]
                u = q_edst[e]
                for v in range(ng):
                    if not cand[u, v]:
                        continue
                    ok = False
                    for idx in range(in_indptr[v], in_indptr[v + 1]):
                        if (not label_aware or in_lbl[idx] == r) and cand[u2, in_src[idx]]:
                            ok = True
                            break
                    if not ok:
                        cand[u, v] = 0
                        changed = True
            sweeps += 1
            if iters >= 0:
                if sweeps >= iters:
                    break
            elif not changed:
                break
    return sweeps


def hom_search(
    const i32[:] order_pat,
    const i64[:] b_indptr,
    const i32[:] b_cand,
    const i64[:] c_indptr,
    const i32[:] c_r,
    const i32[:] c_pos,
    const i32[:] c_dir,
    const i64[:] out_indptr,
    const i32[:] out_lbl,
    const i32[:] out_dst,
    const i64[:] in_indptr,
    const i32[:] in_lbl,
    const i32[:] in_src,
    const u8[:, ::1] cand_mask,
    long long limit,
    double deadline,
):
    cdef Py_ssize_t nq = order_pat.shape[0]
    if nq == 0:
        return 0, 0, []

    phi_arr = np.full(nq, -1, dtype=np.int64)
    cdef i64[:] phi = phi_arr
    gen_state = np.zeros((nq, 4), dtype=np.int64)  # kind, idx, hi, gen_t per depth
    cdef i64[:, :] gs = gen_state

    results = []
    cdef long long steps = 0
    cdef long long found = 0
    cdef int status = 0
    cdef bint running = True
    cdef bint need_setup = True
    cdef bint advanced
    cdef Py_ssize_t i = 0
    cdef i64 clo, chi, t, vj, lo_r, hi_r, best_t, best_len, best_lo, best_hi, ln
    cdef i32 u, v
    cdef bint ok

    while i >= 0 and running:
        if need_setup:
            clo = c_indptr[i]
            chi = c_indptr[i + 1]
            if clo == chi:
                gs[i, 0] = 0
                gs[i, 1] = b_indptr[i]
                gs[i, 2] = b_indptr[i + 1]
                gs[i, 3] = -1
            else:
                best_t = -1
                best_len = -1
                best_lo = 0
                best_hi = 0
                for t in range(clo, chi):
                    vj = phi[c_pos[t]]
                    if c_dir[t] == 0:
                        lo_r = _lower_bound(in_lbl, in_indptr[vj], in_indptr[vj + 1], c_r[t])
                        hi_r = _upper_bound(in_lbl, in_indptr[vj], in_indptr[vj + 1], c_r[t])
                    else:
                        lo_r = _lower_bound(out_lbl, out_indptr[vj], out_indptr[vj + 1], c_r[t])
                        hi_r = _upper_bound(out_lbl, out_indptr[vj], out_indptr[vj + 1], c_r[t])
                    ln = hi_r - lo_r
                    if best_t < 0 or ln < best_len:
                        best_t = t
                        best_len = ln
                        best_lo = lo_r
                        best_hi = hi_r
                gs[i, 0] = 1 if c_dir[best_t] == 0 else 2
                gs[i, 1] = best_lo
                gs[i, 2] = best_hi
                gs[i, 3] = best_t
            need_setup = False

        u = order_pat[i]
        clo = c_indptr[i]
        chi = c_indptr[i + 1]
        advanced = False
        while gs[i, 1] < gs[i, 2]:
            if gs[i, 0] == 0:
                v = b_cand[gs[i, 1]]
            elif gs[i, 0] == 1:
                v = in_src[gs[i, 1]]
            else:
                v = out_dst[gs[i, 1]]
            gs[i, 1] += 1
            steps += 1
            if (steps & 4095) == 0 and deadline >= 0 and monotonic() > deadline:
                status = 2
                running = False
                break
            if not cand_mask[u, v]:
                continue
            ok = True
            for t in range(clo, chi):
                if t == gs[i, 3]:
                    continue
                vj = phi[c_pos[t]]
                if c_dir[t] == 0:
                    ok = _edge_exists(out_indptr, out_lbl, out_dst, v, c_r[t], <i32>vj)
                else:
                    ok = _edge_exists(out_indptr, out_lbl, out_dst, vj, c_r[t], v)
                if not ok:
                    break
            if not ok:
                continue
            phi[i] = v
            if i + 1 == nq:
                results.append(phi_arr.copy())
                found += 1
                if 0 < limit <= found:
                    status = 1
                    running = False
                    break
            else:
                i += 1
                need_setup = True
                advanced = True
                break
        if not running:
            break
        if advanced:
            continue
        phi[i] = -1
        i -= 1
    return status, int(steps), results
