"""Pure-Python reference kernels.

Same contracts as the compiled extension ``hframe._core``; selected by
``hframe.core`` when the extension is unavailable or disabled.  These are
the readable, slow versions — correctness oracle for the compiled code.
"""

from __future__ import annotations

from time import monotonic

import numpy as np

BACKEND_NAME = "pure-python"


def _label_range(indptr, lbl, v, r):
    lo, hi = int(indptr[v]), int(indptr[v + 1])
    a = lo + int(np.searchsorted(lbl[lo:hi], r, side="left"))
    b = lo + int(np.searchsorted(lbl[lo:hi], r, side="right"))
    return a, b


def dualsim_run(
    q_esrc,
    q_elbl,
    q_edst,
    out_indptr,
    out_lbl,
    out_dst,
    in_indptr,
    in_lbl,
    in_src,
    cand,
    iters,
    label_aware,
):
    """Run candidate-pruning sweeps over ``cand`` (uint8, |V_Q| x |V_G|) in place.

    Each sweep makes one pass over all pattern edges checking outgoing
    witnesses, then one pass checking incoming witnesses; removals take
    effect immediately.  ``iters < 0`` repeats sweeps until none removes
    anything.  Returns the number of sweeps executed.
    """
    ne = len(q_esrc)
    sweeps = 0
    while True:
        changed = False
        for e in range(ne):  # outgoing-edge pass
            u, r, u2 = int(q_esrc[e]), int(q_elbl[e]), int(q_edst[e])
            row, tgt = cand[u], cand[u2]
            for v in np.flatnonzero(row):
                v = int(v)
                ok = False
                for idx in range(int(out_indptr[v]), int(out_indptr[v + 1])):
                    if (not label_aware or out_lbl[idx] == r) and tgt[out_dst[idx]]:
                        ok = True
                        break
                if not ok:
                    row[v] = 0
                    changed = True
        for e in range(ne):  # incoming-edge pass
            u2, r, u = int(q_esrc[e]), int(q_elbl[e]), int(q_edst[e])
            row, srcs = cand[u], cand[u2]
            for v in np.flatnonzero(row):
                v = int(v)
                ok = False
                for idx in range(int(in_indptr[v]), int(in_indptr[v + 1])):
                    if (not label_aware or in_lbl[idx] == r) and srcs[in_src[idx]]:
                        ok = True
                        break
                if not ok:
                    row[v] = 0
                    changed = True
        sweeps += 1
        if iters >= 0:
            if sweeps >= iters:
                break
        elif not changed:
            break
    return sweeps


def hom_search(
    order_pat,
    b_indptr,
    b_cand,
    c_indptr,
    c_r,
    c_pos,
    c_dir,
    out_indptr,
    out_lbl,
    out_dst,
    in_indptr,
    in_lbl,
    in_src,
    cand_mask,
    limit,
    deadline,
):
    """Backtracking homomorphism search.

    ``order_pat[i]`` is the pattern vertex assigned at depth i.  A
    constraint ``(r, pos, dir)`` at depth i requires, for candidate v:
    dir 0 -> graph edge (v, r, phi[pos]); dir 1 -> graph edge (phi[pos], r, v).
    Candidates come from the base list when a depth has no constraints,
    otherwise from the smallest adjacency slice among its constraints; either
    way they are visited in ascending vertex order, so the first complete
    mapping is deterministic.  The deadline is checked every 4096 steps.

    Returns (status, steps, mappings) with status 0 = search space exhausted,
    1 = stopped at ``limit`` mappings, 2 = deadline expired.  Each mapping is
    an int64 array indexed by depth (not by pattern vertex).
    """
    nq = len(order_pat)
    phi = np.full(nq, -1, dtype=np.int64)
    results: list[np.ndarray] = []
    steps = 0
    status = 0

    def edge_exists(a, r, b):
        lo, hi = _label_range(out_indptr, out_lbl, a, r)
        seg = out_dst[lo:hi]
        i = np.searchsorted(seg, b)
        return bool(i < len(seg) and seg[i] == b)

    def candidates_at(i):
        clo, chi = int(c_indptr[i]), int(c_indptr[i + 1])
        if clo == chi:
            return b_cand[int(b_indptr[i]) : int(b_indptr[i + 1])], -1
        best_t, best_len, best_rng = -1, -1, (0, 0)
        for t in range(clo, chi):
            vj = int(phi[c_pos[t]])
            if c_dir[t] == 0:
                rng = _label_range(in_indptr, in_lbl, vj, int(c_r[t]))
            else:
                rng = _label_range(out_indptr, out_lbl, vj, int(c_r[t]))
            ln = rng[1] - rng[0]
            if best_t < 0 or ln < best_len:
                best_t, best_len, best_rng = t, ln, rng
        if c_dir[best_t] == 0:
            gen = in_src[best_rng[0] : best_rng[1]]
        else:
            gen = out_dst[best_rng[0] : best_rng[1]]
        return gen, best_t

    def extend(i):
        nonlocal steps, status
        gen, gen_t = candidates_at(i)
        u = int(order_pat[i])
        clo, chi = int(c_indptr[i]), int(c_indptr[i + 1])
        mask_row = cand_mask[u]
        for v in gen:
            v = int(v)
            steps += 1
            if (steps & 4095) == 0 and deadline >= 0 and monotonic() > deadline:
                status = 2
                return True
            if not mask_row[v]:
                continue
            ok = True
            for t in range(clo, chi):
                if t == gen_t:
                    continue
                vj = int(phi[c_pos[t]])
                if c_dir[t] == 0:
                    ok = edge_exists(v, int(c_r[t]), vj)
                else:
                    ok = edge_exists(vj, int(c_r[t]), v)
                if not ok:
                    break
            if not ok:
                continue
            phi[i] = v
            if i + 1 == nq:
                results.append(phi.copy())
                if 0 < limit <= len(results):
                    status = 1
                    phi[i] = -1
                    return True
            else:
                if extend(i + 1):
                    phi[i] = -1
                    return True
            phi[i] = -1
        return False

    if nq:
        extend(0)
    return status, steps, results
