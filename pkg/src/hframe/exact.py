"""Exact subgraph-homomorphism decision and enumeration.

A homomorphic mapping sends every pattern vertex to a same-labeled graph
vertex and every pattern edge to a same-labeled graph edge; it need not be
injective.  The search backtracks over a fixed matching order (descending
total degree, ties by smaller id) with label-initialized candidate sets
refined by a per-edge-label degree-presence check.  This module is the
ground-truth oracle for dataset labels and the baseline for benchmarks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from time import monotonic

import numpy as np

from hframe import core
from hframe.graph import Graph

__all__ = [
    "Verdict",
    "MatchOutcome",
    "hom_decide",
    "hom_enumerate",
    "brute_force_hom",
    "brute_force_anchor_pairs",
    "verify_mapping",
]

BRUTE_FORCE_LIMIT = 10_000_000


class Verdict(str, Enum):
    TRUE = "true"
    FALSE = "false"
    TIMEOUT = "timeout"


@dataclass(frozen=True)
class MatchOutcome:
    """Decision result; ``witness`` is a pattern-vertex -> graph-vertex map,
    present exactly when the verdict is TRUE."""

    verdict: Verdict
    witness: dict[int, int] | None
    elapsed: float

    @property
    def is_true(self) -> bool:
        return self.verdict is Verdict.TRUE


def matching_order(q: Graph, anchor_vertex: int | None = None) -> list[int]:
    """Descending total degree, ties by smaller id; an anchored vertex goes first."""
    order = sorted(range(q.n), key=lambda u: (-q.total_degree(u), u))
    if anchor_vertex is not None:
        order.remove(anchor_vertex)
        order.insert(0, anchor_vertex)
    return order


def candidate_masks(q: Graph, g: Graph) -> np.ndarray:
    """Per-pattern-vertex candidate masks over graph vertices.

    A graph vertex survives for pattern vertex u when labels match and, for
    every edge label on u, it has at least one same-direction edge with that
    label (with a matching self-loop when u carries one).  Presence — not
    count — is what a non-injective mapping requires.
    """
    mask = np.zeros((q.n, g.n), dtype=np.uint8)
    out_have: dict[int, np.ndarray] = {}
    in_have: dict[int, np.ndarray] = {}
    loop_have: dict[int, np.ndarray] = {}
    for u in range(q.n):
        m = g.vlabels == q.vlabels[u]
        lbls, dsts = q.out_edge_view(u)
        for r, d in zip(lbls, dsts):
            r = int(r)
            if d == u:
                if r not in loop_have:
                    sel = (g.elbl == r) & (g.esrc == g.edst)
                    lm = np.zeros(g.n, dtype=bool)
                    lm[g.esrc[sel]] = True
                    loop_have[r] = lm
                m = m & loop_have[r]
            else:
                if r not in out_have:
                    out_have[r] = g.has_out_label(r)
                m = m & out_have[r]
        lbls, srcs = q.in_edge_view(u)
        for r, s in zip(lbls, srcs):
            r = int(r)
            if s == u:
                continue  # self-loop already handled on the outgoing side
            if r not in in_have:
                in_have[r] = g.has_in_label(r)
            m = m & in_have[r]
        mask[u] = m
    return mask


def _prepare_search(
    q: Graph, g: Graph, anchor: tuple[int, int] | None
) -> tuple[tuple, list[int]]:
    anchor_u = anchor[0] if anchor is not None else None
    order = matching_order(q, anchor_u)
    pos = {u: i for i, u in enumerate(order)}
    mask = candidate_masks(q, g)

    b_parts: list[np.ndarray] = []
    c_r: list[int] = []
    c_pos: list[int] = []
    c_dir: list[int] = []
    b_indptr = np.zeros(len(order) + 1, dtype=np.int64)
    c_indptr = np.zeros(len(order) + 1, dtype=np.int64)
    for i, u in enumerate(order):
        if i == 0 and anchor is not None:
            base = np.array([anchor[1]], dtype=np.int32)
        else:
            base = np.flatnonzero(mask[u]).astype(np.int32)
        b_parts.append(base)
        b_indptr[i + 1] = b_indptr[i] + len(base)
        cnt = 0
        lbls, dsts = q.out_edge_view(u)
        for r, w in zip(lbls, dsts):
            if w != u and pos[int(w)] < i:
                c_r.append(int(r))
                c_pos.append(pos[int(w)])
                c_dir.append(0)
                cnt += 1
        lbls, srcs = q.in_edge_view(u)
        for r, w in zip(lbls, srcs):
            if w != u and pos[int(w)] < i:
                c_r.append(int(r))
                c_pos.append(pos[int(w)])
                c_dir.append(1)
                cnt += 1
        c_indptr[i + 1] = c_indptr[i] + cnt

    args = (
        np.array(order, dtype=np.int32),
        b_indptr,
        np.concatenate(b_parts) if b_parts else np.array([], dtype=np.int32),
        c_indptr,
        np.array(c_r, dtype=np.int32),
        np.array(c_pos, dtype=np.int32),
        np.array(c_dir, dtype=np.int32),
        *g.csr_arrays(),
        mask,
    )
    return args, order


def _run(q, g, anchor, timeout, limit):
    if q.n == 0:
        raise ValueError("empty pattern")
    t0 = monotonic()
    if anchor is not None:
        u, v = anchor
        if not (0 <= u < q.n and 0 <= v < g.n):
            raise ValueError(f"anchor ({u}, {v}) out of range")
        if q.vlabels[u] != g.vlabels[v]:
            return Verdict.FALSE, [], monotonic() - t0
    if g.n == 0:
        return Verdict.FALSE, [], monotonic() - t0
    args, order = _prepare_search(q, g, anchor)
    deadline = t0 + timeout if timeout is not None else -1.0
    status, _steps, rows = core.hom_search(*args, limit, deadline)
    mappings = [{int(u): int(row[i]) for i, u in enumerate(order)} for row in rows]
    elapsed = monotonic() - t0
    if status == 2 and not (0 < limit <= len(mappings)):
        return Verdict.TIMEOUT, mappings, elapsed
    return (Verdict.TRUE if mappings else Verdict.FALSE), mappings, elapsed


def hom_decide(
    q: Graph,
    g: Graph,
    anchor: tuple[int, int] | None = None,
    timeout: float | None = 30.0,
) -> MatchOutcome:
    """Decide whether a homomorphic mapping from q to g exists.

    With ``anchor=(u, v)`` the mapping must send u to v.  Returns on the
    first complete mapping; a TIMEOUT verdict (distinct from FALSE) is
    produced when the budget runs out before the search space is exhausted.
    """
    verdict, mappings, elapsed = _run(q, g, anchor, timeout, limit=1)
    witness = mappings[0] if verdict is Verdict.TRUE else None
    return MatchOutcome(verdict, witness, elapsed)


def hom_enumerate(
    q: Graph,
    g: Graph,
    limit: int | None = None,
    anchor: tuple[int, int] | None = None,
    timeout: float | None = 30.0,
) -> list[dict[int, int]]:
    """Collect up to ``limit`` homomorphic mappings (all of them when None).

    On timeout the mappings found so far are returned.
    """
    _verdict, mappings, _elapsed = _run(q, g, anchor, timeout, limit=limit or 0)
    return mappings


def verify_mapping(
    q: Graph, g: Graph, phi: dict[int, int], anchor: tuple[int, int] | None = None
) -> bool:
    """Independent edge-by-edge check that phi is a homomorphism q -> g."""
    if set(phi.keys()) != set(range(q.n)):
        return False
    if anchor is not None and phi[anchor[0]] != anchor[1]:
        return False
    gl = g.vlabels
    for u in range(q.n):
        v = phi[u]
        if not 0 <= v < g.n or gl[v] != q.vlabels[u]:
            return False
    gedges = set(g.triples())
    return all((phi[s], r, phi[d]) in gedges for s, r, d in q.triples())


def brute_force_hom(q: Graph, g: Graph, anchor: tuple[int, int] | None = None) -> bool:
    """Test oracle: exhaustively try every function V_Q -> V_G.

    Only valid for instances with at most 10^7 assignments.
    """
    if q.n == 0:
        raise ValueError("empty pattern")
    if g.n == 0:
        return False
    if g.n**q.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance too large for brute force ({g.n}^{q.n})")
    qlab = [int(x) for x in q.vlabels]
    glab = [int(x) for x in g.vlabels]
    qedges = list(q.triples())
    gedges = set(g.triples())
    for assign in itertools.product(range(g.n), repeat=q.n):
        if anchor is not None and assign[anchor[0]] != anchor[1]:
            continue
        if any(glab[assign[u]] != qlab[u] for u in range(q.n)):
            continue
        if all((assign[s], r, assign[d]) in gedges for s, r, d in qedges):
            return True
    return False


def brute_force_anchor_pairs(q: Graph, g: Graph) -> set[tuple[int, int]]:
    """All pairs (u, phi(u)) realized by some homomorphism, by exhaustion."""
    if g.n == 0 or q.n == 0:
        return set()
    if g.n**q.n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"instance too large for brute force ({g.n}^{q.n})")
    qlab = [int(x) for x in q.vlabels]
    glab = [int(x) for x in g.vlabels]
    qedges = list(q.triples())
    gedges = set(g.triples())
    pairs: set[tuple[int, int]] = set()
    for assign in itertools.product(range(g.n), repeat=q.n):
        if any(glab[assign[u]] != qlab[u] for u in range(q.n)):
            continue
        if all((assign[s], r, assign[d]) in gedges for s, r, d in qedges):
            pairs.update((u, assign[u]) for u in range(q.n))
    return pairs
