"""End-to-end decision pipeline and the exact-matching accelerator.

``decide`` answers "is the pattern homomorphic to the graph?" approximately:
prune candidates by dual simulation (an empty set is a sound negative),
induce the surviving subgraph, then let the learned verifier score the
pivot's candidates until one is accepted.  ``accelerate`` keeps exact
semantics: the verifier only reorders the pivot candidates, after which
anchored backtracking checks every one inside the pruned subgraph.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from time import monotonic

from hframe.dualsim import dual_sim, filter_graph
from hframe.exact import MatchOutcome, Verdict, hom_decide
from hframe.graph import Graph
from hframe.model import Model, predict

__all__ = [
    "PipelineError",
    "PipelineConfig",
    "Diagnostics",
    "pivot",
    "decide",
    "accelerate",
    "predict_anchored",
]


class PipelineError(ValueError):
    """Configuration mismatch between model and inputs."""


@dataclass
class PipelineConfig:
    model: Model
    dualsim_iters: int | None = 2
    skip_dualsim: bool = False
    candidate_cap: int | None = None
    threshold: float | None = None  # None = model's own threshold
    label_aware_dualsim: bool = True

    def __post_init__(self):
        if not self.skip_dualsim and self.dualsim_iters is not None and self.dualsim_iters < 1:
            raise ValueError("dualsim_iters must be >= 1 (or None for fixpoint)")

    @property
    def effective_threshold(self) -> float:
        return self.model.config.threshold if self.threshold is None else self.threshold


@dataclass
class Diagnostics:
    candidate_counts: dict[int, int] = field(default_factory=dict)
    filtered_vertices: int = 0
    pivot_vertex: int = -1
    candidates_scored: int = 0
    stage_seconds: dict[str, float] = field(default_factory=dict)
    decided_by: str = ""


def pivot(q: Graph) -> int:
    """Pattern vertex with maximum total degree (in+out over all labels);
    ties break toward the smaller id."""
    if q.n == 0:
        raise ValueError("empty pattern")
    return max(range(q.n), key=lambda u: (q.total_degree(u), -u))


def _check_compat(model: Model, q: Graph, g: Graph, skip_dualsim: bool) -> None:
    if model.label_names is not None:
        names = q.label_dict.names
        if names[: len(model.label_names)] != model.label_names:
            raise PipelineError("label-dictionary mismatch between model and inputs")
        if g.label_dict.names[: len(model.label_names)] != model.label_names:
            raise PipelineError("label-dictionary mismatch between model and inputs")
    known_v = set(model.config.vertex_labels)
    known_e = set(model.config.edge_labels)
    if not set(q.vertex_label_ids) <= known_v or not set(g.vertex_label_ids) <= known_v:
        raise PipelineError("label-dictionary mismatch between model and inputs")
    if not set(q.edge_label_ids) <= known_e or not set(g.edge_label_ids) <= known_e:
        raise PipelineError("label-dictionary mismatch between model and inputs")
    if model.trained_with_filtering is not None and model.trained_with_filtering == skip_dualsim:
        raise PipelineError(
            "model fingerprint mismatch: trained "
            f"{'with' if model.trained_with_filtering else 'without'} candidate filtering "
            f"but evaluated {'without' if skip_dualsim else 'with'} it"
        )


def decide(q: Graph, g: Graph, cfg: PipelineConfig) -> tuple[bool, Diagnostics]:
    """Approximate decision: True as soon as any pivot candidate is accepted
    by the verifier; False when pruning empties a candidate set (sound) or
    every candidate is rejected (may be a false negative)."""
    model = cfg.model
    _check_compat(model, q, g, cfg.skip_dualsim)
    diag = Diagnostics()
    t0 = monotonic()
    if cfg.skip_dualsim:
        cand_pivot = None
        sub, origins = g, tuple(range(g.n))
        diag.stage_seconds["dualsim"] = 0.0
        diag.stage_seconds["induce"] = 0.0
    else:
        cm = dual_sim(q, g, cfg.dualsim_iters, cfg.label_aware_dualsim)
        diag.candidate_counts = cm.count_rows()
        diag.stage_seconds["dualsim"] = monotonic() - t0
        if cm.is_empty():
            diag.decided_by = "dualsim-empty"
            diag.stage_seconds["induce"] = 0.0
            diag.stage_seconds["predict"] = 0.0
            return False, diag
        t1 = monotonic()
        sub, origins = filter_graph(g, cm)
        diag.stage_seconds["induce"] = monotonic() - t1
        cand_pivot = cm.candidates
    diag.filtered_vertices = sub.n

    u_p = pivot(q)
    diag.pivot_vertex = u_p
    if cand_pivot is None:
        candidates = [v for v in range(sub.n) if sub.vlabels[v] == q.vlabels[u_p]]
    else:
        candidates = [bisect_left(origins, v) for v in sorted(cand_pivot[u_p])]
    if cfg.candidate_cap is not None:
        candidates = candidates[: cfg.candidate_cap]

    t2 = monotonic()
    verdict = False
    t_eff = cfg.effective_threshold
    for v in candidates:
        diag.candidates_scored += 1
        _ok, score = predict(model, q, u_p, sub, v)
        if score <= t_eff:
            verdict = True
            diag.decided_by = "predict-accept"
            break
    diag.stage_seconds["predict"] = monotonic() - t2
    if not verdict:
        diag.decided_by = diag.decided_by or "predict-reject-all"
    return verdict, diag


def accelerate(
    q: Graph, g: Graph, cfg: PipelineConfig, exact_timeout: float | None = 30.0
) -> MatchOutcome:
    """Exact decision sped up by pruning and verifier-guided ordering.

    Steps: prune candidates, induce the surviving subgraph, score the pivot
    candidates with the verifier (accepted ones are searched first), then run
    anchored backtracking per candidate.  No candidate is ever dropped, so
    the verdict matches plain exact search whenever neither times out.
    """
    model = cfg.model
    _check_compat(model, q, g, cfg.skip_dualsim)
    t0 = monotonic()
    deadline = t0 + exact_timeout if exact_timeout is not None else None
    if cfg.skip_dualsim:
        sub, origins = g, tuple(range(g.n))
        cand_pivot = None
    else:
        cm = dual_sim(q, g, cfg.dualsim_iters, cfg.label_aware_dualsim)
        if cm.is_empty():
            return MatchOutcome(Verdict.FALSE, None, monotonic() - t0)
        sub, origins = filter_graph(g, cm)
        cand_pivot = cm.candidates

    u_p = pivot(q)
    if cand_pivot is None:
        candidates = [v for v in range(sub.n) if sub.vlabels[v] == q.vlabels[u_p]]
    else:
        candidates = [bisect_left(origins, v) for v in sorted(cand_pivot[u_p])]

    accepted: list[int] = []
    rest: list[int] = []
    t_eff = cfg.effective_threshold
    cap = cfg.candidate_cap if cfg.candidate_cap is not None else len(candidates)
    for i, v in enumerate(candidates):
        if i < cap:
            _ok, score = predict(model, q, u_p, sub, v)
            (accepted if score <= t_eff else rest).append(v)
        else:
            rest.append(v)

    for v in accepted + rest:
        remaining = None if deadline is None else deadline - monotonic()
        if remaining is not None and remaining <= 0:
            return MatchOutcome(Verdict.TIMEOUT, None, monotonic() - t0)
        out = hom_decide(q, sub, anchor=(u_p, v), timeout=remaining)
        if out.verdict is Verdict.TRUE:
            witness = {u: origins[w] for u, w in out.witness.items()}
            return MatchOutcome(Verdict.TRUE, witness, monotonic() - t0)
        if out.verdict is Verdict.TIMEOUT:
            return MatchOutcome(Verdict.TIMEOUT, None, monotonic() - t0)
    return MatchOutcome(Verdict.FALSE, None, monotonic() - t0)


def predict_anchored(
    model: Model,
    q: Graph,
    u: int,
    g: Graph,
    v: int,
    dualsim_iters: int | None = 2,
    use_filtering: bool = True,
    threshold: float | None = None,
) -> tuple[bool, dict[str, float]]:
    """Anchored pipeline prediction with per-stage timings.

    Mirrors how anchored examples are evaluated: pruning first (an empty
    candidate set, or the anchor falling out of the pivot's candidates, is a
    sound negative), then the verifier on the pruned graph.
    """
    _check_compat(model, q, g, skip_dualsim=not use_filtering)
    stages = {"dualsim": 0.0, "induce": 0.0, "predict": 0.0}
    if q.vlabels[u] != g.vlabels[v]:
        return False, stages
    sub, anchor = g, v
    if use_filtering:
        t0 = monotonic()
        cm = dual_sim(q, g, dualsim_iters)
        stages["dualsim"] = monotonic() - t0
        if cm.is_empty() or v not in cm.candidates[u]:
            return False, stages
        t1 = monotonic()
        sub, origins = filter_graph(g, cm)
        anchor = bisect_left(origins, v)
        stages["induce"] = monotonic() - t1
    t2 = monotonic()
    _ok, score = predict(model, q, u, sub, anchor)
    stages["predict"] = monotonic() - t2
    t_eff = model.config.threshold if threshold is None else threshold
    return score <= t_eff, stages
