"""Learned anchored-match verifier.

The model embeds the radius-m ego network of a pattern pivot and of a
candidate graph vertex, then tests containment in an order-embedding space:
the pair is accepted when the squared positive part of (pattern embedding -
graph embedding) stays under a threshold.

Message passing is
  * edge-label-typed: one weight matrix per (layer, edge label),
  * direction-separated: incoming and outgoing halves are computed
    independently and concatenated each layer,
  * identity-aware: a message from the ego center can use a distinct,
    larger "identity" matrix,
  * cycle-gated: the identity matrix fires at layer k only when the pattern
    pivot lies on a directed cycle of length k,
  * set-deduplicated: neighbors with bitwise-identical embeddings collapse
    to a single message, which is what lets two pattern vertices share one
    graph image.

Everything is plain numpy with hand-written gradients; matrix-vector
products are applied per vertex (never batched across vertices) so that
structurally mirrored inputs produce bitwise-identical embeddings.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from hframe.dualsim import dual_sim, filter_graph
from hframe.graph import EgoNet, Graph, cycle_lengths, ego_net

if TYPE_CHECKING:  # pragma: no cover
    from hframe.datagen import Dataset

__all__ = [
    "GAP_EPS",
    "ModelConfig",
    "Model",
    "Gradients",
    "TrainingDiverged",
    "init_model",
    "embed",
    "normalize",
    "violation",
    "predict",
    "prepare_example",
    "prepare_anchored",
    "prepare_dataset",
    "loss",
    "loss_prepared",
    "loss_and_grads",
    "train",
    "train_on_dataset",
    "clone_model",
    "save_model",
    "load_model",
]

# floor for the identity-gap regularizer denominator
GAP_EPS = 1e-3

CHECKPOINT_FORMAT = "hframe-model"
CHECKPOINT_VERSION = 1


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the epoch index where it happened."""

    def __init__(self, epoch: int):
        super().__init__(f"training diverged at epoch {epoch} (non-finite loss)")
        self.epoch = epoch


@dataclass(frozen=True, kw_only=True)
class ModelConfig:
    """Architecture, decision, and ablation settings.

    ``vertex_labels`` / ``edge_labels`` are the label ids the model knows;
    embedding width ``dim`` must be even because each direction contributes
    one half.  Ablation flags:

    * multiset_aggregation - keep duplicate neighbor embeddings
    * ignore_direction     - pool incoming and outgoing neighbors together
    * skip_normalization   - compare raw embeddings
    * ignore_cycles        - identity matrix fires for the center regardless
                             of pattern cycles
    * plain_loss           - margin-only loss without the positive offset or
                             the identity-gap regularizer

    ``literal_center_gating`` restores the asymmetric variant where only the
    graph side is cycle-gated; ``require_graph_cycles`` additionally demands
    the matching cycle length around the graph candidate.
    """

    vertex_labels: tuple[int, ...]
    edge_labels: tuple[int, ...]
    layers: int = 5
    dim: int = 64
    margin: float = 1.5
    threshold: float = 0.1
    multiset_aggregation: bool = False
    ignore_direction: bool = False
    skip_normalization: bool = False
    ignore_cycles: bool = False
    plain_loss: bool = False
    literal_center_gating: bool = False
    require_graph_cycles: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.dim < 2 or self.dim % 2:
            raise ValueError("embedding dim must be even and >= 2")
        if self.layers < 1:
            raise ValueError("need at least one layer")
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.threshold < 0:
            raise ValueError("threshold must be nonnegative")
        if not self.vertex_labels or not self.edge_labels:
            raise ValueError("label sets must be nonempty")
        object.__setattr__(self, "vertex_labels", tuple(sorted(self.vertex_labels)))
        object.__setattr__(self, "edge_labels", tuple(sorted(self.edge_labels)))


@dataclass
class Model:
    """Parameters: a per-vertex-label table of initial embeddings plus, for
    every (layer, edge label, identity bit, direction), a dim/2 x dim
    message matrix, and a per-layer dim x dim self matrix whose top half
    feeds the incoming direction and bottom half the outgoing one."""

    config: ModelConfig
    label_table: np.ndarray  # (n_vertex_labels, dim)
    msg_w: np.ndarray  # (layers, n_edge_labels, 2, 2, dim/2, dim)
    self_w: np.ndarray  # (layers, dim, dim)
    label_names: tuple[str, ...] | None = None
    trained_with_filtering: bool | None = None
    _vpos: dict[int, int] = field(init=False, repr=False)
    _epos: dict[int, int] = field(init=False, repr=False)

    def __post_init__(self):
        self._vpos = {l: i for i, l in enumerate(self.config.vertex_labels)}
        self._epos = {l: i for i, l in enumerate(self.config.edge_labels)}

    def vertex_row(self, label_id: int) -> int:
        try:
            return self._vpos[label_id]
        except KeyError:
            raise ValueError(f"unknown vertex label id {label_id}") from None

    def edge_slot(self, label_id: int) -> int:
        try:
            return self._epos[label_id]
        except KeyError:
            raise ValueError(f"unknown edge label id {label_id}") from None

    def parameter_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.label_table, self.msg_w, self.self_w


@dataclass
class Gradients:
    label_table: np.ndarray
    msg_w: np.ndarray
    self_w: np.ndarray

    @staticmethod
    def zeros_like(model: Model) -> "Gradients":
        return Gradients(
            np.zeros_like(model.label_table),
            np.zeros_like(model.msg_w),
            np.zeros_like(model.self_w),
        )


def init_model(
    cfg: ModelConfig,
    label_names: Sequence[str] | None = None,
) -> Model:
    """Seed-deterministic initialization.

    Identity-1 message matrices are rescaled to exactly twice the Frobenius
    norm of their identity-0 sibling, so the gap the loss keeps open starts
    strictly positive.
    """
    rng = np.random.default_rng(cfg.seed)
    d, d2 = cfg.dim, cfg.dim // 2
    m, ne = cfg.layers, len(cfg.edge_labels)
    label_table = rng.uniform(0.0, 1.0, size=(len(cfg.vertex_labels), d))
    scale = math.sqrt(6.0 / (d + d2))
    msg_w = rng.uniform(-scale, scale, size=(m, ne, 2, 2, d2, d))
    self_w = rng.uniform(-math.sqrt(3.0 / d), math.sqrt(3.0 / d), size=(m, d, d))
    for k in range(m):
        for r in range(ne):
            for dirn in range(2):
                n0 = np.linalg.norm(msg_w[k, r, 0, dirn])
                n1 = np.linalg.norm(msg_w[k, r, 1, dirn])
                msg_w[k, r, 1, dirn] *= 2.0 * n0 / n1
    return Model(
        config=cfg,
        label_table=label_table,
        msg_w=msg_w,
        self_w=self_w,
        label_names=tuple(label_names) if label_names is not None else None,
    )


def clone_model(model: Model) -> Model:
    return Model(
        config=model.config,
        label_table=model.label_table.copy(),
        msg_w=model.msg_w.copy(),
        self_w=model.self_w.copy(),
        label_names=model.label_names,
        trained_with_filtering=model.trained_with_filtering,
    )


# ---------------------------------------------------------------------------
# forward / backward


def _layer_gates(
    cfg: ModelConfig,
    side: str,
    pattern_cycles: frozenset[int],
    graph_cycles: frozenset[int] | None,
) -> list[bool]:
    """Whether the identity matrix may fire at each layer k=1..m."""
    gates = []
    for k in range(1, cfg.layers + 1):
        if cfg.ignore_cycles:
            ok = True
        elif side == "pattern":
            ok = True if cfg.literal_center_gating else k in pattern_cycles
        else:
            ok = k in pattern_cycles
            if cfg.require_graph_cycles:
                if graph_cycles is None:
                    raise ValueError("graph-side cycle set required but not supplied")
                ok = ok and k in graph_cycles
        gates.append(ok)
    return gates


def _ego_pairs(model: Model, ego: EgoNet) -> list[tuple[int, list[tuple[int, int]]]]:
    """Per edge-label slot: scan-ordered (owner, neighbor) pairs.

    Direction 0 collects incoming neighbors, direction 1 outgoing ones; with
    the direction-blind ablation both directions pool the same union.  Pair
    order is (label, owner, neighbor) ascending, which keeps group discovery
    order stable across mirrored inputs.
    """
    g = ego.graph
    src = g.esrc.astype(np.int64)
    lbl = g.elbl.astype(np.int64)
    dst = g.edst.astype(np.int64)
    out: list[tuple[int, list[tuple[int, int]]]] = []
    for dirn in (0, 1):
        if model.config.ignore_direction:
            owners = np.concatenate([dst, src])
            nbrs = np.concatenate([src, dst])
            labels = np.concatenate([lbl, lbl])
            rows = np.unique(np.stack([labels, owners, nbrs], axis=1), axis=0)
        else:
            owners = dst if dirn == 0 else src
            nbrs = src if dirn == 0 else dst
            order = np.lexsort((nbrs, owners, lbl))
            rows = np.stack([lbl[order], owners[order], nbrs[order]], axis=1)
        per_label: list[tuple[int, list[tuple[int, int]]]] = []
        if len(rows):
            for r in np.unique(rows[:, 0]):
                sel = rows[rows[:, 0] == r]
                slot = model.edge_slot(int(r))
                per_label.append((slot, [(int(o), int(nb)) for _, o, nb in sel]))
        out.append(per_label)  # type: ignore[arg-type]
    return out  # type: ignore[return-value]


def _forward(
    model: Model,
    ego: EgoNet,
    side: str,
    pattern_cycles: frozenset[int],
    graph_cycles: frozenset[int] | None,
    want_trace: bool,
):
    cfg = model.config
    if side not in ("pattern", "graph"):
        raise ValueError(f"side must be 'pattern' or 'graph', got {side!r}")
    if ego.radius != cfg.layers:
        raise ValueError(f"ego radius {ego.radius} != model layers {cfg.layers}")
    g = ego.graph
    rows = [model.vertex_row(int(x)) for x in g.vlabels]
    gates = _layer_gates(cfg, side, pattern_cycles, graph_cycles)
    pairs_by_dir = _ego_pairs(model, ego)

    n, d = g.n, cfg.dim
    d2 = d // 2
    center = ego.center
    h = model.label_table[rows].copy()
    trace_layers = []

    for k in range(cfg.layers):
        gate_ok = gates[k]
        z = np.zeros((n, d))
        wk = model.self_w[k]
        for c in range(n):
            z[c] = wk @ h[c]
        groups: dict[tuple[int, int, int], tuple[list[int], list[int]]] = {}
        h_keys = [h[i].tobytes() for i in range(n)]
        for dirn in (0, 1):
            lo = 0 if dirn == 0 else d2
            hi = d2 if dirn == 0 else d
            for slot, pairs in pairs_by_dir[dirn]:
                if cfg.multiset_aggregation:
                    batch = [
                        (owner, nb, 1 if (gate_ok and nb == center) else 0)
                        for owner, nb in pairs
                    ]
                else:
                    merged: dict[tuple[int, bytes], list[int]] = {}
                    for owner, nb in pairs:
                        key = (owner, h_keys[nb])
                        got = merged.get(key)
                        if got is None:
                            merged[key] = [owner, nb, 1 if nb == center else 0]
                        elif nb == center:
                            got[2] = 1  # the center's identity survives the merge
                    batch = [
                        (owner, nb, bit if gate_ok else 0)
                        for owner, nb, bit in merged.values()
                    ]
                for owner, nb, bit in batch:
                    w = model.msg_w[k, slot, bit, dirn]
                    z[owner, lo:hi] += w @ h[nb]
                    if want_trace:
                        owners, reps = groups.setdefault((dirn, slot, bit), ([], []))
                        owners.append(owner)
                        reps.append(nb)
        h_new = np.maximum(z, 0.0)
        if want_trace:
            packed = {
                key: (np.array(o, dtype=np.int64), np.array(r, dtype=np.int64))
                for key, (o, r) in groups.items()
            }
            trace_layers.append((h, z, packed))
        h = h_new

    return h[center].copy(), trace_layers


def _backward(model: Model, trace_layers, center: int, d_center: np.ndarray, grads: Gradients):
    # Unlike the forward pass, the backward pass may batch matrix products:
    # gradients only need run-to-run determinism, not mirror stability.
    cfg = model.config
    d2 = cfg.dim // 2
    n = trace_layers[0][0].shape[0]
    deltas = np.zeros((n, cfg.dim))
    deltas[center] = d_center
    for k in range(cfg.layers - 1, -1, -1):
        h_prev, z, groups = trace_layers[k]
        dz = np.where(z > 0, deltas, 0.0)
        grads.self_w[k] += dz.T @ h_prev
        nxt = dz @ model.self_w[k]
        for (dirn, slot, bit), (owners, reps) in groups.items():
            lo = 0 if dirn == 0 else d2
            hi = d2 if dirn == 0 else cfg.dim
            delta = dz[owners, lo:hi]
            w = model.msg_w[k, slot, bit, dirn]
            grads.msg_w[k, slot, bit, dirn] += delta.T @ h_prev[reps]
            np.add.at(nxt, reps, delta @ w)
        deltas = nxt
    return deltas  # gradient w.r.t. the initial (layer-0) embeddings


def embed(
    model: Model,
    ego: EgoNet,
    side: str,
    pattern_cycles: frozenset[int] | Iterable[int],
    graph_cycles: frozenset[int] | None = None,
) -> np.ndarray:
    """Embedding of the ego-net center after ``layers`` rounds.

    ``pattern_cycles`` must be the directed-simple-cycle lengths through the
    PATTERN pivot (the same set gates both sides); ``graph_cycles`` is only
    consulted under ``require_graph_cycles``.
    """
    emb, _ = _forward(model, ego, side, frozenset(pattern_cycles), graph_cycles, False)
    return emb


def normalize(e: np.ndarray) -> np.ndarray:
    """Elementwise absolute value divided by the L2 norm; the zero vector is
    returned unchanged (a dead embedding, not an error)."""
    nrm = float(np.linalg.norm(e))
    if nrm == 0.0:
        return np.zeros_like(e)
    return np.abs(e) / nrm


def violation(e_u: np.ndarray, e_v: np.ndarray) -> float:
    """Squared L2 norm of the positive part of e_u - e_v; zero exactly when
    e_u fits under e_v coordinate-wise."""
    if e_u.shape != e_v.shape:
        raise ValueError(f"dimension mismatch: {e_u.shape} vs {e_v.shape}")
    gap = np.maximum(e_u - e_v, 0.0)
    return float(np.dot(gap, gap))


def _pattern_cycles(q: Graph, u: int, layers: int) -> frozenset[int]:
    if layers < 2:
        return frozenset()
    return cycle_lengths(q, u, layers)


def predict(
    model: Model, q: Graph, u: int, g: Graph, v: int
) -> tuple[bool, float]:
    """Anchored decision for pattern pivot u against graph vertex v.

    Returns (accept, score); score is the order-embedding violation, at most
    the configured threshold when accepted.  Label-mismatched anchors are
    rejected with an infinite score.
    """
    cfg = model.config
    if q.vlabels[u] != g.vlabels[v]:
        return False, math.inf
    ego_q = ego_net(q, u, cfg.layers)
    ego_g = ego_net(g, v, cfg.layers)
    pat_cycles = _pattern_cycles(q, u, cfg.layers)
    graph_cycles = None
    if cfg.require_graph_cycles:
        graph_cycles = _pattern_cycles(ego_g.graph, ego_g.center, cfg.layers)
    e_u = embed(model, ego_q, "pattern", pat_cycles)
    e_v = embed(model, ego_g, "graph", pat_cycles, graph_cycles)
    if not cfg.skip_normalization:
        e_u = normalize(e_u)
        e_v = normalize(e_v)
    score = violation(e_u, e_v)
    return score <= cfg.threshold, score


# ---------------------------------------------------------------------------
# loss and training


@dataclass(frozen=True)
class PreparedExample:
    """Static per-example state reused across epochs."""

    ego_q: EgoNet
    ego_g: EgoNet
    pattern_cycles: frozenset[int]
    graph_cycles: frozenset[int] | None
    positive: bool


def prepare_example(
    cfg: ModelConfig, q: Graph, u: int, g: Graph, v: int, positive: bool
) -> PreparedExample:
    graph_cycles = None
    ego_g = ego_net(g, v, cfg.layers)
    if cfg.require_graph_cycles:
        graph_cycles = _pattern_cycles(ego_g.graph, ego_g.center, cfg.layers)
    return PreparedExample(
        ego_q=ego_net(q, u, cfg.layers),
        ego_g=ego_g,
        pattern_cycles=_pattern_cycles(q, u, cfg.layers),
        graph_cycles=graph_cycles,
        positive=positive,
    )


def _example_embeddings(model: Model, ex: PreparedExample, want_trace: bool):
    e_u, tr_u = _forward(
        model, ex.ego_q, "pattern", ex.pattern_cycles, ex.graph_cycles, want_trace
    )
    e_v, tr_v = _forward(
        model, ex.ego_g, "graph", ex.pattern_cycles, ex.graph_cycles, want_trace
    )
    return e_u, tr_u, e_v, tr_v


def _gap_terms(model: Model) -> float:
    total = 0.0
    for k in range(model.config.layers):
        for r in range(len(model.config.edge_labels)):
            n1 = float(np.linalg.norm(model.msg_w[k, r, 1]))
            n0 = float(np.linalg.norm(model.msg_w[k, r, 0]))
            total += 1.0 / max(GAP_EPS, n1 - n0)
    return total


def _gap_grads(model: Model, grads: Gradients) -> None:
    for k in range(model.config.layers):
        for r in range(len(model.config.edge_labels)):
            w1 = model.msg_w[k, r, 1]
            w0 = model.msg_w[k, r, 0]
            n1 = float(np.linalg.norm(w1))
            n0 = float(np.linalg.norm(w0))
            diff = n1 - n0
            if diff > GAP_EPS and n1 > 0 and n0 > 0:
                c = 1.0 / (diff * diff)
                grads.msg_w[k, r, 1] += -c * (w1 / n1)
                grads.msg_w[k, r, 0] += c * (w0 / n0)


def loss_prepared(model: Model, batch: Sequence[PreparedExample]) -> float:
    """Batch loss: positives pay their violation (less the margin), negatives
    pay the hinge up to the margin, plus the reciprocal of each identity-gap
    so identity matrices stay strictly larger.  The plain-loss ablation drops
    the offset and the gap terms."""
    if not batch:
        raise ValueError("empty batch")
    cfg = model.config
    total = 0.0
    for ex in batch:
        e_u, _, e_v, _ = _example_embeddings(model, ex, want_trace=False)
        if not cfg.skip_normalization:
            e_u = normalize(e_u)
            e_v = normalize(e_v)
        score = violation(e_u, e_v)
        if ex.positive:
            total += score if cfg.plain_loss else score - cfg.margin
        else:
            total += max(0.0, cfg.margin - score)
    if not cfg.plain_loss:
        total += _gap_terms(model)
    return total


def loss(
    model: Model,
    batch: Sequence[tuple[Graph, int, Graph, int, str | bool]],
) -> float:
    """Loss over raw (pattern, pivot, graph, anchor, label) tuples; label is
    'positive'/'negative' or a boolean."""
    prepared = [
        prepare_example(
            model.config, q, u, g, v, label in (True, "positive", "pos")
        )
        for q, u, g, v, label in batch
    ]
    return loss_prepared(model, prepared)


def _norm_backward(e_raw: np.ndarray, g_out: np.ndarray) -> np.ndarray:
    nrm = float(np.linalg.norm(e_raw))
    if nrm == 0.0:
        return np.zeros_like(e_raw)
    sign = np.sign(e_raw)
    return sign * g_out / nrm - e_raw * float(np.dot(np.abs(e_raw), g_out)) / nrm**3


def loss_and_grads(
    model: Model, batch: Sequence[PreparedExample]
) -> tuple[float, Gradients]:
    """Loss plus analytic gradients w.r.t. every parameter array.

    Example contributions are accumulated in batch order so results are
    reproducible run to run.
    """
    if not batch:
        raise ValueError("empty batch")
    cfg = model.config
    grads = Gradients.zeros_like(model)
    total = 0.0
    for ex in batch:
        e_u_raw, tr_u, e_v_raw, tr_v = _example_embeddings(model, ex, want_trace=True)
        if cfg.skip_normalization:
            a, b = e_u_raw, e_v_raw
        else:
            a, b = normalize(e_u_raw), normalize(e_v_raw)
        gap = np.maximum(a - b, 0.0)
        score = float(np.dot(gap, gap))
        if ex.positive:
            total += score if cfg.plain_loss else score - cfg.margin
            dscore = 1.0
        else:
            hinge = cfg.margin - score
            total += max(0.0, hinge)
            dscore = -1.0 if hinge > 0 else 0.0
        if dscore != 0.0:
            da = dscore * 2.0 * gap
            db = -da
            if cfg.skip_normalization:
                du, dv = da, db
            else:
                du = _norm_backward(e_u_raw, da)
                dv = _norm_backward(e_v_raw, db)
            d0_u = _backward(model, tr_u, ex.ego_q.center, du, grads)
            d0_v = _backward(model, tr_v, ex.ego_g.center, dv, grads)
            for x in range(ex.ego_q.graph.n):
                grads.label_table[model.vertex_row(int(ex.ego_q.graph.vlabels[x]))] += d0_u[x]
            for x in range(ex.ego_g.graph.n):
                grads.label_table[model.vertex_row(int(ex.ego_g.graph.vlabels[x]))] += d0_v[x]
    if not cfg.plain_loss:
        total += _gap_terms(model)
        _gap_grads(model, grads)
    return total, grads


def train(
    model: Model,
    train_items: Sequence[PreparedExample],
    val_items: Sequence[tuple[PreparedExample | None, bool]],
    epochs: int,
    batch_size: int = 32,
    learning_rate: float = 1e-3,
) -> tuple[Model, list[dict]]:
    """Mini-batch gradient descent with a fixed learning rate.

    ``val_items`` pairs an optional prepared example with its true label;
    None stands for an example already decided negative by candidate pruning
    (it scores as a negative prediction).  Returns the checkpoint with the
    best validation accuracy (ties keep the earlier epoch) and the per-epoch
    history.  Deterministic for a fixed model seed.
    """
    if epochs < 0:
        raise ValueError("epochs must be nonnegative")
    rng = np.random.default_rng(model.config.seed + 0x5EED)
    best = clone_model(model)
    best_key = _validation_key(model, val_items)
    history: list[dict] = []
    n = len(train_items)
    for epoch in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            batch = [train_items[i] for i in order[start : start + batch_size]]
            if not batch:
                continue
            value, grads = loss_and_grads(model, batch)
            if not math.isfinite(value):
                raise TrainingDiverged(epoch)
            epoch_loss += value
            if learning_rate:
                model.label_table -= learning_rate * grads.label_table
                model.msg_w -= learning_rate * grads.msg_w
                model.self_w -= learning_rate * grads.self_w
        key = _validation_key(model, val_items)
        history.append(
            {
                "epoch": epoch,
                "train_loss": epoch_loss / max(1, n),
                "val_accuracy": key[0],
                "val_loss": -key[1],
            }
        )
        if key > best_key:
            best_key = key
            best = clone_model(model)
    return best, history


def _validation_key(
    model: Model, val_items: Sequence[tuple[PreparedExample | None, bool]]
) -> tuple[float, float]:
    """Checkpoint-selection key: validation accuracy, ties broken toward the
    lower validation loss (stored negated so bigger is better)."""
    if not val_items:
        return (0.0, 0.0)
    cfg = model.config
    correct = 0
    val_loss = 0.0
    for ex, label in val_items:
        if ex is None:
            pred = False
        else:
            e_u, _, e_v, _ = _example_embeddings(model, ex, want_trace=False)
            if not cfg.skip_normalization:
                e_u = normalize(e_u)
                e_v = normalize(e_v)
            score = violation(e_u, e_v)
            pred = score <= cfg.threshold
            if label:
                val_loss += score
            else:
                val_loss += max(0.0, cfg.margin - score)
        correct += int(pred == label)
    return (correct / len(val_items), -val_loss)


# ---------------------------------------------------------------------------
# dataset-level preparation and training


def prepare_anchored(
    cfg: ModelConfig,
    q: Graph,
    u: int,
    g: Graph,
    v: int,
    positive: bool,
    dualsim_iters: int | None = 2,
    use_filtering: bool = True,
) -> PreparedExample | None:
    """Prepare one anchored example the way the pipeline evaluates it.

    With filtering on, the graph is first pruned by dual simulation; None
    means pruning already decided the example negative (empty candidate set,
    or the anchor itself removed), so no embedding exists for it.
    """
    if use_filtering:
        cm = dual_sim(q, g, dualsim_iters)
        if cm.is_empty() or v not in cm.candidates[u]:
            return None
        sub, origins = filter_graph(g, cm)
        v = bisect_left(origins, v)
        g = sub
    return prepare_example(cfg, q, u, g, v, positive)


def prepare_dataset(
    model: Model,
    dataset: "Dataset",
    dualsim_iters: int | None = 2,
    use_filtering: bool = True,
) -> dict[str, list[tuple[PreparedExample | None, bool]]]:
    """Prepare every split of a dataset for training and evaluation."""
    out: dict[str, list[tuple[PreparedExample | None, bool]]] = {}
    for split, idxs in dataset.splits.items():
        items = []
        for i in idxs:
            ex = dataset.examples[i]
            positive = ex.label == "positive"
            prep = prepare_anchored(
                model.config,
                ex.pattern,
                ex.pivot,
                ex.graph,
                ex.anchor,
                positive,
                dualsim_iters,
                use_filtering,
            )
            items.append((prep, positive))
        out[split] = items
    return out


def train_on_dataset(
    model: Model,
    dataset: "Dataset",
    epochs: int,
    batch_size: int = 32,
    learning_rate: float = 1e-3,
    dualsim_iters: int | None = 2,
    use_filtering: bool = True,
) -> tuple[Model, list[dict]]:
    """Train on a dataset's train split, selecting by val-split accuracy.

    Examples the pruning stage already decides are excluded from gradient
    batches (their verdict never reaches the model) but still count in the
    validation score.  The returned checkpoint is stamped with the filtering
    mode so later evaluation cannot silently mismatch it.
    """
    prep = prepare_dataset(model, dataset, dualsim_iters, use_filtering)
    train_items = [p for p, _label in prep.get("train", []) if p is not None]
    val_items = prep.get("val", [])
    model.trained_with_filtering = use_filtering
    best, history = train(
        model, train_items, val_items, epochs, batch_size, learning_rate
    )
    best.trained_with_filtering = use_filtering
    return best, history


# ---------------------------------------------------------------------------
# checkpoint I/O


def save_model(model: Model, path: str) -> None:
    """Versioned JSON checkpoint.

    Matrices are stored row-major with shape headers; floats use Python's
    shortest round-trip decimal form (at most 17 significant digits), so a
    load reproduces every parameter bit-exactly.
    """
    def arr(a: np.ndarray) -> dict:
        return {"shape": list(a.shape), "data": [float(x) for x in a.ravel()]}

    doc = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": asdict(model.config),
        "label_names": list(model.label_names) if model.label_names else None,
        "trained_with_filtering": model.trained_with_filtering,
        "arrays": {
            "label_table": arr(model.label_table),
            "msg_w": arr(model.msg_w),
            "self_w": arr(model.self_w),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_model(path: str) -> Model:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a model checkpoint: {path}")
    if doc.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {doc.get('version')}")
    raw = dict(doc["config"])
    raw["vertex_labels"] = tuple(raw["vertex_labels"])
    raw["edge_labels"] = tuple(raw["edge_labels"])
    cfg = ModelConfig(**raw)

    def arr(spec: dict) -> np.ndarray:
        return np.array(spec["data"], dtype=np.float64).reshape(spec["shape"])

    return Model(
        config=cfg,
        label_table=arr(doc["arrays"]["label_table"]),
        msg_w=arr(doc["arrays"]["msg_w"]),
        self_w=arr(doc["arrays"]["self_w"]),
        label_names=tuple(doc["label_names"]) if doc.get("label_names") else None,
        trained_with_filtering=doc.get("trained_with_filtering"),
    )
