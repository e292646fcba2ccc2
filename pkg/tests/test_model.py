"""Verifier model: initialization, embedding semantics, prediction, loss,
training behavior, checkpoint I/O."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hframe import fixtures as fx
from hframe.graph import Graph, LabelDict, build_graph, cycle_lengths, ego_net
from hframe.model import (
    GAP_EPS,
    Gradients,
    Model,
    ModelConfig,
    TrainingDiverged,
    clone_model,
    embed,
    init_model,
    load_model,
    loss,
    loss_prepared,
    loss_and_grads,
    normalize,
    predict,
    prepare_example,
    save_model,
    train,
    violation,
)

from conftest import connected_pattern


def small_cfg(ld: LabelDict, **kw) -> ModelConfig:
    defaults = dict(
        vertex_labels=tuple(ld.id_of(x) for x in ("a",) if x in ld),
        edge_labels=tuple(ld.id_of(x) for x in ("r",) if x in ld),
        layers=3,
        dim=8,
        seed=7,
    )
    defaults.update(kw)
    return ModelConfig(**defaults)


# -- config and init ---------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError, match="even"):
        ModelConfig(vertex_labels=(0,), edge_labels=(1,), dim=7)
    with pytest.raises(ValueError, match="layer"):
        ModelConfig(vertex_labels=(0,), edge_labels=(1,), layers=0)
    with pytest.raises(ValueError, match="nonempty"):
        ModelConfig(vertex_labels=(), edge_labels=(1,))
    with pytest.raises(ValueError, match="margin"):
        ModelConfig(vertex_labels=(0,), edge_labels=(1,), margin=0.0)


def test_init_is_seed_deterministic():
    cfg = ModelConfig(vertex_labels=(0, 1), edge_labels=(2,), layers=2, dim=4, seed=9)
    a, b = init_model(cfg), init_model(cfg)
    assert np.array_equal(a.label_table, b.label_table)
    assert np.array_equal(a.msg_w, b.msg_w)
    assert np.array_equal(a.self_w, b.self_w)
    c = init_model(ModelConfig(vertex_labels=(0, 1), edge_labels=(2,), layers=2, dim=4, seed=10))
    assert not np.array_equal(a.msg_w, c.msg_w)


def test_identity_matrices_start_twice_as_large():
    cfg = ModelConfig(vertex_labels=(0,), edge_labels=(1, 2, 3), layers=4, dim=16, seed=3)
    m = init_model(cfg)
    for k in range(4):
        for r in range(3):
            n0 = np.linalg.norm(m.msg_w[k, r, 0])
            n1 = np.linalg.norm(m.msg_w[k, r, 1])
            assert n1 > n0
            assert n1 == pytest.approx(2 * n0, rel=1e-12)


# -- embedding semantics -----------------------------------------------------


def test_duplicate_branches_collapse_bitwise():
    fork, edge, ld = fx.fork_and_edge()
    for seed in (0, 1, 2, 3):
        m = init_model(small_cfg(ld, seed=seed))
        e_fork = embed(m, ego_net(fork, 0, 3), "pattern", frozenset())
        e_edge = embed(m, ego_net(edge, 0, 3), "graph", frozenset())
        assert np.array_equal(e_fork, e_edge)


def test_multiset_ablation_breaks_collapse():
    fork, edge, ld = fx.fork_and_edge()
    m = init_model(small_cfg(ld, multiset_aggregation=True))
    e_fork = embed(m, ego_net(fork, 0, 3), "pattern", frozenset())
    e_edge = embed(m, ego_net(edge, 0, 3), "graph", frozenset())
    assert not np.array_equal(e_fork, e_edge)


def test_isolated_vertex_is_self_transform_chain():
    ld = LabelDict()
    g = build_graph(["a"], [], ld)
    ld.intern("r")
    cfg = small_cfg(ld)
    m = init_model(cfg)
    got = embed(m, ego_net(g, 0, cfg.layers), "pattern", frozenset())
    h = m.label_table[m.vertex_row(ld.id_of("a"))]
    for k in range(cfg.layers):
        h = np.maximum(m.self_w[k] @ h, 0.0)
    assert np.array_equal(got, h)


def test_cycle_gate_off_never_touches_identity_weights():
    ld = LabelDict()
    g = build_graph(["a", "a", "a"], [(0, "r", 1), (1, "r", 2), (2, "r", 0)], ld)
    # one layer beyond the cycle length so the gated messages can propagate
    # back to the center before the final round
    cfg = small_cfg(ld, layers=4)
    m = init_model(cfg)
    ego = ego_net(g, 0, cfg.layers)
    base = embed(m, ego, "pattern", frozenset())  # no gating: cycle set empty
    poisoned = clone_model(m)
    poisoned.msg_w[:, :, 1, :] = 1e6  # junk the identity matrices
    assert np.array_equal(base, embed(poisoned, ego, "pattern", frozenset()))
    # with the true cycle set the identity matrices do fire
    cyc = cycle_lengths(g, 0, cfg.layers)
    assert cyc == frozenset({3})
    assert not np.array_equal(
        embed(m, ego, "pattern", cyc), embed(poisoned, ego, "pattern", cyc)
    )


def test_ignore_cycles_ablation_gates_on_center_alone():
    ld = LabelDict()
    g = build_graph(["a", "a"], [(0, "r", 1), (1, "r", 0)], ld)
    m_on = init_model(small_cfg(ld, ignore_cycles=True))
    m_off = init_model(small_cfg(ld))
    ego = ego_net(g, 0, 3)
    # empty pattern-cycle set: the ablation still uses identity weights
    a = embed(m_on, ego, "pattern", frozenset())
    b = embed(m_off, ego, "pattern", frozenset())
    assert not np.array_equal(a, b)


def test_literal_center_gating_affects_pattern_side_only():
    ld = LabelDict()
    g = build_graph(["a", "a"], [(0, "r", 1), (1, "r", 0)], ld)
    ego = ego_net(g, 0, 3)
    m_lit = init_model(small_cfg(ld, literal_center_gating=True))
    m_def = init_model(small_cfg(ld))
    assert not np.array_equal(
        embed(m_lit, ego, "pattern", frozenset()),
        embed(m_def, ego, "pattern", frozenset()),
    )
    assert np.array_equal(
        embed(m_lit, ego, "graph", frozenset()),
        embed(m_def, ego, "graph", frozenset()),
    )


def test_embed_validates_radius_and_labels():
    ld = LabelDict()
    g = build_graph(["a", "a"], [(0, "r", 1)], ld)
    m = init_model(small_cfg(ld))
    with pytest.raises(ValueError, match="radius"):
        embed(m, ego_net(g, 0, 2), "pattern", frozenset())
    g2 = build_graph(["zzz", "a"], [(0, "r", 1)], ld)
    with pytest.raises(ValueError, match="unknown vertex label"):
        embed(m, ego_net(g2, 0, 3), "pattern", frozenset())


# -- normalize / violation ---------------------------------------------------


def test_normalize_hand_example():
    out = normalize(np.array([3.0, -4.0]))
    assert np.allclose(out, [0.6, 0.8])
    unit = np.array([0.6, 0.8])
    assert np.allclose(normalize(unit), unit)


def test_normalize_zero_vector():
    z = normalize(np.zeros(4))
    assert np.array_equal(z, np.zeros(4))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=2, max_size=16))
def test_normalize_properties(vals):
    e = np.array(vals)
    out = normalize(e)
    if np.linalg.norm(e) == 0:
        assert np.array_equal(out, np.zeros_like(e))
    else:
        assert np.all(out >= 0)
        assert abs(np.linalg.norm(out) - 1.0) <= 1e-6


def test_violation_examples():
    assert violation(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0
    assert violation(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 1.0
    assert violation(np.array([0.5, 0.2]), np.array([0.6, 0.2])) == 0.0


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(-5, 5, allow_nan=False), min_size=2, max_size=8),
    st.lists(st.floats(0.001, 5, allow_nan=False), min_size=2, max_size=8),
)
def test_violation_zero_iff_containment(base, bumps):
    n = min(len(base), len(bumps))
    a = np.array(base[:n])
    b = a + np.array(bumps[:n])
    assert violation(a, b) == 0.0  # a <= b everywhere
    assert violation(b, a) > 0.0  # strictly above somewhere


def test_violation_dim_mismatch():
    with pytest.raises(ValueError):
        violation(np.zeros(3), np.zeros(4))


# -- predict -----------------------------------------------------------------


def test_predict_identical_egos_scores_zero():
    ld = LabelDict()
    g = build_graph(["a", "a", "a"], [(0, "r", 1), (1, "r", 2)], ld)
    m = init_model(small_cfg(ld))
    ok, score = predict(m, g, 0, g, 0)
    assert ok and score == 0.0


def test_predict_label_mismatch():
    ld = LabelDict()
    q = build_graph(["a"], [], ld)
    g = build_graph(["b"], [], ld)
    m = init_model(
        ModelConfig(
            vertex_labels=(ld.id_of("a"), ld.id_of("b")),
            edge_labels=(ld.intern("r"),),
            layers=2,
            dim=4,
        )
    )
    ok, score = predict(m, q, 0, g, 0)
    assert not ok and math.isinf(score)


def test_zero_threshold_boundary():
    ld = LabelDict()
    fork = fx.fork_pattern(ld)
    iso = build_graph(["a"], [], ld)
    m = init_model(small_cfg(ld, threshold=0.0, seed=12))
    ok, score = predict(m, fork, 0, iso, 0)
    # generic weights give a strictly positive violation; t=0 rejects it
    assert score > 0.0 and not ok


# -- loss --------------------------------------------------------------------


def _gap_total(model):
    total = 0.0
    for k in range(model.config.layers):
        for r in range(len(model.config.edge_labels)):
            n1 = np.linalg.norm(model.msg_w[k, r, 1])
            n0 = np.linalg.norm(model.msg_w[k, r, 0])
            total += 1.0 / max(GAP_EPS, n1 - n0)
    return total


def test_loss_positive_at_zero_violation():
    ld = LabelDict()
    g = build_graph(["a", "a"], [(0, "r", 1)], ld)
    m = init_model(small_cfg(ld))
    got = loss(m, [(g, 0, g, 0, "positive")])
    assert got == pytest.approx(-m.config.margin + _gap_total(m), rel=1e-12)


def test_loss_saturated_negative_contributes_only_gap_terms():
    ld = LabelDict()
    fork = fx.fork_pattern(ld)
    iso = build_graph(["a"], [], ld)
    m = init_model(small_cfg(ld, margin=0.01, seed=12))
    _, score = predict(m, fork, 0, iso, 0)
    assert score >= 0.01  # the hinge is saturated for this pair
    got = loss(m, [(fork, 0, iso, 0, "negative")])
    assert got == pytest.approx(_gap_total(m), rel=1e-12)


def test_plain_loss_ablation_drops_offset_and_gap():
    ld = LabelDict()
    g = build_graph(["a", "a"], [(0, "r", 1)], ld)
    m = init_model(small_cfg(ld, plain_loss=True))
    assert loss(m, [(g, 0, g, 0, "positive")]) == 0.0


def test_loss_rejects_empty_batch():
    m = init_model(small_cfg(LabelDict(["a", "r"])))
    with pytest.raises(ValueError):
        loss_prepared(m, [])


# -- training ----------------------------------------------------------------


def _toy_items(ld, cfg, n_pairs=20, seed=0):
    rng = np.random.default_rng(seed)
    items = []
    for i in range(n_pairs):
        g = connected_pattern(5, 2, 1, 1, seed=int(rng.integers(2**31)), label_dict=ld)
        q = connected_pattern(3, 1, 1, 1, seed=int(rng.integers(2**31)), label_dict=ld)
        positive = i % 4 == 0
        items.append(prepare_example(cfg, q, 0, g, 0, positive))
    return items


def test_training_loss_decreases_over_first_epochs():
    ld = LabelDict(["A0", "r0"])
    cfg = ModelConfig(
        vertex_labels=(ld.id_of("A0"),), edge_labels=(ld.id_of("r0"),),
        layers=3, dim=8, seed=7,
    )
    m = init_model(cfg)
    items = _toy_items(ld, cfg)
    val = [(it, it.positive) for it in items[:5]]
    _best, hist = train(m, items, val, epochs=12, batch_size=5, learning_rate=1e-3)
    losses = [h["train_loss"] for h in hist]
    for i in range(10):
        assert losses[i + 1] < losses[i], losses[: i + 2]


def test_zero_learning_rate_keeps_parameters():
    ld = LabelDict(["A0", "r0"])
    cfg = ModelConfig(
        vertex_labels=(ld.id_of("A0"),), edge_labels=(ld.id_of("r0"),),
        layers=2, dim=4, seed=1,
    )
    m = init_model(cfg)
    before = (m.label_table.copy(), m.msg_w.copy(), m.self_w.copy())
    items = _toy_items(ld, cfg, n_pairs=6)
    train(m, items, [(items[0], items[0].positive)], epochs=3, batch_size=3, learning_rate=0.0)
    assert np.array_equal(m.label_table, before[0])
    assert np.array_equal(m.msg_w, before[1])
    assert np.array_equal(m.self_w, before[2])


def test_training_is_deterministic():
    ld = LabelDict(["A0", "r0"])
    cfg = ModelConfig(
        vertex_labels=(ld.id_of("A0"),), edge_labels=(ld.id_of("r0"),),
        layers=2, dim=4, seed=5,
    )
    items = _toy_items(ld, cfg, n_pairs=8)
    val = [(items[0], items[0].positive)]
    out = []
    for _ in range(2):
        m = init_model(cfg)
        best, hist = train(m, items, val, epochs=4, batch_size=4, learning_rate=1e-3)
        out.append((best, hist))
    assert np.array_equal(out[0][0].msg_w, out[1][0].msg_w)
    assert out[0][1] == out[1][1]


def test_identity_gap_stays_positive_after_training():
    ld = LabelDict(["A0", "r0"])
    cfg = ModelConfig(
        vertex_labels=(ld.id_of("A0"),), edge_labels=(ld.id_of("r0"),),
        layers=2, dim=8, seed=2,
    )
    m = init_model(cfg)
    items = _toy_items(ld, cfg, n_pairs=12)
    best, _ = train(m, items, [(items[0], True)], epochs=10, batch_size=4, learning_rate=3e-3)
    for k in range(cfg.layers):
        for r in range(len(cfg.edge_labels)):
            gap = np.linalg.norm(best.msg_w[k, r, 1]) - np.linalg.norm(best.msg_w[k, r, 0])
            assert gap > 0.0


def test_divergence_is_reported_with_epoch():
    ld = LabelDict(["A0", "r0"])
    cfg = ModelConfig(
        vertex_labels=(ld.id_of("A0"),), edge_labels=(ld.id_of("r0"),),
        layers=2, dim=4, seed=3, skip_normalization=True,
    )
    m = init_model(cfg)
    # blow the parameters up so the very first batch loss overflows
    m.self_w *= 1e200
    items = _toy_items(ld, cfg, n_pairs=6)
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(TrainingDiverged) as err:
            train(m, items, [], epochs=3, batch_size=6, learning_rate=1e-3)
    assert err.value.epoch == 0


# -- checkpoint I/O ----------------------------------------------------------


def test_checkpoint_roundtrip_is_bit_exact(tmp_path):
    ld = LabelDict(["a", "r", "s"])
    cfg = ModelConfig(
        vertex_labels=(ld.id_of("a"),),
        edge_labels=(ld.id_of("r"), ld.id_of("s")),
        layers=3,
        dim=6,
        seed=4,
    )
    m = init_model(cfg, label_names=ld.names)
    m.trained_with_filtering = True
    path = str(tmp_path / "model.json")
    save_model(m, path)
    back = load_model(path)
    assert back.config == m.config
    assert back.label_names == ld.names
    assert back.trained_with_filtering is True
    assert np.array_equal(back.label_table, m.label_table)
    assert np.array_equal(back.msg_w, m.msg_w)
    assert np.array_equal(back.self_w, m.self_w)


def test_checkpoint_rejects_wrong_format(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "something-else"}', encoding="utf-8")
    with pytest.raises(ValueError, match="not a model checkpoint"):
        load_model(str(path))


def test_gradients_container_shapes():
    ld = LabelDict(["a", "r"])
    m = init_model(small_cfg(ld))
    g = Gradients.zeros_like(m)
    assert g.label_table.shape == m.label_table.shape
    assert g.msg_w.shape == m.msg_w.shape
    assert g.self_w.shape == m.self_w.shape
