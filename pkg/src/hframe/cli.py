"""Command-line surface.

Subcommands: gen-graph, gen-data, train, eval, decide, enumerate, dualsim,
bench, fixtures, bench-cores.  Exit codes: 0 success, 1 operational error,
2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from time import monotonic

import numpy as np

from hframe import bench as benchmod
from hframe import core, datagen, fixtures as fx
from hframe.dualsim import dual_sim
from hframe.exact import Verdict, hom_decide, hom_enumerate
from hframe.graph import GraphFormatError, LabelDict, load_graph, write_graph
from hframe.model import (
    Model,
    ModelConfig,
    TrainingDiverged,
    init_model,
    load_model,
    save_model,
    train_on_dataset,
)
from hframe.pipeline import PipelineConfig, PipelineError, decide as pipeline_decide

ABLATIONS = ("ws", "ms", "wd", "wn", "wc", "wg")


def _shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--layers", type=int, default=5)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--margin", type=float, default=1.5)
    p.add_argument("--threshold", type=float, default=0.1)
    p.add_argument("--dualsim-iters", type=int, default=2)
    p.add_argument("--timeout-secs", type=float, default=30.0)
    p.add_argument(
        "--ablate",
        choices=ABLATIONS,
        action="append",
        default=[],
        help="ws=skip pruning, ms=multiset, wd=no direction, wn=no normalization, "
        "wc=no cycle gating, wg=plain loss",
    )


def _dataset_label_ids(ds: datagen.Dataset) -> tuple[tuple[int, ...], tuple[int, ...]]:
    vl: set[int] = set()
    el: set[int] = set()
    for ex in ds.examples:
        vl.update(ex.pattern.vertex_label_ids)
        vl.update(ex.graph.vertex_label_ids)
        el.update(ex.pattern.edge_label_ids)
        el.update(ex.graph.edge_label_ids)
    return tuple(sorted(vl)), tuple(sorted(el))


def _model_config(args, ds: datagen.Dataset) -> ModelConfig:
    vl, el = _dataset_label_ids(ds)
    ab = set(args.ablate)
    return ModelConfig(
        vertex_labels=vl,
        edge_labels=el,
        layers=args.layers,
        dim=args.dim,
        margin=args.margin,
        threshold=args.threshold,
        multiset_aggregation="ms" in ab,
        ignore_direction="wd" in ab,
        skip_normalization="wn" in ab,
        ignore_cycles="wc" in ab,
        plain_loss="wg" in ab,
        seed=args.seed,
    )


def cmd_gen_graph(args) -> int:
    g = datagen.gen_synthetic_graph(
        args.vertices, args.edges, args.labels, args.seed, connected=not args.disconnected
    )
    write_graph(g, args.out)
    print(f"wrote {args.out}: {g.n} vertices, {g.num_edges} edges")
    return 0


def cmd_gen_data(args) -> int:
    g = load_graph(args.graph)
    ds = datagen.build_dataset(
        g,
        args.examples,
        args.seed,
        min_depth=args.min_depth,
        max_depth=args.max_depth,
        level_cap=args.level_cap,
        min_pattern=args.min_pattern,
        max_pattern=args.max_pattern,
        verify_timeout=args.verify_timeout,
    )
    datagen.save_dataset(ds, args.out)
    n_pos = sum(1 for ex in ds.examples if ex.label == "positive")
    print(f"wrote {args.out}: {len(ds.examples)} examples ({n_pos} positive), splits "
          + ", ".join(f"{k}={len(v)}" for k, v in ds.splits.items()))
    return 0


def cmd_train(args) -> int:
    ds = datagen.load_dataset(args.data)
    cfg = _model_config(args, ds)
    model = init_model(cfg, label_names=ds.label_dict.names)
    use_filtering = "ws" not in set(args.ablate)
    t0 = monotonic()
    best, history = train_on_dataset(
        model,
        ds,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        dualsim_iters=args.dualsim_iters,
        use_filtering=use_filtering,
    )
    save_model(best, args.out)
    last = history[-1] if history else {}
    print(
        f"trained {args.epochs} epochs in {monotonic() - t0:.1f}s; "
        f"final loss {last.get('train_loss', float('nan')):.4f}, "
        f"best val accuracy {max((h['val_accuracy'] for h in history), default=0.0):.3f}; "
        f"saved {args.out}"
    )
    if args.history_out:
        with open(args.history_out, "w", encoding="utf-8") as fh:
            json.dump(history, fh, indent=1)
            fh.write("\n")
    return 0


def cmd_eval(args) -> int:
    ds = datagen.load_dataset(args.data)
    model = load_model(args.model)
    report = benchmod.run_bench(
        ds,
        ["hframe"],
        model=model,
        timeout=args.timeout_secs,
        dualsim_iters=args.dualsim_iters,
        reps=args.reps,
        split=args.split,
    )
    sys.stdout.write(report.to_tsv())
    return 0


def cmd_decide(args) -> int:
    model = load_model(args.model)
    # adopt the model's interning order so label ids line up
    ld = LabelDict(model.label_names or ())
    q = load_graph(args.pattern, ld)
    g = load_graph(args.graph, ld)
    cfg = PipelineConfig(
        model=model,
        dualsim_iters=args.dualsim_iters,
        skip_dualsim="ws" in set(args.ablate),
        candidate_cap=args.candidate_cap,
        threshold=args.threshold if args.override_threshold else None,
    )
    verdict, diag = pipeline_decide(q, g, cfg)
    print("true" if verdict else "false")
    if args.verbose:
        print(f"decided-by: {diag.decided_by}; scored {diag.candidates_scored} candidates; "
              f"stages {diag.stage_seconds}", file=sys.stderr)
    return 0


def cmd_enumerate(args) -> int:
    ld = LabelDict()
    q = load_graph(args.pattern, ld)
    g = load_graph(args.graph, ld)
    anchor = tuple(args.anchor) if args.anchor else None
    mappings = hom_enumerate(q, g, limit=args.limit, anchor=anchor, timeout=args.timeout_secs)
    print(len(mappings))
    for phi in mappings:
        print(" ".join(f"{u}->{phi[u]}" for u in sorted(phi)))
    return 0


def cmd_dualsim(args) -> int:
    ld = LabelDict()
    q = load_graph(args.pattern, ld)
    g = load_graph(args.graph, ld)
    iters = None if args.fixpoint else args.dualsim_iters
    cm = dual_sim(q, g, iters, label_aware=not args.label_blind)
    print(f"sweeps {cm.iterations_run}")
    for u in range(q.n):
        cand = sorted(cm.candidates[u])
        line = f"C({u}) size {len(cand)}"
        if args.show_sets:
            line += ": " + " ".join(map(str, cand))
        print(line)
    return 0 if not cm.is_empty() else 0


def cmd_bench(args) -> int:
    ds = datagen.load_dataset(args.data)
    model = load_model(args.model) if args.model else None
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    report = benchmod.run_bench(
        ds,
        methods,
        model=model,
        timeout=args.timeout_secs,
        dualsim_iters=args.dualsim_iters,
        reps=args.reps,
        split=args.split,
    )
    sys.stdout.write(report.to_tsv())
    if args.out_prefix:
        with open(args.out_prefix + ".tsv", "w", encoding="utf-8") as fh:
            fh.write(report.to_tsv())
        with open(args.out_prefix + ".json", "w", encoding="utf-8") as fh:
            json.dump(report.as_dict(), fh, indent=1)
            fh.write("\n")
    return 0


def cmd_fixtures(args) -> int:
    results = benchmod.fixtures()
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: {r.detail}")
        failed += 0 if r.passed else 1
    return 1 if failed else 0


def cmd_bench_cores(args) -> int:
    backends = core.backends()
    if len(backends) < 2:
        print("only one backend available:", ", ".join(backends), file=sys.stderr)
    rng = np.random.default_rng(args.seed)
    g = datagen.gen_synthetic_graph(args.vertices, args.edges, args.labels, args.seed)
    patterns = []
    for i in range(args.queries):
        ex = datagen.sample_positive(
            g, rng.integers(2**32), min_depth=2, max_depth=4, min_pattern=4, max_pattern=8
        )
        patterns.append(ex.pattern)
    print(f"graph: {g.n} vertices {g.num_edges} edges; {len(patterns)} query patterns")
    print("backend\tdualsim_s\texact_s")
    for name, impl in sorted(backends.items()):
        saved = core.dualsim_run, core.hom_search
        core.dualsim_run, core.hom_search = impl.dualsim_run, impl.hom_search
        try:
            t0 = monotonic()
            for q in patterns:
                dual_sim(q, g, iters=2)
            t_ds = monotonic() - t0
            t0 = monotonic()
            for q in patterns:
                hom_decide(q, g, timeout=args.timeout_secs)
            t_ex = monotonic() - t0
        finally:
            core.dualsim_run, core.hom_search = saved
        print(f"{name}\t{t_ds:.4f}\t{t_ex:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="hframe",
        description="Subgraph homomorphism: exact search, dual-simulation pruning, "
        "and a learned order-embedding verifier.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a random labeled graph")
    p.add_argument("--vertices", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--labels", type=int, default=10)
    p.add_argument("--disconnected", action="store_true")
    p.add_argument("--out", required=True)
    _shared_flags(p)
    p.set_defaults(func=cmd_gen_graph)

    p = sub.add_parser("gen-data", help="sample an oracle-labeled dataset from a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--examples", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-depth", type=int, default=5)
    p.add_argument("--max-depth", type=int, default=10)
    p.add_argument("--level-cap", type=int, default=60)
    p.add_argument("--min-pattern", type=int, default=datagen.PATTERN_MIN)
    p.add_argument("--max-pattern", type=int, default=datagen.PATTERN_MAX)
    p.add_argument("--verify-timeout", type=float, default=5.0)
    _shared_flags(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train the verifier on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--history-out", default=None)
    _shared_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a trained model on a dataset split")
    p.add_argument("--data", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--reps", type=int, default=1)
    _shared_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("decide", help="approximate decision for one pattern/graph pair")
    p.add_argument("--pattern", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--candidate-cap", type=int, default=None)
    p.add_argument("--override-threshold", action="store_true",
                   help="use --threshold instead of the model's stored threshold")
    p.add_argument("--verbose", action="store_true")
    _shared_flags(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("enumerate", help="enumerate homomorphic mappings exactly")
    p.add_argument("--pattern", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--anchor", type=int, nargs=2, metavar=("U", "V"), default=None)
    _shared_flags(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("dualsim", help="print pruned candidate sets")
    p.add_argument("--pattern", required=True)
    p.add_argument("--graph", required=True)
    p.add_argument("--fixpoint", action="store_true")
    p.add_argument("--label-blind", action="store_true")
    p.add_argument("--show-sets", action="store_true")
    _shared_flags(p)
    p.set_defaults(func=cmd_dualsim)

    p = sub.add_parser("bench", help="benchmark methods on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--methods", default="exact,dualsim-only,hframe")
    p.add_argument("--split", default="test", choices=["train", "val", "test"])
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out-prefix", default=None)
    _shared_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("fixtures", help="run the built-in demonstration suite")
    _shared_flags(p)
    p.set_defaults(func=cmd_fixtures)

    p = sub.add_parser("bench-cores", help="compare compiled and pure-Python kernels")
    p.add_argument("--vertices", type=int, default=2000)
    p.add_argument("--edges", type=int, default=5000)
    p.add_argument("--labels", type=int, default=8)
    p.add_argument("--queries", type=int, default=10)
    _shared_flags(p)
    p.set_defaults(func=cmd_bench_cores)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        OSError,
        ValueError,
        GraphFormatError,
        PipelineError,
        TrainingDiverged,
        datagen.SamplingExhausted,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
