"""Synthetic graph generation and oracle-labeled example sampling.

Positive anchored examples are carved out of a data graph: a bounded BFS
region becomes the example graph, a connected induced subgraph of it becomes
the pattern, pattern vertices are randomly duplicated (which is exactly what
a non-injective mapping absorbs), and the pivot is anchored at the vertex it
came from.  Negatives perturb a positive by adding a pattern edge or moving
the anchor.  Every label is verified with the exact matcher before an
example is accepted; unverifiable samples are discarded, never guessed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from hframe.exact import Verdict, hom_decide
from hframe.graph import Graph, LabelDict, induce, load_graph, write_graph

__all__ = [
    "SamplingExhausted",
    "Example",
    "Dataset",
    "gen_synthetic_graph",
    "sample_positive",
    "sample_negative",
    "build_dataset",
    "save_dataset",
    "load_dataset",
]

PATTERN_MIN = 3
PATTERN_MAX = 20


class SamplingExhausted(RuntimeError):
    """Retry budget ran out before a verifiable example was found."""


@dataclass
class Example:
    """Anchored tuple: does some homomorphism send ``pivot`` to ``anchor``?
    The stored label is oracle-verified at sampling time."""

    pattern: Graph
    pivot: int
    graph: Graph
    anchor: int
    label: str  # "positive" | "negative"
    provenance: dict = field(default_factory=dict)


@dataclass
class Dataset:
    examples: list[Example]
    splits: dict[str, list[int]]
    label_dict: LabelDict


def gen_synthetic_graph(
    n_vertices: int,
    n_edges: int,
    n_labels: int,
    seed,
    connected: bool = True,
    label_dict: LabelDict | None = None,
    n_vertex_labels: int | None = None,
    n_edge_labels: int | None = None,
) -> Graph:
    """Uniform random directed graph with ``n_labels`` vertex labels and
    ``n_labels`` edge labels, deterministic per seed.

    With ``connected=True`` a random spanning backbone is laid down first,
    so ``n_edges >= n_vertices - 1`` is required.  Self-loops are not
    generated; edge triples are distinct.  The per-kind label counts can be
    overridden to skew how much pruning vertex labels alone achieve.
    """
    nv_lab = n_labels if n_vertex_labels is None else n_vertex_labels
    ne_lab = n_labels if n_edge_labels is None else n_edge_labels
    if n_vertices < 1:
        raise ValueError("need at least one vertex")
    if nv_lab < 1 or ne_lab < 1:
        raise ValueError("need at least one label")
    if connected and n_edges < n_vertices - 1:
        raise ValueError("connectivity needs at least n_vertices - 1 edges")
    if n_edges > n_vertices * (n_vertices - 1) * ne_lab:
        raise ValueError("more edges requested than distinct triples exist")
    ld = label_dict if label_dict is not None else LabelDict()
    vpool = [ld.intern(f"A{i}") for i in range(nv_lab)]
    epool = [ld.intern(f"r{i}") for i in range(ne_lab)]
    rng = np.random.default_rng(seed)
    vlabels = [vpool[i] for i in rng.integers(0, nv_lab, size=n_vertices)]
    edges: set[tuple[int, int, int]] = set()
    if connected:
        for i in range(1, n_vertices):
            p = int(rng.integers(0, i))
            r = epool[int(rng.integers(0, n_labels))]
            s, d = (p, i) if int(rng.integers(0, 2)) == 0 else (i, p)
            edges.add((s, r, d))
    while len(edges) < n_edges:
        s = int(rng.integers(0, n_vertices))
        d = int(rng.integers(0, n_vertices))
        if s == d:
            continue
        r = epool[int(rng.integers(0, n_labels))]
        edges.add((s, r, d))
    return Graph(n_vertices, vlabels, sorted(edges), ld)


def _bfs_region(g: Graph, root: int, depth: int, level_cap: int, rng) -> tuple[list[int], int]:
    """Level-bounded undirected BFS; wide levels are subsampled to keep the
    region desk-sized.  Returns (vertices, levels actually expanded)."""
    visited = {root}
    frontier = [root]
    levels = 0
    for _ in range(depth):
        nxt: list[int] = []
        seen_here = set()
        for u in frontier:
            for w in g.undirected_neighbors(u):
                w = int(w)
                if w not in visited and w not in seen_here:
                    seen_here.add(w)
                    nxt.append(w)
        if not nxt:
            break
        nxt.sort()
        if len(nxt) > level_cap:
            nxt = sorted(rng.choice(nxt, size=level_cap, replace=False).tolist())
        visited.update(nxt)
        frontier = nxt
        levels += 1
    return sorted(visited), levels


def _extract_pattern(gp: Graph, rng, min_pattern: int, max_pattern: int):
    """Random BFS tree inside the region plus all induced edges among the
    selected vertices; returns (pattern graph, pattern vertex -> region id)."""
    proot = int(rng.integers(0, gp.n))
    target = int(rng.integers(min_pattern, min(max_pattern, gp.n) + 1))
    selected = [proot]
    sel = {proot}
    queue = [proot]
    while queue and len(selected) < target:
        u = queue.pop(0)
        nbrs = [int(w) for w in gp.undirected_neighbors(u)]
        rng.shuffle(nbrs)
        for w in nbrs:
            if w not in sel:
                sel.add(w)
                selected.append(w)
                queue.append(w)
                if len(selected) >= target:
                    break
    if len(selected) < min_pattern:
        return None, None
    q, origin = induce(gp, sorted(sel))
    return q, list(origin)


def _duplicate_vertices(
    q: Graph, origin: list[int], rng, flips: int, prob: float, max_pattern: int
):
    """Copy random vertices together with their incident edges."""
    vlabels = [int(x) for x in q.vlabels]
    edges = list(q.triples())
    origin = list(origin)
    copies = 0
    for _ in range(flips):
        if len(vlabels) >= max_pattern:
            break
        if rng.random() >= prob:
            continue
        w = int(rng.integers(0, len(vlabels)))
        new = len(vlabels)
        vlabels.append(vlabels[w])
        origin.append(origin[w])
        for s, r, d in list(edges):
            if s == w and d == w:
                edges.append((new, r, new))
            elif s == w:
                edges.append((new, r, d))
            elif d == w:
                edges.append((s, r, new))
        copies += 1
    return Graph(len(vlabels), vlabels, edges, q.label_dict), origin, copies


def sample_positive(
    g: Graph,
    seed,
    min_depth: int = 5,
    max_depth: int = 10,
    level_cap: int = 60,
    min_pattern: int = PATTERN_MIN,
    max_pattern: int = PATTERN_MAX,
    dup_flips: int = 3,
    dup_prob: float = 0.5,
    verify_timeout: float = 5.0,
    max_retries: int = 50,
) -> Example:
    """Sample one oracle-verified positive anchored example."""
    rng = np.random.default_rng(seed)
    for _attempt in range(max_retries):
        depth = int(rng.integers(min_depth, max_depth + 1))
        root = int(rng.integers(0, g.n))
        region, levels = _bfs_region(g, root, depth, level_cap, rng)
        if levels < min_depth or len(region) < min_pattern:
            continue
        gp, _gp_origin = induce(g, region)
        q, origin = _extract_pattern(gp, rng, min_pattern, max_pattern)
        if q is None:
            continue
        q, origin, copies = _duplicate_vertices(q, origin, rng, dup_flips, dup_prob, max_pattern)
        u = int(rng.integers(0, q.n))
        v = origin[u]
        out = hom_decide(q, gp, anchor=(u, v), timeout=verify_timeout)
        if out.verdict is Verdict.TRUE:
            return Example(
                pattern=q,
                pivot=u,
                graph=gp,
                anchor=v,
                label="positive",
                provenance={
                    "root": root,
                    "bfs_depth": levels,
                    "duplicated": copies,
                    "region_size": len(region),
                },
            )
    raise SamplingExhausted("could not sample a verifiable positive example")


def sample_negative(
    g: Graph,
    seed,
    perturb_retries: int = 20,
    hard_anchor_bias: float = 0.75,
    verify_timeout: float = 5.0,
    **positive_kwargs,
) -> Example:
    """Sample one oracle-verified negative by perturbing a fresh positive:
    either a random extra pattern edge or a relocated anchor, half/half.

    Relocated anchors prefer (with probability ``hard_anchor_bias``) vertices
    that survive two pruning sweeps for the pivot — the perturbations worth
    learning from, since cheaper checks cannot reject them.  The exact
    matcher still decides the label either way.
    """
    from hframe.dualsim import dual_sim  # local import: dualsim is model-free

    rng = np.random.default_rng(seed)
    base = sample_positive(g, rng.integers(0, 2**32), verify_timeout=verify_timeout, **positive_kwargs)
    q, u, gp, v = base.pattern, base.pivot, base.graph, base.anchor
    edge_pool = list(g.edge_label_ids)
    survivors: list[int] | None = None
    for _attempt in range(perturb_retries):
        if rng.random() < 0.5:
            mode = "add-edge"
            a = int(rng.integers(0, q.n))
            b = int(rng.integers(0, q.n))
            if a == b:
                continue
            r = edge_pool[int(rng.integers(0, len(edge_pool)))]
            if q.has_edge(a, r, b):
                continue
            cand_q = Graph(q.n, q.vlabels, list(q.triples()) + [(a, r, b)], q.label_dict)
            cand = (cand_q, u, gp, v)
        else:
            mode = "move-anchor"
            if gp.n < 2:
                continue
            pool = None
            if rng.random() < hard_anchor_bias:
                if survivors is None:
                    cm = dual_sim(q, gp, 2)
                    survivors = sorted(cm.candidates[u] - {v})
                if survivors:
                    pool = survivors
            if pool is None:
                same = [int(x) for x in np.flatnonzero(gp.vlabels == q.vlabels[u]) if x != v]
                pool = same if same else [x for x in range(gp.n) if x != v]
            v2 = int(pool[int(rng.integers(0, len(pool)))])
            cand = (q, u, gp, v2)
        out = hom_decide(cand[0], cand[2], anchor=(cand[1], cand[3]), timeout=verify_timeout)
        if out.verdict is Verdict.FALSE:
            return Example(
                pattern=cand[0],
                pivot=cand[1],
                graph=cand[2],
                anchor=cand[3],
                label="negative",
                provenance={"mode": mode, "base": base.provenance},
            )
    raise SamplingExhausted("perturbation kept yielding positives (or timeouts)")


def build_dataset(g: Graph, n_examples: int, seed, **kwargs) -> Dataset:
    """Oracle-verified dataset: 1 positive to 3 negatives, shuffled, split
    8:1:1 into train/val/test; deterministic per seed."""
    if n_examples < 8:
        raise ValueError("need at least 8 examples for an 8:1:1 split")
    n_pos = round(n_examples / 4)
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(n_examples + 1)
    examples: list[Example] = []
    for i in range(n_examples):
        if i < n_pos:
            examples.append(sample_positive(g, children[i], **kwargs))
        else:
            examples.append(sample_negative(g, children[i], **kwargs))
    order = np.random.default_rng(children[n_examples]).permutation(n_examples)
    examples = [examples[i] for i in order]
    n_train = round(0.8 * n_examples)
    n_val = round(0.1 * n_examples)
    splits = {
        "train": list(range(0, n_train)),
        "val": list(range(n_train, n_train + n_val)),
        "test": list(range(n_train + n_val, n_examples)),
    }
    return Dataset(examples=examples, splits=splits, label_dict=g.label_dict)


# ---------------------------------------------------------------------------
# on-disk layout: patterns/<id>.graph, graphs/<id>.graph, index.tsv
# (+ labels.txt so interning order survives the round trip, and
#  provenance.json for generation traces)

_INDEX_COLUMNS = ("example-id", "pattern-file", "graph-file", "pivot-id", "anchor-id", "label", "split")


def save_dataset(ds: Dataset, dirpath: str) -> None:
    os.makedirs(os.path.join(dirpath, "patterns"), exist_ok=True)
    os.makedirs(os.path.join(dirpath, "graphs"), exist_ok=True)
    with open(os.path.join(dirpath, "labels.txt"), "w", encoding="utf-8") as fh:
        for name in ds.label_dict.names:
            fh.write(name + "\n")
    split_of = {}
    for split, idxs in ds.splits.items():
        for i in idxs:
            split_of[i] = split
    with open(os.path.join(dirpath, "index.tsv"), "w", encoding="utf-8") as fh:
        fh.write("\t".join(_INDEX_COLUMNS) + "\n")
        for i, ex in enumerate(ds.examples):
            pfile = f"patterns/{i:05d}.graph"
            gfile = f"graphs/{i:05d}.graph"
            write_graph(ex.pattern, os.path.join(dirpath, pfile))
            write_graph(ex.graph, os.path.join(dirpath, gfile))
            fh.write(
                f"{i}\t{pfile}\t{gfile}\t{ex.pivot}\t{ex.anchor}\t{ex.label}\t{split_of[i]}\n"
            )
    with open(os.path.join(dirpath, "provenance.json"), "w", encoding="utf-8") as fh:
        json.dump([ex.provenance for ex in ds.examples], fh)
        fh.write("\n")


def load_dataset(dirpath: str) -> Dataset:
    ld = LabelDict()
    labels_file = os.path.join(dirpath, "labels.txt")
    if os.path.exists(labels_file):
        with open(labels_file, encoding="utf-8") as fh:
            for line in fh:
                name = line.rstrip("\n")
                if name:
                    ld.intern(name)
    prov_file = os.path.join(dirpath, "provenance.json")
    provenance: list[dict] = []
    if os.path.exists(prov_file):
        with open(prov_file, encoding="utf-8") as fh:
            provenance = json.load(fh)
    examples: list[Example] = []
    splits: dict[str, list[int]] = {"train": [], "val": [], "test": []}
    with open(os.path.join(dirpath, "index.tsv"), encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != _INDEX_COLUMNS:
            raise ValueError(f"unexpected index columns in {dirpath}: {header}")
        for line in fh:
            eid, pfile, gfile, pivot_id, anchor_id, label, split = line.rstrip("\n").split("\t")
            i = int(eid)
            ex = Example(
                pattern=load_graph(os.path.join(dirpath, pfile), ld),
                pivot=int(pivot_id),
                graph=load_graph(os.path.join(dirpath, gfile), ld),
                anchor=int(anchor_id),
                label=label,
                provenance=provenance[i] if i < len(provenance) else {},
            )
            assert i == len(examples), "index.tsv must list examples in id order"
            examples.append(ex)
            splits.setdefault(split, []).append(i)
    return Dataset(examples=examples, splits=splits, label_dict=ld)
