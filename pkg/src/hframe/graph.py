"""Directed labeled multigraph core.

Vertices are dense integers ``0..n-1``.  Each vertex carries one label and
each edge carries one label; labels are interned strings shared through a
:class:`LabelDict` so that pattern and data graphs agree on label ids.
Parallel edges between the same endpoints are allowed as long as their
labels differ.  Graphs are immutable after construction and safe to share
across threads.

The on-disk format is a plain edge list::

    t <nV> <nE>
    v <id> <label>
    e <src> <dst> <label>

with ``#`` comments, UTF-8 encoding, and LF line endings.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "GraphFormatError",
    "LabelDict",
    "Graph",
    "EgoNet",
    "build_graph",
    "load_graph",
    "write_graph",
    "induce",
    "ego_net",
    "cycle_lengths",
]


class GraphFormatError(ValueError):
    """Raised for malformed edge-list files; carries the offending line number."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc += str(path)
        if line is not None:
            loc += f":{line}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line


class LabelDict:
    """Bidirectional map between label strings and dense integer ids.

    Interning order is first-come; sharing one instance between a pattern
    and a data graph guarantees their label ids agree.
    """

    __slots__ = ("_names", "_ids")

    def __init__(self, names: Iterable[str] = ()):
        self._names: list[str] = []
        self._ids: dict[str, int] = {}
        for name in names:
            self.intern(name)

    def intern(self, name: str) -> int:
        lid = self._ids.get(name)
        if lid is None:
            lid = len(self._names)
            self._names.append(name)
            self._ids[name] = lid
        return lid

    def id_of(self, name: str) -> int:
        return self._ids[name]

    def name_of(self, lid: int) -> str:
        return self._names[lid]

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __len__(self) -> int:
        return len(self._names)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LabelDict) and self._names == other._names

    def __repr__(self) -> str:
        return f"LabelDict({self._names!r})"


class Graph:
    """Immutable directed labeled multigraph with per-label adjacency.

    Adjacency is stored twice in CSR form: once sorted by
    ``(src, label, dst)`` for outgoing lookups and once by
    ``(dst, label, src)`` for incoming lookups, so ``N+_r(v)`` / ``N-_r(v)``
    are contiguous, ascending slices.
    """

    __slots__ = (
        "n",
        "label_dict",
        "vlabels",
        "esrc",
        "elbl",
        "edst",
        "_out_indptr",
        "_out_lbl",
        "_out_dst",
        "_in_indptr",
        "_in_lbl",
        "_in_src",
        "__dict__",
    )

    def __init__(
        self,
        n: int,
        vlabels: Sequence[int] | np.ndarray,
        edges: Iterable[tuple[int, int, int]],
        label_dict: LabelDict,
    ):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        vl = np.asarray(vlabels, dtype=np.int32)
        if vl.shape != (n,):
            raise ValueError(f"expected {n} vertex labels, got {vl.shape}")
        triples = np.array(sorted(edges), dtype=np.int64).reshape(-1, 3)
        if len(triples):
            src, lbl, dst = triples[:, 0], triples[:, 1], triples[:, 2]
            if src.min() < 0 or src.max() >= n or dst.min() < 0 or dst.max() >= n:
                raise ValueError("edge endpoint out of range")
            dup = np.all(triples[1:] == triples[:-1], axis=1)
            if dup.any():
                s, r, d = triples[1:][dup][0]
                raise ValueError(f"duplicate edge triple ({s}, {r}, {d})")
        self.n = n
        self.label_dict = label_dict
        self.vlabels = vl
        self.esrc = triples[:, 0].astype(np.int32)
        self.elbl = triples[:, 1].astype(np.int32)
        self.edst = triples[:, 2].astype(np.int32)
        # outgoing CSR: edges already sorted by (src, lbl, dst)
        self._out_indptr = np.searchsorted(self.esrc, np.arange(n + 1)).astype(np.int64)
        self._out_lbl = self.elbl
        self._out_dst = self.edst
        # incoming CSR: re-sort by (dst, lbl, src)
        order = np.lexsort((self.esrc, self.elbl, self.edst))
        in_dst = self.edst[order]
        self._in_indptr = np.searchsorted(in_dst, np.arange(n + 1)).astype(np.int64)
        self._in_lbl = self.elbl[order]
        self._in_src = self.esrc[order]

    # -- basic accessors ---------------------------------------------------

    @property
    def num_edges(self) -> int:
        return len(self.esrc)

    def triples(self) -> Iterator[tuple[int, int, int]]:
        for s, r, d in zip(self.esrc, self.elbl, self.edst):
            yield int(s), int(r), int(d)

    def vertex_label(self, v: int) -> int:
        return int(self.vlabels[v])

    def out_neighbors(self, v: int, r: int) -> np.ndarray:
        """Ascending dst ids of edges ``(v, r, *)``."""
        lo, hi = self._out_indptr[v], self._out_indptr[v + 1]
        lbl = self._out_lbl[lo:hi]
        a = lo + np.searchsorted(lbl, r, side="left")
        b = lo + np.searchsorted(lbl, r, side="right")
        return self._out_dst[a:b]

    def in_neighbors(self, v: int, r: int) -> np.ndarray:
        """Ascending src ids of edges ``(*, r, v)``."""
        lo, hi = self._in_indptr[v], self._in_indptr[v + 1]
        lbl = self._in_lbl[lo:hi]
        a = lo + np.searchsorted(lbl, r, side="left")
        b = lo + np.searchsorted(lbl, r, side="right")
        return self._in_src[a:b]

    def out_edge_view(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self._out_indptr[v], self._out_indptr[v + 1]
        return self._out_lbl[lo:hi], self._out_dst[lo:hi]

    def in_edge_view(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self._in_indptr[v], self._in_indptr[v + 1]
        return self._in_lbl[lo:hi], self._in_src[lo:hi]

    def has_edge(self, s: int, r: int, d: int) -> bool:
        seg = self.out_neighbors(s, r)
        i = np.searchsorted(seg, d)
        return bool(i < len(seg) and seg[i] == d)

    def out_degree(self, v: int) -> int:
        return int(self._out_indptr[v + 1] - self._out_indptr[v])

    def in_degree(self, v: int) -> int:
        return int(self._in_indptr[v + 1] - self._in_indptr[v])

    def total_degree(self, v: int) -> int:
        return self.out_degree(v) + self.in_degree(v)

    def out_successors(self, v: int) -> np.ndarray:
        """Distinct out-neighbors of ``v`` over all edge labels."""
        lo, hi = self._out_indptr[v], self._out_indptr[v + 1]
        return np.unique(self._out_dst[lo:hi])

    def undirected_neighbors(self, v: int) -> np.ndarray:
        lo, hi = self._out_indptr[v], self._out_indptr[v + 1]
        li, hii = self._in_indptr[v], self._in_indptr[v + 1]
        return np.unique(np.concatenate([self._out_dst[lo:hi], self._in_src[li:hii]]))

    @cached_property
    def edge_label_ids(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.unique(self.elbl))

    @cached_property
    def vertex_label_ids(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.unique(self.vlabels))

    @cached_property
    def _und_csr(self) -> tuple[np.ndarray, np.ndarray]:
        pairs = np.concatenate(
            [
                np.stack([self.esrc, self.edst], axis=1),
                np.stack([self.edst, self.esrc], axis=1),
            ]
        )
        if len(pairs):
            pairs = np.unique(pairs, axis=0)
        indptr = np.searchsorted(pairs[:, 0], np.arange(self.n + 1)).astype(np.int64)
        return indptr, pairs[:, 1].astype(np.int32)

    def vertices_with_label(self, vlabel: int) -> np.ndarray:
        return np.flatnonzero(self.vlabels == vlabel).astype(np.int32)

    def has_out_label(self, r: int) -> np.ndarray:
        """Boolean mask over vertices that have at least one out-edge labeled r."""
        mask = np.zeros(self.n, dtype=bool)
        mask[self.esrc[self.elbl == r]] = True
        return mask

    def has_in_label(self, r: int) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.edst[self.elbl == r]] = True
        return mask

    def csr_arrays(self) -> tuple[np.ndarray, ...]:
        """Raw CSR arrays consumed by the search kernels."""
        return (
            self._out_indptr,
            self._out_lbl,
            self._out_dst,
            self._in_indptr,
            self._in_lbl,
            self._in_src,
        )

    # -- introspection -----------------------------------------------------

    def vertex_label_name(self, v: int) -> str:
        return self.label_dict.name_of(int(self.vlabels[v]))

    def string_triples(self) -> list[tuple[int, str, int]]:
        return [(s, self.label_dict.name_of(r), d) for s, r, d in self.triples()]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True)
class EgoNet:
    """Induced subgraph of all vertices within ``radius`` undirected hops
    of a center vertex.  ``origin[i]`` is the source-graph id of vertex i."""

    graph: Graph
    center: int
    radius: int
    origin: tuple[int, ...]


def build_graph(
    vertex_labels: Sequence[str],
    edges: Iterable[tuple[int, str, int]],
    label_dict: LabelDict | None = None,
) -> Graph:
    """Construct a graph from label strings; interns labels in given order."""
    ld = label_dict if label_dict is not None else LabelDict()
    vl = [ld.intern(x) for x in vertex_labels]
    es = [(s, ld.intern(r), d) for s, r, d in edges]
    return Graph(len(vl), vl, es, ld)


def load_graph(path: str, label_dict: LabelDict | None = None) -> Graph:
    """Parse an edge-list file.

    Unknown label strings are interned in file order.  Raises
    :class:`GraphFormatError` with a line number on malformed input.
    """
    ld = label_dict if label_dict is not None else LabelDict()
    n_decl = e_decl = None
    vlabels: dict[int, int] = {}
    edges: list[tuple[int, int, int]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            kind = parts[0]
            if n_decl is None:
                if kind != "t" or len(parts) != 3:
                    raise GraphFormatError("no header", path, lineno)
                try:
                    n_decl, e_decl = int(parts[1]), int(parts[2])
                except ValueError:
                    raise GraphFormatError("bad header counts", path, lineno) from None
                continue
            if kind == "v":
                if len(parts) != 3:
                    raise GraphFormatError("vertex line needs 'v <id> <label>'", path, lineno)
                try:
                    vid = int(parts[1])
                except ValueError:
                    raise GraphFormatError("bad vertex id", path, lineno) from None
                if vid in vlabels:
                    raise GraphFormatError(f"duplicate vertex declaration {vid}", path, lineno)
                if not 0 <= vid < n_decl:
                    raise GraphFormatError(f"vertex id {vid} out of range", path, lineno)
                vlabels[vid] = ld.intern(parts[2])
            elif kind == "e":
                if len(parts) != 4:
                    raise GraphFormatError("edge line needs 'e <src> <dst> <label>'", path, lineno)
                try:
                    s, d = int(parts[1]), int(parts[2])
                except ValueError:
                    raise GraphFormatError("bad edge endpoint", path, lineno) from None
                if s not in vlabels or d not in vlabels:
                    raise GraphFormatError(
                        f"edge ({s}, {d}) references undeclared vertex", path, lineno
                    )
                edges.append((s, ld.intern(parts[3]), d))
            else:
                raise GraphFormatError(f"unknown record type {kind!r}", path, lineno)
    if n_decl is None:
        raise GraphFormatError("no header", path, None)
    if len(vlabels) != n_decl:
        raise GraphFormatError(
            f"header declares {n_decl} vertices, file has {len(vlabels)}", path, None
        )
    if len(edges) != e_decl:
        raise GraphFormatError(f"header declares {e_decl} edges, file has {len(edges)}", path, None)
    vl = [vlabels[i] for i in range(n_decl)]
    try:
        return Graph(n_decl, vl, edges, ld)
    except ValueError as exc:
        raise GraphFormatError(str(exc), path, None) from None


def write_graph(g: Graph, path: str) -> None:
    """Write the canonical edge-list form: vertices ascending, edges in sorted
    (src, label-id, dst) order."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"t {g.n} {g.num_edges}\n")
        for v in range(g.n):
            fh.write(f"v {v} {g.vertex_label_name(v)}\n")
        for s, r, d in g.triples():
            fh.write(f"e {s} {d} {g.label_dict.name_of(r)}\n")


def induce(g: Graph, keep: Iterable[int]) -> tuple[Graph, tuple[int, ...]]:
    """Induced subgraph on ``keep`` with all edges between kept vertices.

    Returns the subgraph and its origin map (new id -> source id).  Kept
    vertices are renumbered in ascending source-id order.
    """
    keep_arr = np.unique(np.asarray(list(keep), dtype=np.int64))
    if len(keep_arr) and (keep_arr[0] < 0 or keep_arr[-1] >= g.n):
        raise ValueError("keep set contains invalid vertex ids")
    new_id = np.full(g.n, -1, dtype=np.int64)
    new_id[keep_arr] = np.arange(len(keep_arr))
    kept_mask = new_id >= 0
    emask = kept_mask[g.esrc] & kept_mask[g.edst]
    edges = zip(new_id[g.esrc[emask]], g.elbl[emask], new_id[g.edst[emask]])
    sub = Graph(len(keep_arr), g.vlabels[keep_arr], edges, g.label_dict)
    return sub, tuple(int(x) for x in keep_arr)


def ego_net(g: Graph, v: int, m: int) -> EgoNet:
    """Induced subgraph on all vertices within ``m`` undirected hops of v."""
    if not 0 <= v < g.n:
        raise ValueError(f"invalid vertex id {v}")
    if m < 1:
        raise ValueError("radius must be >= 1")
    indptr, nbr = g._und_csr
    seen = np.zeros(g.n, dtype=bool)
    seen[v] = True
    frontier = np.array([v], dtype=np.int32)
    for _ in range(m):
        if not len(frontier):
            break
        nxt = []
        for u in frontier:
            nxt.append(nbr[indptr[u] : indptr[u + 1]])
        cand = np.unique(np.concatenate(nxt)) if nxt else np.array([], dtype=np.int32)
        frontier = cand[~seen[cand]]
        seen[frontier] = True
    keep = np.flatnonzero(seen)
    sub, origin = induce(g, keep)
    center = int(np.searchsorted(keep, v))
    return EgoNet(graph=sub, center=center, radius=m, origin=origin)


def cycle_lengths(g: Graph, v: int, m: int, directed: bool = True) -> frozenset[int]:
    """Lengths l in [2, m] of simple cycles through v.

    Cycles follow edge directions by default; ``directed=False`` treats every
    edge as bidirectional (self-loops never count).  Found by depth-limited
    DFS from v, so cost is bounded by paths of length < m.
    """
    if not 0 <= v < g.n:
        raise ValueError(f"invalid vertex id {v}")
    if m < 2:
        raise ValueError("cycle length bound must be >= 2")
    lengths: set[int] = set()
    if directed:
        succ = g.out_successors
    else:
        succ = g.undirected_neighbors
    on_path = np.zeros(g.n, dtype=bool)
    on_path[v] = True

    def walk(cur: int, depth: int) -> None:
        for nxt in succ(cur):
            nxt = int(nxt)
            if nxt == v:
                if depth + 1 >= 2:
                    lengths.add(depth + 1)
            elif not on_path[nxt] and depth + 1 < m:
                on_path[nxt] = True
                walk(nxt, depth + 1)
                on_path[nxt] = False

    walk(v, 0)
    if not directed:
        # undirected length-2 cycles need two distinct parallel connections
        if 2 in lengths:
            lengths.discard(2)
            for w in g.undirected_neighbors(v):
                w = int(w)
                if w == v:
                    continue
                k = 0
                for r in g.edge_label_ids:
                    k += int(g.has_edge(v, r, w)) + int(g.has_edge(w, r, v))
                if k >= 2:
                    lengths.add(2)
                    break
    return frozenset(lengths)
