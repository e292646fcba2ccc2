"""Hand-built fixture graphs used by tests and the self-check suite.

All of them are single-label unless stated otherwise.  The trio of
square / bipartite-cubic / prism-cubic graphs demonstrates where neighbor-
local pruning is blind: the two cubic graphs are locally identical (every
vertex has the same in/out label profile) yet only one of them contains
directed triangles.
"""

from __future__ import annotations

from hframe.graph import Graph, LabelDict, build_graph

__all__ = [
    "directed_square",
    "bipartite_cubic",
    "prism_cubic",
    "fig_trio",
    "fork_pattern",
    "single_edge",
    "fork_and_edge",
    "directed_cycle",
    "single_edge_pattern",
    "star_pattern",
]


def directed_square(ld: LabelDict | None = None) -> Graph:
    """Directed 4-cycle on vertices 0..3."""
    return directed_cycle(4, ld)


def bipartite_cubic(ld: LabelDict | None = None) -> Graph:
    """Orientation of K_{3,3}: 6 vertices, every total degree 3, bipartite
    between {0,2,4} and {1,3,5}.  All directed closed walks have length
    divisible by 4 (the graph maps onto a directed 4-cycle), so it has no
    directed triangle."""
    edges = [
        (0, "r", 1),
        (0, "r", 5),
        (3, "r", 0),
        (1, "r", 2),
        (5, "r", 2),
        (2, "r", 3),
        (1, "r", 4),
        (5, "r", 4),
        (4, "r", 3),
    ]
    return build_graph(["a"] * 6, edges, ld)


def prism_cubic(ld: LabelDict | None = None) -> Graph:
    """Directed triangular prism: two directed triangles (0,4,5) and (1,2,3)
    joined by a matching; every total degree is 3."""
    edges = [
        (0, "r", 4),
        (4, "r", 5),
        (5, "r", 0),
        (1, "r", 2),
        (2, "r", 3),
        (3, "r", 1),
        (0, "r", 1),
        (4, "r", 2),
        (5, "r", 3),
    ]
    return build_graph(["a"] * 6, edges, ld)


def fig_trio() -> tuple[Graph, Graph, Graph, LabelDict]:
    """The square, the bipartite cubic graph, and the prism over one shared
    label dictionary.  The square and the bipartite graph are homomorphic to
    each other despite their different sizes; the prism is not homomorphic
    to the bipartite graph (its triangles have no image)."""
    ld = LabelDict()
    return directed_square(ld), bipartite_cubic(ld), prism_cubic(ld), ld


def fork_pattern(ld: LabelDict | None = None) -> Graph:
    """Center 0 with two out-children 1 and 2 — the children are
    structurally identical, so under set semantics they collapse."""
    return build_graph(["a"] * 3, [(0, "r", 1), (0, "r", 2)], ld)


def single_edge(ld: LabelDict | None = None) -> Graph:
    return build_graph(["a"] * 2, [(0, "r", 1)], ld)


def fork_and_edge() -> tuple[Graph, Graph, LabelDict]:
    ld = LabelDict()
    return fork_pattern(ld), single_edge(ld), ld


def directed_cycle(k: int, ld: LabelDict | None = None) -> Graph:
    return build_graph(["a"] * k, [(i, "r", (i + 1) % k) for i in range(k)], ld)


def single_edge_pattern(edge_label: str, ld: LabelDict) -> Graph:
    """One edge with a chosen label; both endpoints carry label 'x'."""
    return build_graph(["x", "x"], [(0, edge_label, 1)], ld)


def star_pattern(edge_labels: list[str], ld: LabelDict) -> Graph:
    """Center 0 with one out-edge per given label, all vertices labeled 'x'."""
    vl = ["x"] * (len(edge_labels) + 1)
    edges = [(0, lbl, i + 1) for i, lbl in enumerate(edge_labels)]
    return build_graph(vl, edges, ld)
