import numpy as np
import pytest

from hframe.graph import Graph, LabelDict


def random_graph(
    n: int,
    n_edges: int,
    n_vlabels: int,
    n_elabels: int,
    seed,
    label_dict: LabelDict | None = None,
) -> Graph:
    """Small random directed multigraph for property tests (may be
    disconnected; self-loops excluded)."""
    ld = label_dict if label_dict is not None else LabelDict()
    vpool = [ld.intern(f"A{i}") for i in range(n_vlabels)]
    epool = [ld.intern(f"r{i}") for i in range(n_elabels)]
    rng = np.random.default_rng(seed)
    vlabels = [vpool[i] for i in rng.integers(0, n_vlabels, size=n)]
    edges = set()
    cap = n * (n - 1) * n_elabels
    budget = 50 * n_edges
    while len(edges) < min(n_edges, cap) and budget:
        budget -= 1
        s, d = rng.integers(0, n, size=2)
        if s == d:
            continue
        edges.add((int(s), epool[int(rng.integers(0, n_elabels))], int(d)))
    return Graph(n, vlabels, sorted(edges), ld)


def connected_pattern(n: int, extra_edges: int, n_vlabels: int, n_elabels: int, seed, label_dict=None) -> Graph:
    """Connected random pattern: random arborescence backbone plus extras."""
    ld = label_dict if label_dict is not None else LabelDict()
    vpool = [ld.intern(f"A{i}") for i in range(n_vlabels)]
    epool = [ld.intern(f"r{i}") for i in range(n_elabels)]
    rng = np.random.default_rng(seed)
    vlabels = [vpool[i] for i in rng.integers(0, n_vlabels, size=n)]
    edges = set()
    for i in range(1, n):
        p = int(rng.integers(0, i))
        lbl = epool[int(rng.integers(0, n_elabels))]
        s, d = (p, i) if rng.integers(0, 2) == 0 else (i, p)
        edges.add((s, lbl, d))
    budget = 50 * extra_edges + 50
    while len(edges) < n - 1 + extra_edges and budget:
        budget -= 1
        s, d = rng.integers(0, n, size=2)
        if s == d:
            continue
        edges.add((int(s), epool[int(rng.integers(0, n_elabels))], int(d)))
    return Graph(n, vlabels, sorted(edges), ld)


@pytest.fixture
def tmp_graph_file(tmp_path):
    def write(text: str, name: str = "g.graph"):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return str(p)

    return write
