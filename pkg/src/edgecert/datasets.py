"""Synthetic motif datasets with ground-truth explanation edges.

A positive graph is a connected random base graph with one motif instance
attached through a single bridge edge; the motif's own edges are the ground
truth (the bridge is not part of it). A negative graph is a base graph
verified to contain no occurrence of the motif. Motif nodes are appended
after the base nodes, so ground-truth edges sit at the high end of the edge
order. Generation is fully seeded and byte-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import Edge, Graph, canonical_edge_set, make_graph
from .motifs import has_motif

MOTIF_SHAPES: dict[str, tuple[int, tuple[Edge, ...]]] = {
    # 4-cycle with a roof apex joined to two adjacent cycle nodes
    "house": (5, ((0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3))),
    # 4-cycle with one chord
    "diamond": (4, ((0, 1), (0, 2), (0, 3), (1, 2), (2, 3))),
    # hub with four spokes plus the rim cycle
    "wheel": (5, ((0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3), (3, 4))),
}

FEATURE_MODES = ("one-hot-degree-capped", "constant")

_MAX_BASE_TRIES = 2000


def motif_graph(name: str) -> Graph:
    if name not in MOTIF_SHAPES:
        raise ValueError(f"unknown motif {name!r}; choose from {sorted(MOTIF_SHAPES)}")
    n, edges = MOTIF_SHAPES[name]
    return make_graph(n, edges)


def motif_size(name: str) -> int:
    """Edge count of the motif; the default explanation size k."""
    return len(MOTIF_SHAPES[name][1])


@dataclass(frozen=True)
class DatasetSpec:
    n_graphs: int
    motif: str = "house"
    base_nodes_min: int = 8
    base_nodes_max: int = 12
    base_density: float = 0.2
    feature_mode: str = "one-hot-degree-capped"
    feature_dim: int = 10
    positive_fraction: float = 0.7
    seed: int = 0

    def __post_init__(self):
        if self.n_graphs < 0:
            raise ValueError("n_graphs must be non-negative")
        if self.motif not in MOTIF_SHAPES:
            raise ValueError(f"unknown motif {self.motif!r}")
        if not 2 <= self.base_nodes_min <= self.base_nodes_max:
            raise ValueError("base node range must satisfy 2 <= min <= max")
        if not 0.0 < self.base_density < 1.0:
            raise ValueError("base_density must lie in (0, 1)")
        if self.feature_mode not in FEATURE_MODES:
            raise ValueError(f"feature_mode must be one of {FEATURE_MODES}")
        if self.feature_dim < 1:
            raise ValueError("feature_dim must be positive")
        if not 0.0 < self.positive_fraction < 1.0:
            raise ValueError("positive_fraction must lie in (0, 1)")


def _connected(num_nodes: int, edges: list[Edge]) -> bool:
    parent = list(range(num_nodes))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v in edges:
        parent[find(u)] = find(v)
    return len({find(x) for x in range(num_nodes)}) == 1


def _sample_base(rng: np.random.Generator, spec: DatasetSpec, motif: Graph):
    """Connected, motif-free Erdos-Renyi base graph; resampled until valid."""
    for _ in range(_MAX_BASE_TRIES):
        n = int(rng.integers(spec.base_nodes_min, spec.base_nodes_max + 1))
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        mask = rng.random(len(pairs)) < spec.base_density
        edges = [e for e, keep in zip(pairs, mask) if keep]
        if not _connected(n, edges):
            continue
        if has_motif(make_graph(n, edges), motif):
            continue
        return n, edges
    raise RuntimeError(
        f"no connected motif-free base graph found in {_MAX_BASE_TRIES} tries; "
        "lower base_density or the node range"
    )


def _features(num_nodes: int, edges: list[Edge], spec: DatasetSpec) -> np.ndarray:
    if spec.feature_mode == "constant":
        return np.ones((num_nodes, spec.feature_dim), dtype=np.float64)
    deg = np.zeros(num_nodes, dtype=np.int64)
    for u, v in edges:
        deg[u] += 1
        deg[v] += 1
    feats = np.zeros((num_nodes, spec.feature_dim), dtype=np.float64)
    feats[np.arange(num_nodes), np.minimum(deg, spec.feature_dim - 1)] = 1.0
    return feats


def generate(spec: DatasetSpec) -> list[Graph]:
    """Seeded dataset of labeled graphs; label 1 iff the motif is present."""
    rng = np.random.default_rng(spec.seed)
    motif = motif_graph(spec.motif)
    motif_n, motif_edges = MOTIF_SHAPES[spec.motif]
    n_pos = round(spec.n_graphs * spec.positive_fraction)
    labels = np.array([1] * n_pos + [0] * (spec.n_graphs - n_pos), dtype=np.int64)
    rng.shuffle(labels)

    graphs = []
    for label in labels:
        base_n, base_edges = _sample_base(rng, spec, motif)
        if label == 1:
            shifted = [(base_n + u, base_n + v) for u, v in motif_edges]
            anchor = int(rng.integers(0, base_n))
            target = base_n + int(rng.integers(0, motif_n))
            bridge = (anchor, target)
            edges = base_edges + shifted + [bridge]
            n = base_n + motif_n
            gt = tuple(shifted)
        else:
            edges, n, gt = base_edges, base_n, ()
        edges = canonical_edge_set(edges)
        graphs.append(
            Graph(n, edges, _features(n, list(edges), spec), int(label), gt)
        )
    return graphs


def dataset_stats(graphs: list[Graph]) -> dict:
    """Table-style aggregates: sizes, class balance, ground-truth coverage."""
    if not graphs:
        raise ValueError("cannot summarize an empty dataset")
    gt_sizes = [len(g.gt_explanation) for g in graphs if g.gt_explanation]
    return {
        "n_graphs": len(graphs),
        "avg_nodes": float(np.mean([g.num_nodes for g in graphs])),
        "avg_edges": float(np.mean([g.num_edges for g in graphs])),
        "positive_fraction": float(
            np.mean([1.0 if g.label == 1 else 0.0 for g in graphs])
        ),
        "gt_graphs": len(gt_sizes),
        "avg_gt_size": float(np.mean(gt_sizes)) if gt_sizes else 0.0,
    }
