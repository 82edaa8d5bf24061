"""Canonical undirected graph values and their JSON serialization.

Edges are pairs ``(u, v)`` with ``u < v``; the total order on edges is
lexicographic on ``(u, v)``, which is also the tie-break order used by the
voting and certification layers. Graph values are immutable after
construction and safe to share across workers.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

Edge = tuple[int, int]


class InvalidEdgeError(ValueError):
    """Raised for self-loops or malformed endpoint pairs."""


class GraphFormatError(ValueError):
    """Raised when a graph file violates the on-disk schema."""


def canonical_edge(u: int, v: int) -> Edge:
    """Return the canonical orientation ``(min(u, v), max(u, v))``.

    Self-loops are rejected: undirected simple graphs only.
    """
    if u == v:
        raise InvalidEdgeError(f"self-loop ({u}, {v}) is not a valid edge")
    if u < 0 or v < 0:
        raise InvalidEdgeError(f"negative node index in edge ({u}, {v})")
    return (u, v) if u < v else (v, u)


def canonical_edge_set(pairs: Iterable[Sequence[int]]) -> tuple[Edge, ...]:
    """Canonicalize, deduplicate and sort an iterable of endpoint pairs."""
    return tuple(sorted({canonical_edge(u, v) for u, v in pairs}))


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with per-node feature vectors.

    ``edges`` must already be canonical, duplicate-free and sorted; use
    :func:`make_graph` to build from unnormalized edge lists. ``label`` and
    ``gt_explanation`` are optional supervision used by datasets and metrics.
    """

    num_nodes: int
    edges: tuple[Edge, ...]
    features: np.ndarray
    label: Optional[int] = None
    gt_explanation: Optional[tuple[Edge, ...]] = field(default=None)

    def __post_init__(self):
        if self.num_nodes < 1:
            raise ValueError("graph needs at least one node")
        prev = None
        for e in self.edges:
            u, v = e
            if not (0 <= u < v < self.num_nodes):
                raise InvalidEdgeError(
                    f"edge {e} is not canonical or out of range for n={self.num_nodes}"
                )
            if prev is not None and e <= prev:
                raise ValueError(f"edges not sorted/duplicate-free near {e}")
            prev = e
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[0] != self.num_nodes:
            raise ValueError(
                f"features must have shape (num_nodes, d); got {feats.shape}"
            )
        object.__setattr__(self, "features", feats)
        if self.gt_explanation is not None:
            edge_set = set(self.edges)
            gt = tuple(sorted({(int(u), int(v)) for u, v in self.gt_explanation}))
            for e in gt:
                if e not in edge_set:
                    raise ValueError(f"gt_explanation edge {e} is not a graph edge")
            object.__setattr__(self, "gt_explanation", gt)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.num_nodes == other.num_nodes
            and self.edges == other.edges
            and np.array_equal(self.features, other.features)
            and self.label == other.label
            and self.gt_explanation == other.gt_explanation
        )

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.num_nodes, self.num_nodes), dtype=np.float64)
        for u, v in self.edges:
            a[u, v] = 1.0
            a[v, u] = 1.0
        return a


def make_graph(
    num_nodes: int,
    edges: Iterable[Sequence[int]] = (),
    features: Optional[np.ndarray] = None,
    label: Optional[int] = None,
    gt_explanation: Optional[Iterable[Sequence[int]]] = None,
) -> Graph:
    """Build a Graph from unnormalized inputs; features default to ones((n, 1))."""
    if features is None:
        features = np.ones((num_nodes, 1), dtype=np.float64)
    gt = None if gt_explanation is None else canonical_edge_set(gt_explanation)
    return Graph(num_nodes, canonical_edge_set(edges), features, label, gt)


def complete_edges(num_nodes: int) -> tuple[Edge, ...]:
    """All node pairs (u, v) with u < v, in canonical order."""
    return tuple(
        (u, v) for u in range(num_nodes) for v in range(u + 1, num_nodes)
    )


def complement_edges(g: Graph) -> tuple[Edge, ...]:
    """Node pairs absent from ``g``, in canonical order."""
    present = set(g.edges)
    return tuple(e for e in complete_edges(g.num_nodes) if e not in present)


def flip_edges(g: Graph, flips: Iterable[Sequence[int]]) -> Graph:
    """Toggle each edge in ``flips``: present edges are deleted, absent added.

    Node count, features, label and ground truth are untouched, so a flipped
    ground-truth edge may no longer be a graph edge; gt is re-clipped to the
    surviving edges only when it would otherwise violate the graph invariant.
    """
    toggles = canonical_edge_set(flips)
    for u, v in toggles:
        if v >= g.num_nodes:
            raise InvalidEdgeError(f"edge ({u}, {v}) out of range for n={g.num_nodes}")
    new_edges = set(g.edges).symmetric_difference(toggles)
    gt = g.gt_explanation
    if gt is not None:
        gt = tuple(e for e in gt if e in new_edges)
    return Graph(
        g.num_nodes, tuple(sorted(new_edges)), g.features, g.label, gt
    )


def _graph_to_obj(g: Graph) -> dict:
    return {
        "num_nodes": g.num_nodes,
        "features": [[float(x) for x in row] for row in g.features],
        "edges": [[u, v] for u, v in g.edges],
        "label": g.label,
        "gt_explanation": None
        if g.gt_explanation is None
        else [[u, v] for u, v in g.gt_explanation],
    }


def _graph_from_obj(obj: dict, where: str) -> Graph:
    if not isinstance(obj, dict):
        raise GraphFormatError(f"{where}: expected an object, got {type(obj).__name__}")
    for key in ("num_nodes", "features", "edges"):
        if key not in obj:
            raise GraphFormatError(f"{where}: missing required field {key!r}")
    n = obj["num_nodes"]
    if not isinstance(n, int) or n < 1:
        raise GraphFormatError(f"{where}: num_nodes must be a positive integer")
    feats = obj["features"]
    if not isinstance(feats, list) or len(feats) != n:
        raise GraphFormatError(f"{where}: features must list one vector per node")
    dims = {len(row) for row in feats}
    if len(dims) != 1:
        raise GraphFormatError(f"{where}: feature dimension mismatch across nodes: {sorted(dims)}")

    def parse_edges(raw, fieldname):
        out = []
        prev = None
        for idx, pair in enumerate(raw):
            if not (isinstance(pair, list) and len(pair) == 2):
                raise GraphFormatError(f"{where}: {fieldname}[{idx}] must be a pair")
            u, v = pair
            if u == v:
                raise GraphFormatError(f"{where}: {fieldname}[{idx}] is a self-loop ({u},{v})")
            if not (isinstance(u, int) and isinstance(v, int) and 0 <= u < v < n):
                raise GraphFormatError(
                    f"{where}: {fieldname}[{idx}] = ({u},{v}) is not canonical (u<v) in range"
                )
            e = (u, v)
            if prev is not None and e <= prev:
                raise GraphFormatError(f"{where}: {fieldname} not sorted/unique at index {idx}")
            prev = e
            out.append(e)
        return tuple(out)

    edges = parse_edges(obj["edges"], "edges")
    gt_raw = obj.get("gt_explanation")
    gt = None if gt_raw is None else parse_edges(gt_raw, "gt_explanation")
    label = obj.get("label")
    if label is not None and not isinstance(label, int):
        raise GraphFormatError(f"{where}: label must be an integer or null")
    try:
        return Graph(n, edges, np.asarray(feats, dtype=np.float64), label, gt)
    except ValueError as exc:
        raise GraphFormatError(f"{where}: {exc}") from exc


def save_graph(g: Graph, path: str) -> None:
    _atomic_write_json(_graph_to_obj(g), path)


def load_graph(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{path}: invalid JSON: {exc}") from exc
    return _graph_from_obj(obj, path)


def save_dataset(graphs: Sequence[Graph], path: str) -> None:
    _atomic_write_json([_graph_to_obj(g) for g in graphs], path)


def load_dataset(path: str) -> list[Graph]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            arr = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GraphFormatError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(arr, list):
        raise GraphFormatError(f"{path}: dataset file must hold a JSON array")
    return [_graph_from_obj(obj, f"{path}: graph {i}") for i, obj in enumerate(arr)]


def _atomic_write_json(obj, path: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)
