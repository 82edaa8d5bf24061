"""Deterministic hash-based edge division and hybrid subgraph construction.

Every node pair maps to a subgraph index by hashing the concatenation of the
two zero-padded decimal node indices (smaller index first) and reducing the
digest, read as a big-endian unsigned integer, modulo the subgraph count.
Because the mapping depends only on the endpoints, the same pair lands in the
same slice whether it is divided as part of the input graph or as part of the
complete graph, and flipping one edge can change at most one hybrid subgraph.

Each hybrid subgraph ``i`` is the union of the input graph's slice ``i`` with
a fixed selection of complete-graph slices drawn from the other indices. The
selection is a pure function of ``(mix_seed, T, i)`` and never of the graph's
edges; see :func:`mix_indexes` for the pinned generator, which is part of the
wire contract: certificates are comparable only across runs that share it.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .graphs import Edge, Graph, canonical_edge, complete_edges

_HASH_NAMES = ("md5", "sha1", "sha256")


class DivisionConfigError(ValueError):
    """Raised for inconsistent division parameters."""


def _floor_scaled(fraction: float, count: int) -> int:
    # floor(fraction * count) with a guard against float artifacts such as
    # 0.3 * 10 == 2.9999999999999996
    return int(math.floor(fraction * count + 1e-9))


@dataclass(frozen=True)
class DivisionConfig:
    """Parameters of the edge-to-subgraph assignment.

    num_subgraphs is the ensemble size T; mix_fraction is the fraction p of
    complete-graph slices blended into each hybrid subgraph. mix_seed must be
    persisted alongside any result derived from the division.
    """

    num_subgraphs: int
    mix_fraction: float
    hash_name: str = "md5"
    pad_width: int = 10
    mix_seed: int = 0

    def __post_init__(self):
        if not isinstance(self.num_subgraphs, int) or self.num_subgraphs < 2:
            raise DivisionConfigError("num_subgraphs must be an integer >= 2")
        if not (0.0 <= self.mix_fraction <= 1.0):
            raise DivisionConfigError("mix_fraction must lie in [0, 1]")
        if self.num_mixed > self.num_subgraphs - 1:
            raise DivisionConfigError(
                "floor(mix_fraction * num_subgraphs) must leave the own slice out"
            )
        if self.hash_name not in _HASH_NAMES:
            raise DivisionConfigError(
                f"hash_name must be one of {_HASH_NAMES}, got {self.hash_name!r}"
            )
        if not isinstance(self.pad_width, int) or self.pad_width < 1:
            raise DivisionConfigError("pad_width must be a positive integer")

    @property
    def num_mixed(self) -> int:
        """Number of complete-graph slices blended into each hybrid subgraph."""
        return _floor_scaled(self.mix_fraction, self.num_subgraphs)

    def check_pad_width(self, num_nodes: int) -> None:
        if num_nodes > 10**self.pad_width:
            raise DivisionConfigError(
                f"pad_width={self.pad_width} cannot encode node index {num_nodes - 1}"
            )


@dataclass(frozen=True)
class HybridSubgraphSet:
    """The T hybrid subgraphs of a graph plus the metadata to reproduce them."""

    config: DivisionConfig
    base: Graph
    subgraphs: tuple[Graph, ...]
    index_map: Mapping[Edge, int]
    mix_sets: tuple[frozenset[int], ...]


def edge_subgraph_index(edge: Edge, cfg: DivisionConfig, num_nodes: int | None = None) -> int:
    """Subgraph index in [1, T] for an edge; symmetric in the endpoints."""
    u, v = canonical_edge(*edge)
    if num_nodes is not None and v >= num_nodes:
        raise ValueError(f"edge {edge} out of range for n={num_nodes}")
    cfg.check_pad_width(max(u, v) + 1)
    payload = f"{u:0{cfg.pad_width}d}{v:0{cfg.pad_width}d}".encode("ascii")
    digest = hashlib.new(cfg.hash_name, payload).digest()
    return int.from_bytes(digest, "big") % cfg.num_subgraphs + 1


@lru_cache(maxsize=256)
def _complete_division(num_nodes: int, num_subgraphs: int, hash_name: str, pad_width: int):
    """index_map over all node pairs and the complete-graph slices, cached."""
    cfg = DivisionConfig(num_subgraphs, 0.0, hash_name, pad_width)
    index_map: dict[Edge, int] = {}
    slices: list[list[Edge]] = [[] for _ in range(num_subgraphs)]
    for e in complete_edges(num_nodes):
        i = edge_subgraph_index(e, cfg)
        index_map[e] = i
        slices[i - 1].append(e)
    return index_map, tuple(tuple(s) for s in slices)


def complete_index_map(num_nodes: int, cfg: DivisionConfig) -> Mapping[Edge, int]:
    cfg.check_pad_width(num_nodes)
    index_map, _ = _complete_division(
        num_nodes, cfg.num_subgraphs, cfg.hash_name, cfg.pad_width
    )
    return index_map


def divide_graph(g: Graph, cfg: DivisionConfig) -> list[Graph]:
    """Partition the graph's edges into T subgraphs that keep all nodes."""
    index_map = complete_index_map(g.num_nodes, cfg)
    slices: list[list[Edge]] = [[] for _ in range(cfg.num_subgraphs)]
    for e in g.edges:
        slices[index_map[e] - 1].append(e)
    return [
        Graph(g.num_nodes, tuple(s), g.features, g.label, None) for s in slices
    ]


def divide_complete(num_nodes: int, cfg: DivisionConfig) -> list[Graph]:
    """Partition the complete edge set on ``num_nodes`` nodes into T subgraphs."""
    cfg.check_pad_width(num_nodes)
    _, slices = _complete_division(
        num_nodes, cfg.num_subgraphs, cfg.hash_name, cfg.pad_width
    )
    feats = np.ones((num_nodes, 1), dtype=np.float64)
    return [Graph(num_nodes, s, feats) for s in slices]


@lru_cache(maxsize=1024)
def _mix_sets_cached(num_subgraphs: int, num_mixed: int, mix_seed: int) -> tuple[frozenset[int], ...]:
    sets = []
    for i in range(1, num_subgraphs + 1):
        candidates = [j for j in range(1, num_subgraphs + 1) if j != i]
        candidates.sort(key=lambda j: _mix_rank_key(mix_seed, i, j))
        sets.append(frozenset(candidates[:num_mixed]))
    return tuple(sets)


def _mix_rank_key(mix_seed: int, i: int, j: int) -> tuple[bytes, int]:
    # Pinned wire contract: candidate slices j are ranked by
    # SHA-256("mix:<mix_seed>:<i>:<j>") and the smallest keys are chosen.
    # Graph-independent and stable across platforms and library versions.
    return hashlib.sha256(f"mix:{mix_seed}:{i}:{j}".encode("ascii")).digest(), j


def mix_indexes(i: int, cfg: DivisionConfig) -> frozenset[int]:
    """The complete-graph slice indices blended into hybrid subgraph ``i``.

    A deterministic function of (mix_seed, T, p, i): never of any graph, so
    perturbing a graph cannot change which slices are mixed in.
    """
    if not 1 <= i <= cfg.num_subgraphs:
        raise ValueError(f"subgraph index {i} outside [1, {cfg.num_subgraphs}]")
    return _mix_sets_cached(cfg.num_subgraphs, cfg.num_mixed, cfg.mix_seed)[i - 1]


@lru_cache(maxsize=256)
def _mix_unions(num_nodes: int, cfg: DivisionConfig) -> tuple[tuple[Edge, ...], ...]:
    """Per subgraph, the sorted union of its mixed-in complete slices."""
    _, slices = _complete_division(
        num_nodes, cfg.num_subgraphs, cfg.hash_name, cfg.pad_width
    )
    unions = []
    for i in range(1, cfg.num_subgraphs + 1):
        merged: list[Edge] = []
        for j in mix_indexes(i, cfg):
            merged.extend(slices[j - 1])
        unions.append(tuple(sorted(merged)))
    return tuple(unions)


def build_hybrid(g: Graph, cfg: DivisionConfig) -> HybridSubgraphSet:
    """Construct the T hybrid subgraphs: own slice plus mixed complete slices.

    The union is duplicate-free by construction: the own slice holds edges
    whose index is ``i`` while the mixed slices hold pairs with other indices.
    """
    cfg.check_pad_width(g.num_nodes)
    index_map = complete_index_map(g.num_nodes, cfg)
    unions = _mix_unions(g.num_nodes, cfg)
    own: list[list[Edge]] = [[] for _ in range(cfg.num_subgraphs)]
    for e in g.edges:
        own[index_map[e] - 1].append(e)
    subgraphs = []
    for i in range(cfg.num_subgraphs):
        edges = tuple(sorted(own[i] + list(unions[i])))
        subgraphs.append(Graph(g.num_nodes, edges, g.features, g.label, None))
    mix_sets = tuple(mix_indexes(i, cfg) for i in range(1, cfg.num_subgraphs + 1))
    return HybridSubgraphSet(cfg, g, tuple(subgraphs), index_map, mix_sets)


def count_differing_subgraphs(a: HybridSubgraphSet, b: HybridSubgraphSet) -> int:
    """Number of indices whose hybrid edge sets differ between two divisions."""
    if a.config != b.config:
        raise ValueError("hybrid subgraph sets built with different configs")
    if a.base.num_nodes != b.base.num_nodes:
        raise ValueError("hybrid subgraph sets built over different node counts")
    return sum(
        1
        for ga, gb in zip(a.subgraphs, b.subgraphs)
        if ga.edges != gb.edges
    )
