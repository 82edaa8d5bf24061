"""Exact subgraph-isomorphism motif matching and the rule-based classifier.

Matching is non-induced: a motif occurs wherever an injective node map sends
every motif edge onto a graph edge, extra graph edges allowed. The
backtracking kernel is the hot path of both the synthetic-data generator
(verifying motif absence) and the deterministic oracle classifier, so it is
numba-compiled on the default backend.
"""

from __future__ import annotations

import numpy as np

from .backend import maybe_njit
from .graphs import Edge, Graph, canonical_edge

MAX_MOTIF_NODES = 8


class MatchCapError(RuntimeError):
    """Raised when the number of raw matches exceeds the enumeration cap."""


@maybe_njit
def _match_kernel(adj_g, deg_g, madj, mdeg, out, stop_at):  # pragma: no cover - jitted
    n = adj_g.shape[0]
    m = madj.shape[0]
    assigned = np.full(m, -1, dtype=np.int64)
    used = np.zeros(n, dtype=np.uint8)
    cursor = np.zeros(m, dtype=np.int64)
    count = 0
    t = 0
    v = 0
    while True:
        advanced = False
        while v < n:
            ok = used[v] == 0 and deg_g[v] >= mdeg[t]
            if ok:
                for s in range(t):
                    if madj[t, s] == 1 and adj_g[v, assigned[s]] == 0:
                        ok = False
                        break
            if ok:
                if t == m - 1:
                    assigned[t] = v
                    if count < out.shape[0]:
                        out[count, :] = assigned
                    count += 1
                    if count >= stop_at:
                        return count
                    assigned[t] = -1
                    v += 1
                else:
                    assigned[t] = v
                    used[v] = 1
                    cursor[t] = v
                    t += 1
                    v = 0
                    advanced = True
                    break
            else:
                v += 1
        if not advanced:
            t -= 1
            if t < 0:
                return count
            v = cursor[t]
            used[assigned[t]] = 0
            assigned[t] = -1
            v += 1


def _search_order(motif: Graph) -> list[int]:
    """Connectivity-aware node order: high degree first, then most-constrained."""
    deg = {u: 0 for u in range(motif.num_nodes)}
    for u, v in motif.edges:
        deg[u] += 1
        deg[v] += 1
    order = [max(range(motif.num_nodes), key=lambda u: (deg[u], -u))]
    remaining = set(range(motif.num_nodes)) - set(order)
    adj = {u: set() for u in range(motif.num_nodes)}
    for u, v in motif.edges:
        adj[u].add(v)
        adj[v].add(u)
    while remaining:
        placed = set(order)
        nxt = max(
            remaining,
            key=lambda u: (len(adj[u] & placed), deg[u], -u),
        )
        order.append(nxt)
        remaining.remove(nxt)
    return order


def _prepare(g: Graph, motif: Graph):
    if motif.num_nodes > MAX_MOTIF_NODES:
        raise ValueError(f"motif has {motif.num_nodes} nodes; at most {MAX_MOTIF_NODES} supported")
    if motif.num_edges == 0:
        raise ValueError("motif must have at least one edge")
    n = g.num_nodes
    adj_g = np.zeros((n, n), dtype=np.uint8)
    deg_g = np.zeros(n, dtype=np.int64)
    for u, v in g.edges:
        adj_g[u, v] = 1
        adj_g[v, u] = 1
        deg_g[u] += 1
        deg_g[v] += 1
    order = _search_order(motif)
    m = motif.num_nodes
    madj = np.zeros((m, m), dtype=np.uint8)
    pos = {node: t for t, node in enumerate(order)}
    for u, v in motif.edges:
        madj[pos[u], pos[v]] = 1
        madj[pos[v], pos[u]] = 1
    mdeg = madj.sum(axis=1).astype(np.int64)
    return adj_g, deg_g, madj, mdeg, order


def motif_match(g: Graph, motif: Graph, cap: int = 200_000) -> list[tuple[Edge, ...]]:
    """All distinct occurrences of ``motif`` in ``g`` as sorted edge tuples.

    Matches that differ only by a motif automorphism collapse to one edge set.
    """
    adj_g, deg_g, madj, mdeg, order = _prepare(g, motif)
    if motif.num_nodes > g.num_nodes:
        return []
    out = np.empty((cap, motif.num_nodes), dtype=np.int64)
    count = _match_kernel(adj_g, deg_g, madj, mdeg, out, np.int64(cap + 1))
    if count > cap:
        raise MatchCapError(f"more than {cap} raw matches; raise the cap")
    pos = {node: t for t, node in enumerate(order)}
    edge_sets = set()
    for r in range(count):
        row = out[r]
        match = tuple(
            sorted(canonical_edge(int(row[pos[u]]), int(row[pos[v]])) for u, v in motif.edges)
        )
        edge_sets.add(match)
    return sorted(edge_sets)


def has_motif(g: Graph, motif: Graph) -> bool:
    """Whether at least one occurrence exists (early-exit search)."""
    if motif.num_nodes > g.num_nodes:
        return False
    adj_g, deg_g, madj, mdeg, _ = _prepare(g, motif)
    out = np.empty((1, motif.num_nodes), dtype=np.int64)
    return _match_kernel(adj_g, deg_g, madj, mdeg, out, np.int64(1)) >= 1


class MotifMatchClassifier:
    """Deterministic classifier: class 1 iff the motif occurs in the graph.

    Scores are one-hot, so occlusion importance of an edge is 1 exactly when
    its removal destroys every occurrence of the motif.
    """

    num_classes = 2

    def __init__(self, motif: Graph):
        self.motif = motif

    def classify(self, g: Graph) -> np.ndarray:
        present = has_motif(g, self.motif)
        return np.array([0.0, 1.0]) if present else np.array([1.0, 0.0])
