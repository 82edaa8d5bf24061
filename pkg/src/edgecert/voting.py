"""Majority-vote classification and explanation over hybrid subgraphs.

Each hybrid subgraph casts one class vote. Subgraphs predicted as the
majority class then vote for every one of their edges whose importance
reaches the top fraction of that subgraph's scores. Edge votes are tallied
over the complete edge set, so node pairs absent from the input graph can
collect votes too; the explanation itself is restricted to real edges.

Deterministic tie-breaking throughout: class ties go to the smaller class
index, edge ties to the lexicographically smaller edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .division import HybridSubgraphSet
from .graphs import Edge, Graph, complete_edges
from .models import Classifier, Explainer, predict_label


@dataclass(frozen=True)
class VoteTally:
    """Per-class and per-edge vote counts for one divided graph."""

    class_votes: tuple[int, ...]
    edge_votes: Mapping[Edge, int]
    gamma: float
    majority_label: int


@dataclass(frozen=True)
class ExplanationResult:
    """Top-k explanatory edges with their vote counts, deterministically ordered."""

    edges: tuple[Edge, ...]
    votes: tuple[int, ...]
    k: int


def tally_classes(
    subgraphs: HybridSubgraphSet, classifier: Classifier
) -> tuple[tuple[int, ...], int]:
    """One prediction per hybrid subgraph; returns (votes per class, majority)."""
    votes = [0] * classifier.num_classes
    for sub in subgraphs.subgraphs:
        votes[predict_label(classifier.classify(sub))] += 1
    majority = int(np.argmax(votes))
    return tuple(votes), majority


def gamma_threshold(importances: Sequence[float], gamma: float) -> float:
    """The r-th largest importance, r = max(1, floor(gamma * count)).

    The floor carries a tiny guard against float artifacts (0.3 * 10 must
    give rank 3). Empty inputs are an error: an edgeless subgraph casts no
    edge votes and the caller skips it.
    """
    values = sorted(importances, reverse=True)
    if not values:
        raise ValueError("cannot take a threshold of an empty importance map")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    rank = max(1, int(math.floor(gamma * len(values) + 1e-9)))
    return values[rank - 1]


def tally_edges(
    subgraphs: HybridSubgraphSet,
    classifier: Classifier,
    explainer: Explainer,
    majority_label: int,
    gamma: float,
) -> dict[Edge, int]:
    """Edge votes over the complete edge set.

    Only subgraphs predicted as the majority label vote; each votes for its
    own edges whose importance is >= its gamma threshold (ties at the
    threshold all count). The explainer is always asked about the majority
    label, even on subgraphs that predicted otherwise; their votes are then
    discarded by the prediction gate.
    """
    votes: dict[Edge, int] = {e: 0 for e in complete_edges(subgraphs.base.num_nodes)}
    for sub in subgraphs.subgraphs:
        if predict_label(classifier.classify(sub)) != majority_label:
            continue
        if not sub.edges:
            continue
        importance = explainer.explain(sub, majority_label)
        threshold = gamma_threshold(list(importance.values()), gamma)
        for e, score in importance.items():
            if score >= threshold:
                votes[e] += 1
    return votes


def make_tally(
    subgraphs: HybridSubgraphSet,
    classifier: Classifier,
    explainer: Explainer,
    gamma: float,
) -> VoteTally:
    class_votes, majority = tally_classes(subgraphs, classifier)
    edge_votes = tally_edges(subgraphs, classifier, explainer, majority, gamma)
    return VoteTally(class_votes, edge_votes, gamma, majority)


def vote_order_key(votes: Mapping[Edge, int]):
    """Sort key for (votes desc, edge asc); shared with the certificate math."""

    def key(e: Edge):
        return (-votes.get(e, 0), e)

    return key


def vote_explain(tally: VoteTally, base: Graph, k: int) -> ExplanationResult:
    """Top-k edges of the input graph by vote count."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > base.num_edges:
        raise ValueError(f"k={k} exceeds the graph's {base.num_edges} edges")
    ranked = sorted(base.edges, key=vote_order_key(tally.edge_votes))
    top = ranked[:k]
    return ExplanationResult(
        tuple(top), tuple(tally.edge_votes.get(e, 0) for e in top), k
    )


def tally_to_obj(tally: VoteTally) -> dict:
    return {
        "class_votes": list(tally.class_votes),
        "edge_votes": [[u, v, votes] for (u, v), votes in sorted(tally.edge_votes.items())],
        "gamma": tally.gamma,
        "majority_label": tally.majority_label,
    }


def tally_from_obj(obj: dict) -> VoteTally:
    return VoteTally(
        tuple(int(v) for v in obj["class_votes"]),
        {(int(u), int(v)): int(n) for u, v, n in obj["edge_votes"]},
        float(obj["gamma"]),
        int(obj["majority_label"]),
    )


def explanation_to_obj(result: ExplanationResult) -> dict:
    return {
        "edges": [[u, v] for u, v in result.edges],
        "votes": list(result.votes),
        "k": result.k,
    }


def explanation_from_obj(obj: dict) -> ExplanationResult:
    return ExplanationResult(
        tuple((int(u), int(v)) for u, v in obj["edges"]),
        tuple(int(v) for v in obj["votes"]),
        int(obj["k"]),
    )
