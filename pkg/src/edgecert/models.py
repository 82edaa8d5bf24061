"""Classifier/explainer interfaces shared by the voting and oracle layers."""

from __future__ import annotations

from typing import Protocol, runtime_checkable

import numpy as np

from .graphs import Edge, Graph, flip_edges


def predict_label(scores: np.ndarray) -> int:
    """Argmax with ties broken toward the smaller class index."""
    return int(np.argmax(scores))


@runtime_checkable
class Classifier(Protocol):
    num_classes: int

    def classify(self, g: Graph) -> np.ndarray: ...


@runtime_checkable
class Explainer(Protocol):
    def explain(self, g: Graph, label: int) -> dict[Edge, float]: ...


class OcclusionExplainer:
    """Edge importance as the drop of the target-class score on edge removal.

    Works with any classifier; deterministic; an edge whose removal leaves
    the score unchanged gets importance exactly 0.
    """

    def __init__(self, classifier: Classifier):
        self.classifier = classifier

    def explain(self, g: Graph, label: int) -> dict[Edge, float]:
        base = float(self.classifier.classify(g)[label])
        scores: dict[Edge, float] = {}
        for e in g.edges:
            reduced = flip_edges(g, (e,))
            scores[e] = base - float(self.classifier.classify(reduced)[label])
        return scores


class CachingClassifier:
    """Memoizes classify() by edge set.

    Valid only while every queried graph shares node count and features,
    which holds across edge perturbations of one base graph.
    """

    def __init__(self, classifier: Classifier):
        self.inner = classifier
        self.num_classes = classifier.num_classes
        self._cache: dict[tuple, np.ndarray] = {}

    def classify(self, g: Graph) -> np.ndarray:
        key = g.edges
        hit = self._cache.get(key)
        if hit is None:
            hit = self.inner.classify(g)
            self._cache[key] = hit
        return hit


class CachingExplainer:
    """Memoizes explain() by (edge set, label); same validity rule as above."""

    def __init__(self, explainer: Explainer):
        self.inner = explainer
        self._cache: dict[tuple, dict[Edge, float]] = {}

    def explain(self, g: Graph, label: int) -> dict[Edge, float]:
        key = (g.edges, label)
        hit = self._cache.get(key)
        if hit is None:
            hit = self.inner.explain(g, label)
            self._cache[key] = hit
        return hit
