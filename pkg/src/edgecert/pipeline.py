"""End-to-end orchestration: splits, model wiring, metrics aggregation."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from .certify import Certificate, certify
from .datasets import motif_graph
from .division import DivisionConfig
from .gcn import GcnClassifier, GcnParams
from .graphs import Graph
from .models import Classifier, Explainer, OcclusionExplainer
from .motifs import MotifMatchClassifier

logger = logging.getLogger(__name__)

CLASSIFIER_KINDS = ("gcn", "motif-oracle")
EXPLAINER_KINDS = ("occlusion",)


def split_indices(
    n: int, seed: int, fractions: tuple[float, float, float] = (0.7, 0.1, 0.2)
) -> dict[str, list[int]]:
    """Seeded train/val/test permutation split; fractions must sum to 1."""
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError("split fractions must sum to 1")
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(np.floor(fractions[0] * n + 1e-9))
    n_val = int(np.floor(fractions[1] * n + 1e-9))
    return {
        "train": [int(i) for i in order[:n_train]],
        "val": [int(i) for i in order[n_train : n_train + n_val]],
        "test": [int(i) for i in order[n_train + n_val :]],
        "all": list(range(n)),
    }


def build_classifier(
    kind: str, params: Optional[GcnParams] = None, motif: Optional[str] = None
) -> Classifier:
    if kind == "gcn":
        if params is None:
            raise ValueError("gcn classifier needs trained weights")
        return GcnClassifier(params)
    if kind == "motif-oracle":
        if motif is None:
            raise ValueError("motif-oracle classifier needs a motif name")
        return MotifMatchClassifier(motif_graph(motif))
    raise ValueError(f"unknown classifier kind {kind!r}; choose from {CLASSIFIER_KINDS}")


def build_explainer(kind: str, classifier: Classifier) -> Explainer:
    if kind == "occlusion":
        return OcclusionExplainer(classifier)
    raise ValueError(f"unknown explainer kind {kind!r}; choose from {EXPLAINER_KINDS}")


def certify_dataset(
    graphs: Sequence[Graph],
    cfg: DivisionConfig,
    classifier: Classifier,
    explainer: Explainer,
    gamma: float,
    k: int,
    workers: int = 1,
) -> list[Certificate]:
    """Certificates for every graph, merged back in input order."""
    too_small = [i for i, g in enumerate(graphs) if g.num_edges < k]
    if too_small:
        raise ValueError(
            f"k={k} exceeds the edge count of graphs {too_small[:5]}; "
            "use a denser dataset or a smaller k"
        )

    def one(g: Graph) -> Certificate:
        return certify(g, cfg, classifier, explainer, gamma, k)

    if workers <= 1:
        return [one(g) for g in graphs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, graphs))


def explanation_accuracy(graphs: Sequence[Graph], certs: Sequence[Certificate]) -> float:
    """Mean fraction of output explanatory edges inside the ground truth.

    Computed over graphs that carry a non-empty ground truth.
    """
    ratios = []
    for g, cert in zip(graphs, certs):
        if g.gt_explanation:
            gt = set(g.gt_explanation)
            hits = sum(1 for e in cert.explanation.edges if e in gt)
            ratios.append(hits / cert.k)
    if not ratios:
        raise ValueError("no graph carries a ground-truth explanation")
    return float(np.mean(ratios))


def random_topk_baseline(graphs: Sequence[Graph]) -> float:
    """Expected overlap fraction of a uniformly random k-edge explanation.

    Each uniformly chosen edge lies in the ground truth with probability
    |gt| / |E|, so the expected fraction is independent of k.
    """
    ratios = [
        len(g.gt_explanation) / g.num_edges for g in graphs if g.gt_explanation
    ]
    if not ratios:
        raise ValueError("no graph carries a ground-truth explanation")
    return float(np.mean(ratios))


def classification_accuracy(graphs: Sequence[Graph], certs: Sequence[Certificate]) -> float:
    labeled = [(g, c) for g, c in zip(graphs, certs) if g.label is not None]
    if not labeled:
        raise ValueError("no labeled graphs to score")
    return float(
        np.mean([1.0 if c.majority_label == g.label else 0.0 for g, c in labeled])
    )


def mean_certified_sizes(certs: Sequence[Certificate], k: int) -> list[float]:
    """Average certified perturbation size per lambda, over all graphs."""
    return [
        float(np.mean([c.per_lambda[lam] for c in certs])) for lam in range(1, k + 1)
    ]


def metrics_row(
    dataset_name: str,
    classifier_kind: str,
    explainer_kind: str,
    cfg: DivisionConfig,
    gamma: float,
    k: int,
    graphs: Sequence[Graph],
    certs: Sequence[Certificate],
) -> dict:
    row = {
        "dataset": dataset_name,
        "classifier": classifier_kind,
        "explainer": explainer_kind,
        "T": cfg.num_subgraphs,
        "p": cfg.mix_fraction,
        "gamma": gamma,
        "hash": cfg.hash_name,
        "clf_acc": round(classification_accuracy(graphs, certs), 6),
        "exp_acc": round(explanation_accuracy(graphs, certs), 6),
    }
    for lam, mean in enumerate(mean_certified_sizes(certs, k), start=1):
        row[f"M{lam}"] = round(mean, 6)
    return row
