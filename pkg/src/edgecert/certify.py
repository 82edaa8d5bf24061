"""Certified perturbation sizes for the voting classifier and explainer.

For a divided graph with vote tally in hand, the certificate answers: up to
how many edge flips can an adversary apply while the majority prediction
provably stays put and at least ``lam`` of the k explanatory edges provably
remain in the explanation? Flipping one edge corrupts at most one hybrid
subgraph, so every class vote and every edge vote moves by at most M under
M flips; the bounds below are exact integer consequences of that fact plus
the deterministic tie-breaking (smaller class index wins class ties, smaller
edge wins edge ties).

The worst-case competitors for the explanation are the top-voted node pairs
absent from the graph (which an attacker could insert) together with the
graph's own non-explanatory edges.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

from .division import DivisionConfig, build_hybrid
from .graphs import Graph, complement_edges
from .models import Classifier, Explainer
from .voting import (
    ExplanationResult,
    VoteTally,
    make_tally,
    vote_explain,
    vote_order_key,
)


@dataclass(frozen=True)
class Certificate:
    """Per-lambda certified perturbation sizes plus the classifier-only bound."""

    majority_label: int
    runner_up: int
    classifier_bound: int
    per_lambda: Mapping[int, int]
    explanation: ExplanationResult
    k: int

    def __post_init__(self):
        sizes = [self.per_lambda[lam] for lam in range(1, self.k + 1)]
        if any(s < 0 for s in sizes):
            raise ValueError("certified sizes must be non-negative")
        if any(a < b for a, b in zip(sizes, sizes[1:])):
            raise ValueError("certified sizes must be non-increasing in lambda")
        if any(s > self.classifier_bound for s in sizes):
            raise ValueError("certified sizes cannot exceed the classifier bound")


def runner_up_label(class_votes: Sequence[int], majority: int) -> int:
    """Second-best class: most votes among the others, ties to smaller index."""
    if len(class_votes) < 2:
        raise ValueError("need at least two classes")
    best = None
    for c, v in enumerate(class_votes):
        if c == majority:
            continue
        if best is None or v > class_votes[best]:
            best = c
    return best


def classifier_bound(class_votes: Sequence[int], majority: int, runner_up: int) -> int:
    """Largest M with votes[majority] - M still winning against votes[runner_up] + M.

    The tie indicator credits the majority class when its index is smaller,
    because class ties resolve toward the smaller index.
    """
    if len(class_votes) < 2:
        raise ValueError("need at least two classes")
    if majority == runner_up:
        raise ValueError("majority and runner-up must differ")
    gap = class_votes[majority] - class_votes[runner_up]
    return (gap + (1 if majority < runner_up else 0) - 1) // 2


def explainer_bound(tally: VoteTally, base: Graph, k: int, lam: int) -> int:
    """Largest M keeping at least ``lam`` of the top-k edges ahead of competitors.

    The protected edge is the lam-th highest-voted explanatory edge; the
    competitor is the (k-lam+1)-th highest-voted edge among the top-M voted
    complement pairs joined with the non-explanatory real edges. Worst case,
    the protected edge loses M votes and the competitor gains M; the strict
    winning condition includes the edge-order tie indicator. While the
    competitor pool is smaller than the required rank, no attack of that
    size can field enough competitors to displace lam protected edges, so
    the budget passes outright.

    Once real competitors exist the condition is monotone in M (the pool
    only grows), so the search stops at the first failure, capped at the
    number of node pairs since no larger perturbation exists; 0 means even
    a single flip may break the guarantee.
    """
    if not 1 <= lam <= k:
        raise ValueError(f"lambda {lam} outside [1, {k}]")
    explanation = vote_explain(tally, base, k)
    votes = tally.edge_votes
    protected = explanation.edges[lam - 1]
    protected_votes = votes.get(protected, 0)

    key = vote_order_key(votes)
    top_k = set(explanation.edges)
    outside = sorted((e for e in base.edges if e not in top_k), key=key)
    missing = sorted(complement_edges(base), key=key)
    rank = k - lam + 1

    bound = 0
    max_flips = len(base.edges) + len(missing)
    for budget in range(1, max_flips + 1):
        pool = sorted(missing[:budget] + outside, key=key)
        if len(pool) < rank:
            bound = budget
            continue
        competitor = pool[rank - 1]
        competitor_votes = votes.get(competitor, 0)
        wins_tie = 1 if protected < competitor else 0
        if protected_votes - competitor_votes + wins_tie > 2 * budget:
            bound = budget
        else:
            break
    return bound


def certify(
    g: Graph,
    cfg: DivisionConfig,
    classifier: Classifier,
    explainer: Explainer,
    gamma: float,
    k: int,
) -> Certificate:
    """Run the full divide/vote pipeline and bound every lambda in [1, k]."""
    hybrid = build_hybrid(g, cfg)
    tally = make_tally(hybrid, classifier, explainer, gamma)
    explanation = vote_explain(tally, g, k)
    majority = tally.majority_label
    second = runner_up_label(tally.class_votes, majority)
    m_f = classifier_bound(tally.class_votes, majority, second)
    per_lambda = {
        lam: min(explainer_bound(tally, g, k, lam), m_f) for lam in range(1, k + 1)
    }
    return Certificate(majority, second, m_f, per_lambda, explanation, k)


def pipeline_digest(cfg: DivisionConfig, gamma: float, k: int) -> str:
    """Stable digest of everything the certificate arithmetic depends on."""
    payload = json.dumps(
        {
            "T": cfg.num_subgraphs,
            "p": cfg.mix_fraction,
            "hash": cfg.hash_name,
            "pad_width": cfg.pad_width,
            "mix_seed": cfg.mix_seed,
            "gamma": gamma,
            "k": k,
        },
        sort_keys=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("ascii")).hexdigest()


def certificate_to_obj(cert: Certificate, cfg: DivisionConfig, gamma: float) -> dict:
    return {
        "y": cert.majority_label,
        "b": cert.runner_up,
        "M_f": cert.classifier_bound,
        "per_lambda": {str(lam): cert.per_lambda[lam] for lam in range(1, cert.k + 1)},
        "explanation": [[u, v] for u, v in cert.explanation.edges],
        "explanation_votes": list(cert.explanation.votes),
        "k": cert.k,
        "mix_seed": cfg.mix_seed,
        "config_digest": pipeline_digest(cfg, gamma, cert.k),
    }


def certificate_from_obj(obj: dict) -> Certificate:
    per_lambda = {int(lam): int(v) for lam, v in obj["per_lambda"].items()}
    edges = tuple((int(u), int(v)) for u, v in obj["explanation"])
    votes = tuple(int(v) for v in obj.get("explanation_votes", [0] * len(edges)))
    explanation = ExplanationResult(edges, votes, int(obj["k"]))
    return Certificate(
        int(obj["y"]),
        int(obj["b"]),
        int(obj["M_f"]),
        per_lambda,
        explanation,
        int(obj["k"]),
    )
