"""Brute-force adversary that validates certificates by exhaustive attack.

For small graphs every perturbation set within the certified budget is
enumerated and the full divide/vote pipeline is re-run on the perturbed
graph. Any prediction flip or explanation overlap below the certified lambda
is a build-stopping defect in the division, voting or certification code.

Attack models:

* ``stealth`` (default): deletions never touch the current explanatory
  edges, matching the threat model the explanation guarantee is proved
  under (an attacker deleting the explanation outright is trivially
  detectable). The prediction check still runs over arbitrary flips, which
  the classifier-side bound does cover.
* ``arbitrary``: the overlap check too runs over arbitrary flips, including
  deletion of explanatory edges. With lam = k and a nonzero budget this can
  legitimately report violations: an explanation edge that is deleted can
  no longer be selected no matter how many votes it keeps.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Iterator, Optional, Sequence

from .certify import Certificate
from .division import DivisionConfig, build_hybrid, count_differing_subgraphs
from .graphs import Edge, Graph, complete_edges, flip_edges
from .models import CachingClassifier, CachingExplainer, Classifier, Explainer
from .voting import VoteTally, tally_classes, tally_edges, vote_explain

DEFAULT_ENUM_CAP = 5_000_000

VIOLATION_PREDICTION = "prediction-flip"
VIOLATION_OVERLAP = "overlap-below-lambda"
VIOLATION_SUBGRAPH_BOUND = "subgraph-bound"


class EnumerationCapError(RuntimeError):
    """Raised when the perturbation space exceeds the configured cap."""


@dataclass(frozen=True)
class Violation:
    flips: tuple[Edge, ...]
    kind: str
    lam: Optional[int] = None


@dataclass
class AttackReport:
    graph_id: str
    budget: int
    lam: Optional[int]
    attack_model: str
    tried: int = 0
    violations: list[Violation] = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def sound(self) -> bool:
        return not self.violations

    def to_obj(self, include_timing: bool = True) -> dict:
        obj = {
            "graph_id": self.graph_id,
            "budget": self.budget,
            "lambda": self.lam,
            "attack_model": self.attack_model,
            "tried": self.tried,
            "violations": [
                {
                    "flips": [[u, v] for u, v in viol.flips],
                    "kind": viol.kind,
                    "lambda": viol.lam,
                }
                for viol in self.violations
            ],
        }
        if include_timing:
            obj["elapsed_seconds"] = round(self.elapsed, 6)
        return obj


def _count_subsets(universe_size: int, budget: int) -> int:
    return sum(comb(universe_size, m) for m in range(1, budget + 1))


def _subsets(
    universe: Sequence[Edge], budget: int, cap: int
) -> Iterator[tuple[Edge, ...]]:
    total = _count_subsets(len(universe), budget)
    if total > cap:
        raise EnumerationCapError(
            f"{total} perturbation sets exceed the cap of {cap}; shrink n or the budget"
        )
    for size in range(1, budget + 1):
        yield from combinations(universe, size)


def enumerate_perturbations(
    g: Graph, budget: int, cap: int = DEFAULT_ENUM_CAP
) -> Iterator[tuple[Edge, ...]]:
    """Every set of 1..budget edge flips over the complete edge set, once each."""
    return _subsets(complete_edges(g.num_nodes), budget, cap)


def verify_subgraph_bound(
    g: Graph,
    cfg: DivisionConfig,
    budget: int,
    cap: int = DEFAULT_ENUM_CAP,
    graph_id: str = "",
) -> AttackReport:
    """Check that |s| flips never change more than |s| hybrid subgraphs."""
    report = AttackReport(graph_id, budget, None, "arbitrary")
    start = time.perf_counter()
    baseline = build_hybrid(g, cfg)
    if budget >= 1:
        for flips in enumerate_perturbations(g, budget, cap):
            report.tried += 1
            perturbed = build_hybrid(flip_edges(g, flips), cfg)
            if count_differing_subgraphs(baseline, perturbed) > len(flips):
                report.violations.append(Violation(flips, VIOLATION_SUBGRAPH_BOUND))
    report.elapsed = time.perf_counter() - start
    return report


def _verify_lambdas(
    g: Graph,
    cfg: DivisionConfig,
    classifier: Classifier,
    explainer: Explainer,
    gamma: float,
    k: int,
    cert: Certificate,
    lams: Sequence[int],
    attack_model: str,
    cap: int,
    graph_id: str,
) -> AttackReport:
    if attack_model not in ("stealth", "arbitrary"):
        raise ValueError(f"unknown attack model {attack_model!r}")
    budgets = {lam: cert.per_lambda[lam] for lam in lams}
    max_budget = max(budgets.values(), default=0)
    lam_field = lams[0] if len(lams) == 1 else None
    report = AttackReport(graph_id, max_budget, lam_field, attack_model)
    start = time.perf_counter()
    if max_budget == 0:
        report.elapsed = time.perf_counter() - start
        return report

    clf = CachingClassifier(classifier)
    exp = CachingExplainer(explainer)
    protected = set(cert.explanation.edges)
    y = cert.majority_label

    for flips in enumerate_perturbations(g, max_budget, cap):
        live = [lam for lam in lams if budgets[lam] >= len(flips)]
        if not live:
            continue
        report.tried += 1
        stealthy = attack_model == "arbitrary" or not (set(flips) & protected)
        perturbed = flip_edges(g, flips)
        hybrid = build_hybrid(perturbed, cfg)
        class_votes, majority = tally_classes(hybrid, clf)
        if majority != y:
            report.violations.append(Violation(flips, VIOLATION_PREDICTION))
            continue
        if not stealthy:
            continue
        edge_votes = tally_edges(hybrid, clf, exp, majority, gamma)
        tally = VoteTally(class_votes, edge_votes, gamma, majority)
        k_eff = min(k, perturbed.num_edges)
        if k_eff >= 1:
            new_edges = vote_explain(tally, perturbed, k_eff).edges
            overlap = len(set(new_edges) & protected)
        else:
            overlap = 0
        for lam in live:
            if overlap < lam:
                report.violations.append(Violation(flips, VIOLATION_OVERLAP, lam))
    report.elapsed = time.perf_counter() - start
    return report


def verify_certificate(
    g: Graph,
    cfg: DivisionConfig,
    classifier: Classifier,
    explainer: Explainer,
    gamma: float,
    k: int,
    cert: Certificate,
    lam: int,
    attack_model: str = "stealth",
    cap: int = DEFAULT_ENUM_CAP,
    graph_id: str = "",
) -> AttackReport:
    """Exhaustively test one lambda's certified budget on one graph.

    Every perturbation within the budget must keep the majority prediction;
    perturbations admissible under the attack model must additionally leave
    at least ``lam`` certified explanatory edges in the new explanation.
    """
    if not 1 <= lam <= cert.k:
        raise ValueError(f"lambda {lam} outside [1, {cert.k}]")
    return _verify_lambdas(
        g, cfg, classifier, explainer, gamma, k, cert, [lam], attack_model, cap, graph_id
    )


def verify_certificate_all(
    g: Graph,
    cfg: DivisionConfig,
    classifier: Classifier,
    explainer: Explainer,
    gamma: float,
    k: int,
    cert: Certificate,
    attack_model: str = "stealth",
    cap: int = DEFAULT_ENUM_CAP,
    graph_id: str = "",
) -> AttackReport:
    """One enumeration pass covering every lambda at its own budget."""
    return _verify_lambdas(
        g,
        cfg,
        classifier,
        explainer,
        gamma,
        k,
        cert,
        list(range(1, cert.k + 1)),
        attack_model,
        cap,
        graph_id,
    )
