"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines inline. The module-scoped fixtures share one desk-scale dataset and a
cache of trained classifiers so the whole gate stays within a few minutes.

Criterion 5 is split into its two stated clauses: the voting-accuracy clause
(5a) and the occlusion explanation-accuracy clause (5b). 5b is known to fail
at desk scale and is intentionally not weakened; see the analysis printed by
the test and the README's "Known limitation" section.
"""

import json
import time

import numpy as np
import pytest

import edgecert as ec
from edgecert.cli import EXIT_OK, main
from edgecert.datasets import MOTIF_SHAPES
from edgecert.gcn import TrainConfig, init_params, save_params
from edgecert.pipeline import (
    certify_dataset,
    classification_accuracy,
    explanation_accuracy,
    mean_certified_sizes,
    random_topk_baseline,
    split_indices,
)

SEED = 7


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")


class DeskScale:
    """200-graph house dataset, its split, and lazily trained classifiers."""

    def __init__(self, root):
        self.root = root
        self.graphs = ec.generate(ec.DatasetSpec(n_graphs=200, motif="house", seed=SEED))
        self.dataset_path = str(root / "dataset.json")
        ec.save_dataset(self.graphs, self.dataset_path)
        self.splits = split_indices(len(self.graphs), SEED)
        self.train_graphs = [self.graphs[i] for i in self.splits["train"]]
        self.test_graphs = [self.graphs[i] for i in self.splits["test"]]
        self._params = {}
        self.metric_rows: list[list[float]] = []

    def params_for(self, division: ec.DivisionConfig):
        if division not in self._params:
            cfg = TrainConfig(
                hidden=32, epochs=300, learning_rate=0.01, seed=SEED, division=division
            )
            self._params[division] = ec.train_classifier(self.train_graphs, True, cfg)
        return self._params[division]

    def evaluate(self, division, gamma=0.3, k=6, graphs=None):
        graphs = self.test_graphs if graphs is None else graphs
        clf = ec.GcnClassifier(self.params_for(division))
        explainer = ec.OcclusionExplainer(clf)
        certs = certify_dataset(graphs, division, clf, explainer, gamma, k)
        means = mean_certified_sizes(certs, k)
        self.metric_rows.append(means)
        return {
            "clf_acc": classification_accuracy(graphs, certs),
            "exp_acc": explanation_accuracy(graphs, certs),
            "baseline": random_topk_baseline(graphs),
            "mean_m": means,
        }


@pytest.fixture(scope="module")
def desk(tmp_path_factory):
    return DeskScale(tmp_path_factory.mktemp("desk"))


def small_motif_instances(seed: int, count: int):
    """Seeded graphs on at most 7 nodes, most containing a planted motif."""
    rng = np.random.default_rng(seed)
    out = []
    for idx in range(count):
        motif_name = "diamond" if idx % 5 < 3 else "house"
        motif_n, motif_edges = MOTIF_SHAPES[motif_name]
        n = int(rng.integers(max(5, motif_n), 8))
        edges = set()
        if idx % 5 != 4:
            place = rng.choice(n, size=motif_n, replace=False)
            edges |= {
                ec.canonical_edge(int(place[u]), int(place[v])) for u, v in motif_edges
            }
        pairs = ec.complete_edges(n)
        mask = rng.random(len(pairs)) < 0.25
        edges |= {e for e, keep in zip(pairs, mask) if keep}
        k = ec.motif_size(motif_name)
        extras = [e for e in pairs if e not in edges]
        while len(edges) < k:
            edges.add(extras.pop())
        out.append((ec.make_graph(n, sorted(edges)), motif_name, k))
    return out


def test_criterion_1_subgraph_bound_exhaustive():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    tried = 0
    violations = 0
    for sample in range(50):
        density = float(rng.uniform(0.2, 0.8))
        pairs = ec.complete_edges(5)
        mask = rng.random(len(pairs)) < density
        g = ec.make_graph(5, [e for e, keep in zip(pairs, mask) if keep])
        for t in (3, 5):
            cfg = ec.DivisionConfig(t, 0.3, "md5", 10, mix_seed=sample)
            report_ = ec.verify_subgraph_bound(g, cfg, 3)
            tried += report_.tried
            violations += len(report_.violations)
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 60.0
    report(
        "CRITERION 1 [bounded subgraph corruption, exhaustive]",
        ok,
        f"{violations} violations over {tried} perturbation sets, {elapsed:.1f}s (< 60s)",
    )
    assert violations == 0
    assert elapsed < 60.0


def test_criterion_2_certificate_soundness_exhaustive():
    instances = small_motif_instances(2024, 100)
    start = time.perf_counter()
    tried = 0
    violations = []
    nonzero_budgets = 0
    for t in (3, 5):
        for idx, (g, motif_name, k) in enumerate(instances):
            cfg = ec.DivisionConfig(t, 0.3, "md5", 10, mix_seed=99)
            clf = ec.MotifMatchClassifier(ec.motif_graph(motif_name))
            explainer = ec.OcclusionExplainer(clf)
            cert = ec.certify(g, cfg, clf, explainer, 0.3, k)
            if max(cert.per_lambda.values()) > 0:
                nonzero_budgets += 1
            rep = ec.verify_certificate_all(
                g, cfg, clf, explainer, 0.3, k, cert, graph_id=f"{t}/{idx}"
            )
            tried += rep.tried
            violations.extend(rep.violations)
    elapsed = time.perf_counter() - start
    ok = not violations and elapsed < 600.0
    report(
        "CRITERION 2 [certificate soundness, exhaustive]",
        ok,
        f"{len(violations)} violations over {tried} perturbation sets on 100 graphs x T in {{3,5}} "
        f"({nonzero_budgets} runs with nonzero budgets), {elapsed:.1f}s (< 600s)",
    )
    assert nonzero_budgets >= 100  # the check must not be vacuous
    assert violations == []
    assert elapsed < 600.0


def test_criterion_3_bound_arithmetic_goldens():
    checks = [
        ec.classifier_bound((10, 4), 0, 1) == 3,
        ec.classifier_bound((5, 5), 0, 1) == 0,
        ec.classifier_bound((4, 5), 1, 0) == 0,
    ]

    class ConstantClassifier:
        num_classes = 2

        def classify(self, g):
            return np.array([1.0, 0.0])

    class ConstantExplainer:
        def explain(self, g, label):
            return {e: 1.0 for e in g.edges}

    g = ec.make_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)])
    cfg = ec.DivisionConfig(3, 0.34, "md5", 10, 0)
    cert = ec.certify(g, cfg, ConstantClassifier(), ConstantExplainer(), 0.3, 4)
    golden = (
        cert.majority_label == 0
        and cert.runner_up == 1
        and cert.classifier_bound == 1
        and dict(cert.per_lambda) == {1: 1, 2: 1, 3: 1, 4: 0}
        and cert.explanation.edges == ((0, 1), (2, 3), (0, 3), (1, 2))
    )
    ok = all(checks) and golden
    report(
        "CRITERION 3 [bound arithmetic goldens]",
        ok,
        f"classifier-bound examples {checks}, constant-tally certificate match {golden}",
    )
    assert all(checks)
    assert golden


def test_criterion_4_gcn_gradient_check():
    rng = np.random.default_rng(SEED)
    eps = 1e-4
    worst = 0.0
    for _ in range(10):
        pairs = ec.complete_edges(5)
        mask = rng.random(len(pairs)) < 0.6
        g = ec.make_graph(
            5, [e for e, keep in zip(pairs, mask) if keep], features=rng.normal(size=(5, 4))
        )
        params = init_params(4, TrainConfig(hidden=6), rng)
        target = int(rng.integers(0, 2))
        analytic = ec.gcn_backward(params, g, target)

        def loss_of(p):
            logits = ec.gcn_forward(p, g)
            shift = logits - logits.max()
            return -(shift[target] - np.log(np.exp(shift).sum()))

        for name in ("w1", "w2", "w3", "w_out"):
            w = getattr(params, name)
            for idx in np.ndindex(*w.shape):
                mats = {
                    n: getattr(params, n).copy() for n in ("w1", "w2", "w3", "w_out")
                }
                mats[name][idx] += eps
                up = loss_of(ec.GcnParams(**mats))
                mats[name][idx] -= 2 * eps
                down = loss_of(ec.GcnParams(**mats))
                fd = (up - down) / (2 * eps)
                an = analytic[name][idx]
                worst = max(worst, abs(an - fd) / max(1.0, abs(an), abs(fd)))
    ok = worst <= 1e-4
    report(
        "CRITERION 4 [gradient check vs central differences]",
        ok,
        f"max relative error {worst:.2e} (<= 1e-4) over 10 random 5-node graphs",
    )
    assert worst <= 1e-4


DESK_DIVISION = ec.DivisionConfig(10, 0.3, "md5", 10, mix_seed=SEED)


def test_criterion_5a_desk_scale_voting_accuracy(desk):
    result = desk.evaluate(DESK_DIVISION)
    ok = result["clf_acc"] >= 0.85
    report(
        "CRITERION 5a [desk-scale voting accuracy]",
        ok,
        f"voting test accuracy {result['clf_acc']:.3f} (>= 0.85) on SG+House, "
        f"T=10 p=0.3 gamma=0.3, hybrid-augmented training",
    )
    assert result["clf_acc"] >= 0.85


def test_criterion_5b_desk_scale_explanation_accuracy(desk):
    """Known-failing clause, asserted at its stated tolerance.

    Occlusion importance under this pipeline is structurally uninformative:
    hybrid-augmented training teaches the classifier that wildly different
    edge sets share a label, so single-edge sensitivity is noise; each hybrid
    also carries ~30% of all node pairs, which plants motif-shaped noise that
    saturates even a perfect motif detector. The trained-explainer numbers
    the bar was scaled from do not transfer to occlusion. Measured accuracy
    sits at 0.15-0.24 against a 2x-random bar of ~0.6 across every dataset,
    feature-mode and training variant tried; even the exact motif-oracle
    classifier only reaches 0.18 here. See the README's "Known limitation"
    section.
    """
    result = desk.evaluate(DESK_DIVISION)
    bar = 2 * result["baseline"]
    ok = result["exp_acc"] >= bar
    report(
        "CRITERION 5b [desk-scale occlusion explanation accuracy]",
        ok,
        f"explanation accuracy {result['exp_acc']:.3f} vs 2x random baseline "
        f"{bar:.3f} - structurally unattainable with occlusion, kept red",
    )
    assert result["exp_acc"] >= bar, (
        f"occlusion explanation accuracy {result['exp_acc']:.3f} is below the "
        f"2x-random bar {bar:.3f}; known limitation of occlusion under this "
        "pipeline (see this test's docstring and the README), intentionally "
        "not weakened"
    )


def test_criterion_6a_certified_size_non_increasing(desk):
    desk.evaluate(DESK_DIVISION)
    rows = desk.metric_rows
    ok = all(row == sorted(row, reverse=True) for row in rows)
    report(
        "CRITERION 6a [mean certified size non-increasing in lambda]",
        ok,
        f"checked {len(rows)} metric rows",
    )
    assert ok


def test_criterion_6b_mixing_collapse_at_p_zero(desk):
    division = ec.DivisionConfig(10, 0.0, "md5", 10, mix_seed=SEED)
    result = desk.evaluate(division)
    ok = result["exp_acc"] < 0.15
    report(
        "CRITERION 6b [p=0 explanation collapse]",
        ok,
        f"explanation accuracy {result['exp_acc']:.3f} (< 0.15) without complete-graph mixing",
    )
    assert ok


def test_criterion_6c_hash_insensitivity(desk):
    accs = {}
    for hash_name in ("md5", "sha1", "sha256"):
        division = ec.DivisionConfig(10, 0.3, hash_name, 10, mix_seed=SEED)
        # full-dataset evaluation: the sweep measures a method property, and
        # 200 graphs keep the +-0.05 band meaningful
        result = desk.evaluate(division, graphs=desk.graphs)
        accs[hash_name] = result
    exp_spread = max(r["exp_acc"] for r in accs.values()) - min(
        r["exp_acc"] for r in accs.values()
    )
    clf_spread = max(r["clf_acc"] for r in accs.values()) - min(
        r["clf_acc"] for r in accs.values()
    )
    ok = exp_spread <= 0.05 and clf_spread <= 0.05
    report(
        "CRITERION 6c [hash-function insensitivity]",
        ok,
        f"explanation spread {exp_spread:.3f}, accuracy spread {clf_spread:.3f} (<= 0.05) "
        f"across md5/sha1/sha256",
    )
    assert ok


def test_criterion_7_certify_determinism(desk, tmp_path):
    weights_path = tmp_path / "weights.json"
    save_params(desk.params_for(DESK_DIVISION), str(weights_path))
    config = {
        "dataset": desk.dataset_path,
        "out": str(tmp_path / "a"),
        "seed": SEED,
        "T": 10,
        "p": 0.3,
        "gamma": 0.3,
        "hash": "md5",
        "mix_seed": SEED,
        "classifier": "gcn",
        "weights": str(weights_path),
        "motif": "house",
        "eval_split": "test",
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    assert main(["certify", "--config", str(config_path)]) == EXIT_OK
    assert (
        main(["certify", "--config", str(config_path), "--out", str(tmp_path / "b")])
        == EXIT_OK
    )
    payloads = []
    for sub in ("a", "b"):
        obj = json.loads((tmp_path / sub / "certificates.json").read_text())
        obj.pop("meta")
        payloads.append(json.dumps(obj, sort_keys=True))
    ok = payloads[0] == payloads[1]
    report(
        "CRITERION 7 [certify determinism]",
        ok,
        "byte-identical certificate JSON across reruns (timestamp field excluded)",
    )
    assert ok
