"""Command-line front end: generate, train, certify, verify, sweep.

All commands are driven by a JSON config file; ``--seed`` and ``--out``
override the file. Seeds are mandatory so no run ever depends on the wall
clock. Result files are written atomically and embed the config digest and
mix seed; volatile data (timestamps) lives in a separate "meta" field so
byte comparison of the rest is meaningful.

Exit codes: 0 ok, 1 usage/config error, 2 verification violation, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from typing import Optional

from . import __version__
from .certify import certificate_to_obj, pipeline_digest
from .datasets import DatasetSpec, dataset_stats, generate, motif_size
from .division import DivisionConfig, DivisionConfigError
from .gcn import TrainConfig, load_params, save_params, train_classifier
from .graphs import GraphFormatError, _atomic_write_json, load_dataset, save_dataset
from .oracle import DEFAULT_ENUM_CAP, verify_certificate, verify_certificate_all
from .pipeline import (
    CLASSIFIER_KINDS,
    EXPLAINER_KINDS,
    build_classifier,
    build_explainer,
    certify_dataset,
    metrics_row,
    split_indices,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2
EXIT_IO = 3

SWEEP_DEFAULTS = {
    "T": [5, 10, 15],
    "p": [0.0, 0.2, 0.3, 0.4],
    "gamma": [0.2, 0.3, 0.4],
    "hash": ["md5", "sha1", "sha256"],
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    dataset: str
    out: str
    seed: int
    division: DivisionConfig
    gamma: float
    k: Optional[int]
    classifier: str
    explainer: str
    motif: str
    weights: Optional[str]
    epochs: int
    learning_rate: float
    hidden: int
    hybrid_augmentation: bool
    split: tuple[float, float, float]
    eval_split: str
    enum_cap: int
    workers: int
    sweep: dict

    @property
    def explanation_size(self) -> int:
        return self.k if self.k is not None else motif_size(self.motif)

    def weights_path(self) -> str:
        return self.weights or os.path.join(self.out, "weights.json")


def _require(obj: dict, field: str, types, where: str):
    if field not in obj:
        raise ConfigError(f"{where}: missing field {field!r}")
    value = obj[field]
    if not isinstance(value, types):
        raise ConfigError(f"{where}: field {field!r} has the wrong type")
    return value


def load_run_config(
    path: str, seed_flag: Optional[int] = None, out_flag: Optional[str] = None
) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    seed = seed_flag if seed_flag is not None else obj.get("seed")
    if seed is None:
        raise ConfigError(f"{path}: 'seed' must be set in the file or via --seed")
    out = out_flag if out_flag is not None else obj.get("out")
    if out is None:
        raise ConfigError(f"{path}: 'out' must be set in the file or via --out")

    try:
        division = DivisionConfig(
            num_subgraphs=int(obj.get("T", 10)),
            mix_fraction=float(obj.get("p", 0.3)),
            hash_name=str(obj.get("hash", "md5")),
            pad_width=int(obj.get("pad_width", 10)),
            mix_seed=int(obj.get("mix_seed", 0)),
        )
    except (DivisionConfigError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: division parameters: {exc}") from exc

    gamma = float(obj.get("gamma", 0.3))
    if not 0.0 < gamma < 1.0:
        raise ConfigError(f"{path}: field 'gamma' must lie in (0, 1)")
    classifier = obj.get("classifier", "gcn")
    if classifier not in CLASSIFIER_KINDS:
        raise ConfigError(f"{path}: field 'classifier' must be one of {CLASSIFIER_KINDS}")
    explainer = obj.get("explainer", "occlusion")
    if explainer not in EXPLAINER_KINDS:
        raise ConfigError(f"{path}: field 'explainer' must be one of {EXPLAINER_KINDS}")

    train_obj = obj.get("train", {})
    if not isinstance(train_obj, dict):
        raise ConfigError(f"{path}: field 'train' must be an object")
    split = tuple(obj.get("split", (0.7, 0.1, 0.2)))
    if len(split) != 3 or abs(sum(split) - 1.0) > 1e-9:
        raise ConfigError(f"{path}: field 'split' must be three fractions summing to 1")
    eval_split = obj.get("eval_split", "test")
    if eval_split not in ("train", "val", "test", "all"):
        raise ConfigError(f"{path}: field 'eval_split' must be train/val/test/all")

    k = obj.get("k")
    if k is not None and (not isinstance(k, int) or k < 1):
        raise ConfigError(f"{path}: field 'k' must be a positive integer or null")

    return RunConfig(
        dataset=_require(obj, "dataset", str, path),
        out=str(out),
        seed=int(seed),
        division=division,
        gamma=gamma,
        k=k,
        classifier=classifier,
        explainer=explainer,
        motif=str(obj.get("motif", "house")),
        weights=obj.get("weights"),
        epochs=int(train_obj.get("epochs", 300)),
        learning_rate=float(train_obj.get("learning_rate", 0.01)),
        hidden=int(train_obj.get("hidden", 32)),
        hybrid_augmentation=bool(train_obj.get("hybrid_augmentation", True)),
        split=(float(split[0]), float(split[1]), float(split[2])),
        eval_split=eval_split,
        enum_cap=int(obj.get("enum_cap", DEFAULT_ENUM_CAP)),
        workers=int(obj.get("workers", 1)),
        sweep={**SWEEP_DEFAULTS, **obj.get("sweep", {})},
    )


def _meta() -> dict:
    return {
        "created_at": datetime.now(timezone.utc).isoformat(),
        "tool_version": __version__,
    }


def _load_eval_graphs(cfg: RunConfig):
    graphs = load_dataset(cfg.dataset)
    splits = split_indices(len(graphs), cfg.seed, cfg.split)
    ids = splits[cfg.eval_split]
    return graphs, ids, [graphs[i] for i in ids]


def _make_models(cfg: RunConfig):
    params = None
    if cfg.classifier == "gcn":
        params = load_params(cfg.weights_path())
    classifier = build_classifier(cfg.classifier, params=params, motif=cfg.motif)
    return classifier, build_explainer(cfg.explainer, classifier)


def _write_csv(rows: list[dict], k: int, path: str) -> None:
    header = ["dataset", "classifier", "explainer", "T", "p", "gamma", "hash", "clf_acc", "exp_acc"]
    header += [f"M{lam}" for lam in range(1, k + 1)]
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)
    os.replace(tmp, path)


def cmd_generate(args) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{args.spec}: invalid JSON: {exc}") from exc
    if args.seed is not None:
        obj["seed"] = args.seed
    if "seed" not in obj:
        raise ConfigError(f"{args.spec}: 'seed' must be set in the spec or via --seed")
    try:
        spec = DatasetSpec(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{args.spec}: {exc}") from exc
    graphs = generate(spec)
    os.makedirs(args.out, exist_ok=True)
    dataset_path = os.path.join(args.out, "dataset.json")
    save_dataset(graphs, dataset_path)
    stats = dataset_stats(graphs) if graphs else {"n_graphs": 0}
    _atomic_write_json(
        {"meta": _meta(), "spec": obj, "stats": stats},
        os.path.join(args.out, "stats.json"),
    )
    print(f"wrote {len(graphs)} graphs to {dataset_path}")
    print(json.dumps(stats, sort_keys=True))
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_run_config(args.config, args.seed, args.out)
    graphs = load_dataset(cfg.dataset)
    splits = split_indices(len(graphs), cfg.seed, cfg.split)
    train_graphs = [graphs[i] for i in splits["train"]]
    tc = TrainConfig(
        hidden=cfg.hidden,
        num_classes=2,
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        seed=cfg.seed,
        division=cfg.division,
    )
    params = train_classifier(train_graphs, cfg.hybrid_augmentation, tc)
    os.makedirs(cfg.out, exist_ok=True)
    save_params(params, cfg.weights_path())
    print(
        f"trained on {len(train_graphs)} graphs "
        f"(hybrid_augmentation={cfg.hybrid_augmentation}); "
        f"weights -> {cfg.weights_path()}"
    )
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = load_run_config(args.config, args.seed, args.out)
    graphs, ids, eval_graphs = _load_eval_graphs(cfg)
    classifier, explainer = _make_models(cfg)
    k = cfg.explanation_size
    certs = certify_dataset(
        eval_graphs, cfg.division, classifier, explainer, cfg.gamma, k, cfg.workers
    )
    os.makedirs(cfg.out, exist_ok=True)
    payload = {
        "meta": _meta(),
        "config_digest": pipeline_digest(cfg.division, cfg.gamma, k),
        "mix_seed": cfg.division.mix_seed,
        "eval_split": cfg.eval_split,
        "certificates": [
            {"id": gid, **certificate_to_obj(cert, cfg.division, cfg.gamma)}
            for gid, cert in zip(ids, certs)
        ],
    }
    cert_path = os.path.join(cfg.out, "certificates.json")
    _atomic_write_json(payload, cert_path)
    row = metrics_row(
        os.path.basename(cfg.dataset),
        cfg.classifier,
        cfg.explainer,
        cfg.division,
        cfg.gamma,
        k,
        eval_graphs,
        certs,
    )
    _write_csv([row], k, os.path.join(cfg.out, "metrics.csv"))
    print(json.dumps(row, sort_keys=True))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = load_run_config(args.config, args.seed, args.out)
    graphs, ids, eval_graphs = _load_eval_graphs(cfg)
    classifier, explainer = _make_models(cfg)
    k = cfg.explanation_size
    reports = []
    any_violation = False
    for gid, g in zip(ids, eval_graphs):
        if g.num_nodes > args.max_n:
            continue
        cert = certify_dataset([g], cfg.division, classifier, explainer, cfg.gamma, k)[0]
        if args.lam is None:
            report = verify_certificate_all(
                g, cfg.division, classifier, explainer, cfg.gamma, k, cert,
                attack_model=args.attack_model, cap=cfg.enum_cap, graph_id=str(gid),
            )
        else:
            report = verify_certificate(
                g, cfg.division, classifier, explainer, cfg.gamma, k, cert, args.lam,
                attack_model=args.attack_model, cap=cfg.enum_cap, graph_id=str(gid),
            )
        reports.append(report)
        any_violation = any_violation or not report.sound
    os.makedirs(cfg.out, exist_ok=True)
    _atomic_write_json(
        {
            # per-report wall-clock timing stays in meta so the rest of the
            # file is byte-identical across reruns
            "meta": {**_meta(), "elapsed_seconds": round(sum(r.elapsed for r in reports), 6)},
            "config_digest": pipeline_digest(cfg.division, cfg.gamma, k),
            "mix_seed": cfg.division.mix_seed,
            "attack_model": args.attack_model,
            "reports": [r.to_obj(include_timing=False) for r in reports],
        },
        os.path.join(cfg.out, "attack_report.json"),
    )
    tried = sum(r.tried for r in reports)
    violations = sum(len(r.violations) for r in reports)
    print(
        f"verified {len(reports)} graphs, {tried} perturbation sets, "
        f"{violations} violation(s)"
    )
    return EXIT_VIOLATION if any_violation else EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_run_config(args.config, args.seed, args.out)
    values = cfg.sweep[args.axis]
    graphs = load_dataset(cfg.dataset)
    splits = split_indices(len(graphs), cfg.seed, cfg.split)
    train_graphs = [graphs[i] for i in splits["train"]]
    eval_graphs = [graphs[i] for i in splits[cfg.eval_split]]

    rows = []
    trained: dict[DivisionConfig, object] = {}
    k = cfg.explanation_size
    for value in values:
        division, gamma = cfg.division, cfg.gamma
        if args.axis == "T":
            division = replace(division, num_subgraphs=int(value))
        elif args.axis == "p":
            division = replace(division, mix_fraction=float(value))
        elif args.axis == "gamma":
            gamma = float(value)
        elif args.axis == "hash":
            division = replace(division, hash_name=str(value))

        if cfg.classifier == "gcn":
            if division not in trained:
                tc = TrainConfig(
                    hidden=cfg.hidden,
                    num_classes=2,
                    epochs=cfg.epochs,
                    learning_rate=cfg.learning_rate,
                    seed=cfg.seed,
                    division=division,
                )
                logger.info("sweep %s=%s: training", args.axis, value)
                trained[division] = train_classifier(
                    train_graphs, cfg.hybrid_augmentation, tc
                )
            classifier = build_classifier("gcn", params=trained[division])
        else:
            classifier = build_classifier(cfg.classifier, motif=cfg.motif)
        explainer = build_explainer(cfg.explainer, classifier)
        certs = certify_dataset(
            eval_graphs, division, classifier, explainer, gamma, k, cfg.workers
        )
        row = metrics_row(
            os.path.basename(cfg.dataset),
            cfg.classifier,
            cfg.explainer,
            division,
            gamma,
            k,
            eval_graphs,
            certs,
        )
        rows.append(row)
        print(json.dumps(row, sort_keys=True))
    os.makedirs(cfg.out, exist_ok=True)
    _write_csv(rows, k, os.path.join(cfg.out, f"metrics_sweep_{args.axis}.csv"))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors, not argparse's default 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="edgecert", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="JSON run config")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--out", help="overrides the config output directory")

    p_gen = sub.add_parser("generate", help="generate a synthetic motif dataset")
    p_gen.add_argument("--spec", required=True, help="JSON DatasetSpec file")
    p_gen.add_argument("--seed", type=int, help="overrides the spec seed")
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.set_defaults(func=cmd_generate)

    p_train = sub.add_parser("train", help="train the graph-convolution classifier")
    common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_cert = sub.add_parser("certify", help="emit certificates and metrics")
    common(p_cert)
    p_cert.set_defaults(func=cmd_certify)

    p_ver = sub.add_parser("verify", help="brute-force check emitted certificates")
    common(p_ver)
    p_ver.add_argument("--lam", type=int, default=None, help="single lambda to check")
    p_ver.add_argument("--max-n", type=int, default=8, help="skip graphs with more nodes")
    p_ver.add_argument(
        "--attack-model", choices=("stealth", "arbitrary"), default="stealth"
    )
    p_ver.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="metrics across one hyperparameter axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, choices=("T", "p", "gamma", "hash"))
    p_sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("EDGECERT_LOGLEVEL", "INFO"))
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse raises for usage errors and --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except GraphFormatError as exc:  # before ValueError: malformed data files are I/O
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except (ConfigError, ValueError, RuntimeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
