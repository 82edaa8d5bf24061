"""Reference graph-convolution classifier with exact analytic gradients.

Three rounds of symmetrically normalized neighbor averaging (self-loops
added), each followed by a linear map and ReLU, then mean pooling over nodes
and a linear readout. No biases. Training is full-batch Adam from a single
seed; repeated runs with the same seed and backend reproduce the parameters
bit for bit.

The per-graph forward and fused loss/gradient kernels are the hot path of
training and of occlusion explanation, and compile under numba on the
default backend.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .backend import maybe_njit
from .division import DivisionConfig, build_hybrid
from .graphs import Graph
from .models import predict_label

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GcnParams:
    """Weights: input d->h, two h->h rounds, readout h->num_classes."""

    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    w_out: np.ndarray

    def __post_init__(self):
        d, h = self.w1.shape
        if self.w2.shape != (h, h) or self.w3.shape != (h, h):
            raise ValueError("hidden weight shapes must chain h -> h")
        if self.w_out.shape[0] != h:
            raise ValueError("readout input width must equal hidden width")
        if self.w_out.shape[1] < 2:
            raise ValueError("need at least two classes")

    @property
    def feature_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def num_classes(self) -> int:
        return self.w_out.shape[1]


def normalized_adjacency(g: Graph) -> np.ndarray:
    """D^{-1/2} (A + I) D^{-1/2}; the identity keeps isolated nodes finite."""
    a = g.adjacency()
    np.fill_diagonal(a, 1.0)
    dinv = 1.0 / np.sqrt(a.sum(axis=1))
    return a * dinv[:, None] * dinv[None, :]


@maybe_njit
def _forward_kernel(adj, x, w1, w2, w3, w_out):  # pragma: no cover - jitted
    h1 = np.maximum((adj @ x) @ w1, 0.0)
    h2 = np.maximum((adj @ h1) @ w2, 0.0)
    h3 = np.maximum((adj @ h2) @ w3, 0.0)
    pooled = np.sum(h3, axis=0) / h3.shape[0]
    return pooled @ w_out


@maybe_njit
def _loss_grads_kernel(adj, x, label, w1, w2, w3, w_out):  # pragma: no cover - jitted
    n = x.shape[0]
    ax = adj @ x
    z1 = ax @ w1
    h1 = np.maximum(z1, 0.0)
    ah1 = adj @ h1
    z2 = ah1 @ w2
    h2 = np.maximum(z2, 0.0)
    ah2 = adj @ h2
    z3 = ah2 @ w3
    h3 = np.maximum(z3, 0.0)
    pooled = np.sum(h3, axis=0) / n
    logits = pooled @ w_out

    mx = np.max(logits)
    ex = np.exp(logits - mx)
    sx = np.sum(ex)
    loss = -(logits[label] - mx - np.log(sx))
    dlogits = ex / sx
    dlogits[label] -= 1.0

    g_wout = np.ascontiguousarray(pooled.reshape(-1, 1)) @ np.ascontiguousarray(
        dlogits.reshape(1, -1)
    )
    dpooled = (w_out @ dlogits) / n
    dz3 = np.where(z3 > 0.0, 1.0, 0.0) * dpooled
    g_w3 = np.ascontiguousarray(ah2.T) @ dz3
    dh2 = adj @ (dz3 @ np.ascontiguousarray(w3.T))
    dz2 = np.where(z2 > 0.0, 1.0, 0.0) * dh2
    g_w2 = np.ascontiguousarray(ah1.T) @ dz2
    dh1 = adj @ (dz2 @ np.ascontiguousarray(w2.T))
    dz1 = np.where(z1 > 0.0, 1.0, 0.0) * dh1
    g_w1 = np.ascontiguousarray(ax.T) @ dz1
    return loss, g_w1, g_w2, g_w3, g_wout


def gcn_forward(params: GcnParams, g: Graph) -> np.ndarray:
    """Pre-softmax logits for one graph."""
    if g.features.shape[1] != params.feature_dim:
        raise ValueError(
            f"feature dim {g.features.shape[1]} does not match model ({params.feature_dim})"
        )
    adj = normalized_adjacency(g)
    return np.asarray(
        _forward_kernel(adj, g.features, params.w1, params.w2, params.w3, params.w_out)
    )


def gcn_backward(params: GcnParams, g: Graph, target: int) -> dict[str, np.ndarray]:
    """Exact cross-entropy gradients w.r.t. every weight matrix."""
    if not 0 <= target < params.num_classes:
        raise ValueError(f"target {target} outside [0, {params.num_classes})")
    adj = normalized_adjacency(g)
    _, g1, g2, g3, go = _loss_grads_kernel(
        adj, g.features, np.int64(target), params.w1, params.w2, params.w3, params.w_out
    )
    return {"w1": g1, "w2": g2, "w3": g3, "w_out": go}


class GcnClassifier:
    """Trained weights wrapped behind the classify protocol."""

    def __init__(self, params: GcnParams):
        self.params = params

    @property
    def num_classes(self) -> int:
        return self.params.num_classes

    def classify(self, g: Graph) -> np.ndarray:
        return gcn_forward(self.params, g)


@dataclass(frozen=True)
class TrainConfig:
    hidden: int = 32
    num_classes: int = 2
    epochs: int = 300
    learning_rate: float = 0.01
    seed: int = 0
    division: Optional[DivisionConfig] = None


def init_params(feature_dim: int, cfg: TrainConfig, rng: np.random.Generator) -> GcnParams:
    def glorot(fan_in, fan_out):
        scale = np.sqrt(2.0 / (fan_in + fan_out))
        return rng.normal(0.0, scale, size=(fan_in, fan_out))

    h = cfg.hidden
    return GcnParams(
        glorot(feature_dim, h), glorot(h, h), glorot(h, h), glorot(h, cfg.num_classes)
    )


def _prepare_samples(dataset: Sequence[Graph], hybrid_augmentation: bool, cfg: TrainConfig):
    samples = []
    feature_dim = dataset[0].features.shape[1]
    for g in dataset:
        if g.label is None:
            raise ValueError("training requires labeled graphs")
        if not 0 <= g.label < cfg.num_classes:
            raise ValueError(f"label {g.label} outside [0, {cfg.num_classes})")
        if g.features.shape[1] != feature_dim:
            raise ValueError(
                f"feature dim mismatch in training set: {g.features.shape[1]} vs {feature_dim}"
            )
        samples.append((normalized_adjacency(g), g.features, np.int64(g.label)))
        if hybrid_augmentation:
            for sub in build_hybrid(g, cfg.division).subgraphs:
                samples.append((normalized_adjacency(sub), sub.features, np.int64(g.label)))
    return samples


def train_classifier(
    dataset: Sequence[Graph], hybrid_augmentation: bool, cfg: TrainConfig
) -> GcnParams:
    """Full-batch Adam on originals plus, optionally, their hybrid subgraphs.

    Augmented subgraphs inherit the parent graph's label, so the classifier
    sees the same mixture of real and complete-graph edges at train time that
    the voting layer feeds it at test time.
    """
    if not dataset:
        raise ValueError("empty training dataset")
    if hybrid_augmentation and cfg.division is None:
        raise ValueError("hybrid augmentation needs a DivisionConfig in TrainConfig")
    feature_dim = dataset[0].features.shape[1]
    samples = _prepare_samples(dataset, hybrid_augmentation, cfg)

    rng = np.random.default_rng(cfg.seed)
    params = init_params(feature_dim, cfg, rng)
    weights = [params.w1.copy(), params.w2.copy(), params.w3.copy(), params.w_out.copy()]
    m_state = [np.zeros_like(w) for w in weights]
    v_state = [np.zeros_like(w) for w in weights]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    n_samples = len(samples)

    for epoch in range(1, cfg.epochs + 1):
        grads = [np.zeros_like(w) for w in weights]
        total_loss = 0.0
        for adj, feats, label in samples:
            loss, g1, g2, g3, go = _loss_grads_kernel(adj, feats, label, *weights)
            total_loss += loss
            grads[0] += g1
            grads[1] += g2
            grads[2] += g3
            grads[3] += go
        for gr in grads:
            gr /= n_samples
        for idx in range(4):
            m_state[idx] = beta1 * m_state[idx] + (1 - beta1) * grads[idx]
            v_state[idx] = beta2 * v_state[idx] + (1 - beta2) * grads[idx] ** 2
            m_hat = m_state[idx] / (1 - beta1**epoch)
            v_hat = v_state[idx] / (1 - beta2**epoch)
            weights[idx] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + eps)
        if epoch % 50 == 0 or epoch == cfg.epochs:
            logger.debug("epoch %d mean loss %.4f", epoch, total_loss / n_samples)

    params = GcnParams(*weights)
    correct = sum(
        1
        for adj, feats, label in samples
        if predict_label(
            np.asarray(_forward_kernel(adj, feats, *weights))
        )
        == label
    )
    logger.info(
        "training done: %d samples, final training accuracy %.3f",
        n_samples,
        correct / n_samples,
    )
    return params


def save_params(params: GcnParams, path: str) -> None:
    obj = {
        name: [[float(x) for x in row] for row in getattr(params, name)]
        for name in ("w1", "w2", "w3", "w_out")
    }
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    os.replace(tmp, path)


def load_params(path: str) -> GcnParams:
    with open(path, "r", encoding="utf-8") as fh:
        obj = json.load(fh)
    missing = {"w1", "w2", "w3", "w_out"} - set(obj)
    if missing:
        raise ValueError(f"{path}: missing weight matrices {sorted(missing)}")
    mats = {name: np.asarray(obj[name], dtype=np.float64) for name in obj}
    for name, mat in mats.items():
        if mat.ndim != 2:
            raise ValueError(f"{path}: {name} must be a matrix")
    return GcnParams(mats["w1"], mats["w2"], mats["w3"], mats["w_out"])
