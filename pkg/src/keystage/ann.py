"""From-scratch feedforward ReLU classifier on numpy.

Architecture: 1-5 hidden ReLU layers of 16-256 units, a 4-way affine
output head, softmax probabilities. Training is plain mini-batch SGD
(optional momentum) on cross-entropy, with z-score standardization fitted
on the training features (zero-variance columns get std 1), early stopping
on validation macro-F1 with a patience window, and a best-snapshot return.

Determinism: weight initialisation and epoch shuffling use numpy's
default generator (PCG64) with explicit seeds, so a (model seed, train
seed) pair reproduces the exact trajectory on any platform. Random-search
trials derive their seeds from SeedSequence([master_seed, trial_index]),
making results independent of execution order.

The generic `_train_core` loop is shared with the fusion module: it owns
all RNG consumption and the update cadence, so a fused model trained on
all-zero embeddings follows the exact arithmetic of the unimodal model.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import DimensionError, ResourceError, ValidationError
from .stages import KEY_STAGES

MODEL_FORMAT_VERSION = "1"


@dataclass(frozen=True)
class MlpTopology:
    """Hidden-layer widths plus input/output dimensions."""

    input_dim: int
    hidden_layers: tuple[int, ...]
    output_classes: int = 4

    def __post_init__(self):
        if self.input_dim < 1:
            raise ValidationError(f"input_dim must be positive, got {self.input_dim}")
        if not 1 <= len(self.hidden_layers) <= 5:
            raise ValidationError(
                f"hidden layer count must be 1..5, got {len(self.hidden_layers)}"
            )
        for width in self.hidden_layers:
            if not 16 <= width <= 256:
                raise ValidationError(f"hidden width must be 16..256, got {width}")
        if self.output_classes < 2:
            raise ValidationError("output_classes must be at least 2")

    def layer_dims(self) -> list[tuple[int, int]]:
        sizes = [self.input_dim, *self.hidden_layers, self.output_classes]
        return list(zip(sizes[:-1], sizes[1:]))


def parameter_count(topology: MlpTopology) -> int:
    """Total trainable parameters: sum of n_in*n_out + n_out per layer."""
    return sum(nin * nout + nout for nin, nout in topology.layer_dims())


@dataclass
class MlpModel:
    """Weights, biases, and standardization statistics for one topology."""

    topology: MlpTopology
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    feature_mean: np.ndarray
    feature_std: np.ndarray
    label_order: tuple[str, ...] = KEY_STAGES
    feature_schema_version: str = "1"

    def copy(self) -> "MlpModel":
        return MlpModel(
            topology=self.topology,
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            feature_mean=self.feature_mean.copy(),
            feature_std=self.feature_std.copy(),
            label_order=self.label_order,
            feature_schema_version=self.feature_schema_version,
        )


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    patience: int = 15
    max_epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    momentum: float = 0.0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValidationError("learning_rate must be positive")
        if self.patience < 1:
            raise ValidationError("patience must be at least 1")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be at least 1")
        if self.batch_size < 1:
            raise ValidationError("batch_size must be at least 1")
        if not 0.0 <= self.momentum < 1.0:
            raise ValidationError("momentum must be in [0, 1)")


@dataclass(frozen=True)
class TrainHistory:
    train_loss: tuple[float, ...]
    val_f1: tuple[float, ...]
    best_epoch: int
    stopped_epoch: int
    best_val_f1: float


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    inference_time_s: float
    parameter_count: int
    confusion: tuple[tuple[int, ...], ...]
    confusion_normalized: tuple[tuple[float, ...], ...]


def init_model(
    topology: MlpTopology,
    seed: int | np.random.SeedSequence = 0,
    label_order: tuple[str, ...] = KEY_STAGES,
) -> MlpModel:
    """Uniform init in +-sqrt(6 / (n_in + n_out)), zero biases."""
    if len(label_order) != topology.output_classes:
        raise ValidationError("label_order length must match output_classes")
    rng = np.random.default_rng(seed)
    weights = []
    biases = []
    for nin, nout in topology.layer_dims():
        limit = math.sqrt(6.0 / (nin + nout))
        weights.append(rng.uniform(-limit, limit, size=(nin, nout)))
        biases.append(np.zeros(nout))
    return MlpModel(
        topology=topology,
        weights=weights,
        biases=biases,
        feature_mean=np.zeros(topology.input_dim),
        feature_std=np.ones(topology.input_dim),
        label_order=tuple(label_order),
    )


def fit_standardization(model: MlpModel, X: np.ndarray) -> None:
    """Fit per-feature mean/std (population std; zero variance becomes 1)."""
    X = np.asarray(X, dtype=np.float64)
    model.feature_mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0.0] = 1.0
    model.feature_std = std


def standardize(model: MlpModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.topology.input_dim:
        raise DimensionError(
            f"expected {model.topology.input_dim} features, got {X.shape[-1]}"
        )
    return (X - model.feature_mean) / model.feature_std


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _hidden_pass(weights, biases, Xs: np.ndarray):
    """Activations after each hidden layer plus final logits."""
    activations = [Xs]
    a = Xs
    for W, b in zip(weights[:-1], biases[:-1]):
        a = np.maximum(a @ W + b, 0.0)
        activations.append(a)
    logits = a @ weights[-1] + biases[-1]
    return activations, logits


def forward(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Class probabilities; accepts a single vector or a batch matrix."""
    X = np.asarray(features, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X.reshape(1, -1)
    Xs = standardize(model, X)
    _, logits = _hidden_pass(model.weights, model.biases, Xs)
    probs = _softmax(logits)
    return probs[0] if single else probs


def predict(model: MlpModel, features: np.ndarray) -> np.ndarray:
    """Argmax labels; ties resolve to the lowest class index (lowest stage)."""
    probs = forward(model, features)
    if probs.ndim == 1:
        return np.argmax(probs)
    return np.argmax(probs, axis=1)


def cross_entropy_loss(model: MlpModel, X: np.ndarray, y: np.ndarray) -> float:
    """Mean cross-entropy via logsumexp; numerically safe for any logits."""
    Xs = standardize(model, np.asarray(X, dtype=np.float64))
    _, logits = _hidden_pass(model.weights, model.biases, Xs)
    return _ce_from_logits(logits, np.asarray(y))


def _ce_from_logits(logits: np.ndarray, y: np.ndarray) -> float:
    shifted = logits - logits.max(axis=1, keepdims=True)
    logsumexp = np.log(np.exp(shifted).sum(axis=1)) + logits.max(axis=1)
    return float(np.mean(logsumexp - logits[np.arange(len(y)), y]))


def loss_and_gradients(model: MlpModel, X: np.ndarray, y: np.ndarray):
    """Cross-entropy plus analytic gradients for every weight and bias.

    X is raw (unstandardized); y holds class indices. Gradients follow the
    same shapes as model.weights/model.biases.
    """
    Xs = standardize(model, np.asarray(X, dtype=np.float64))
    y = np.asarray(y)
    return _grads_on_standardized(model.weights, model.biases, Xs, y)


def _grads_on_standardized(weights, biases, Xs: np.ndarray, y: np.ndarray):
    n = Xs.shape[0]
    activations, logits = _hidden_pass(weights, biases, Xs)
    probs = _softmax(logits)
    loss = _ce_from_logits(logits, y)

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n

    grad_w = [np.empty(0)] * len(weights)
    grad_b = [np.empty(0)] * len(biases)
    for layer in range(len(weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ weights[layer].T) * (activations[layer] > 0.0)
    return loss, grad_w, grad_b


class _MlpState:
    """Mutable training view over an MlpModel; parts = (standardized X,)."""

    def __init__(self, model: MlpModel):
        self.model = model
        self.vel_w = [np.zeros_like(w) for w in model.weights]
        self.vel_b = [np.zeros_like(b) for b in model.biases]

    def loss_and_grads(self, parts, y):
        (Xs,) = parts
        return _grads_on_standardized(self.model.weights, self.model.biases, Xs, y)

    def apply(self, grads, lr: float, momentum: float):
        _, grad_w, grad_b = grads
        for i in range(len(self.model.weights)):
            self.vel_w[i] = momentum * self.vel_w[i] - lr * grad_w[i]
            self.vel_b[i] = momentum * self.vel_b[i] - lr * grad_b[i]
            self.model.weights[i] += self.vel_w[i]
            self.model.biases[i] += self.vel_b[i]

    def predict_labels(self, parts) -> np.ndarray:
        (Xs,) = parts
        _, logits = _hidden_pass(self.model.weights, self.model.biases, Xs)
        return np.argmax(logits, axis=1)

    def snapshot(self):
        return (
            [w.copy() for w in self.model.weights],
            [b.copy() for b in self.model.biases],
        )

    def restore(self, snap):
        weights, biases = snap
        self.model.weights = [w.copy() for w in weights]
        self.model.biases = [b.copy() for b in biases]


def _train_core(
    state, train_parts, y_train, val_parts, y_val, config: TrainConfig, n_classes: int = 4
) -> TrainHistory:
    """Shared SGD loop: owns shuffling, early stopping, and best snapshots."""
    n = len(y_train)
    rng = np.random.default_rng(config.seed)
    best_f1 = -math.inf
    best_epoch = 0
    best_snap = state.snapshot()
    losses: list[float] = []
    f1s: list[float] = []
    stopped = 0
    for epoch in range(1, config.max_epochs + 1):
        perm = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            batch_parts = tuple(p[idx] for p in train_parts)
            grads = state.loss_and_grads(batch_parts, y_train[idx])
            state.apply(grads, config.learning_rate, config.momentum)
            epoch_loss += grads[0] * len(idx)
        losses.append(epoch_loss / n)
        preds = state.predict_labels(val_parts)
        f1 = macro_f1(y_val, preds, n_classes=n_classes)
        f1s.append(f1)
        stopped = epoch
        if f1 > best_f1:
            best_f1 = f1
            best_epoch = epoch
            best_snap = state.snapshot()
        elif epoch - best_epoch >= config.patience:
            break
    state.restore(best_snap)
    return TrainHistory(
        train_loss=tuple(losses),
        val_f1=tuple(f1s),
        best_epoch=best_epoch,
        stopped_epoch=stopped,
        best_val_f1=best_f1,
    )


def _check_training_sets(X_train, y_train, X_val, y_val, n_classes: int):
    if len(X_train) == 0 or len(X_val) == 0:
        raise ValidationError("training and validation sets must be non-empty")
    if len(X_train) != len(y_train) or len(X_val) != len(y_val):
        raise ValidationError("features and labels differ in length")
    present = set(np.unique(y_val).tolist())
    if present != set(range(n_classes)):
        raise ValidationError(
            f"validation set must contain all {n_classes} classes, found {sorted(present)}"
        )


def train(
    model: MlpModel,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainConfig,
) -> tuple[MlpModel, TrainHistory]:
    """Early-stopped SGD training; returns the best-validation-F1 snapshot."""
    X_train = np.asarray(X_train, dtype=np.float64)
    X_val = np.asarray(X_val, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    y_val = np.asarray(y_val, dtype=np.int64)
    _check_training_sets(X_train, y_train, X_val, y_val, model.topology.output_classes)

    trained = model.copy()
    fit_standardization(trained, X_train)
    Xs_train = standardize(trained, X_train)
    Xs_val = standardize(trained, X_val)
    state = _MlpState(trained)
    history = _train_core(
        state, (Xs_train,), y_train, (Xs_val,), y_val, config,
        n_classes=model.topology.output_classes,
    )
    return trained, history


def confusion_matrix(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> np.ndarray:
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(np.asarray(y_true), np.asarray(y_pred)):
        cm[t, p] += 1
    return cm


def _macro_prf(cm: np.ndarray) -> tuple[float, float, float]:
    k = cm.shape[0]
    precisions = []
    recalls = []
    f1s = []
    for c in range(k):
        tp = cm[c, c]
        pred = cm[:, c].sum()
        support = cm[c, :].sum()
        p = tp / pred if pred else 0.0
        r = tp / support if support else 0.0
        f = 2 * p * r / (p + r) if (p + r) else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    return (
        float(np.mean(precisions)),
        float(np.mean(recalls)),
        float(np.mean(f1s)),
    )


def macro_f1(y_true: np.ndarray, y_pred: np.ndarray, n_classes: int = 4) -> float:
    return _macro_prf(confusion_matrix(y_true, y_pred, n_classes))[2]


def evaluate(model: MlpModel, X: np.ndarray, y: np.ndarray) -> EvalMetrics:
    """Macro-averaged metrics, confusion matrices, and mean inference time."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if len(X) == 0:
        raise ValidationError("evaluation set is empty")
    t0 = time.perf_counter()
    probs = forward(model, X)
    elapsed = time.perf_counter() - t0
    preds = np.argmax(probs, axis=1)
    k = model.topology.output_classes
    cm = confusion_matrix(y, preds, k)
    precision, recall, f1 = _macro_prf(cm)
    supports = cm.sum(axis=1, keepdims=True).astype(np.float64)
    safe = np.where(supports == 0, 1.0, supports)
    cm_norm = cm / safe
    return EvalMetrics(
        accuracy=float((preds == y).mean()),
        precision=precision,
        recall=recall,
        f1=f1,
        inference_time_s=elapsed / len(X),
        parameter_count=parameter_count(model.topology),
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
        confusion_normalized=tuple(tuple(float(v) for v in row) for row in cm_norm),
    )


@dataclass(frozen=True)
class SearchSpace:
    depth_range: tuple[int, int] = (1, 5)
    width_range: tuple[int, int] = (16, 256)


@dataclass(frozen=True)
class SearchTrial:
    trial: int
    topology: MlpTopology
    val_f1: float
    parameter_count: int
    inference_time_s: float
    best_epoch: int
    error: str | None = None


def sample_topology(space: SearchSpace, rng: np.random.Generator, input_dim: int) -> MlpTopology:
    depth = int(rng.integers(space.depth_range[0], space.depth_range[1] + 1))
    widths = tuple(
        int(w) for w in rng.integers(space.width_range[0], space.width_range[1] + 1, size=depth)
    )
    return MlpTopology(input_dim=input_dim, hidden_layers=widths)


def random_search(
    space: SearchSpace,
    n_trials: int,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainConfig,
    seed: int = 0,
) -> list[SearchTrial]:
    """Train n_trials uniformly sampled topologies and rank them.

    Ranking: validation macro-F1 descending, ties to fewer parameters, then
    lower inference time. Per-trial seeds derive from
    SeedSequence([seed, trial]), so any execution order gives one result.
    Trials that raise engine errors are kept in the output with their error
    message and rank last.
    """
    if n_trials < 1:
        raise ValidationError("n_trials must be at least 1")
    X_train = np.asarray(X_train, dtype=np.float64)
    input_dim = X_train.shape[1]
    trials: list[SearchTrial] = []
    for t in range(n_trials):
        ss = np.random.SeedSequence([seed, t])
        topo_seed, init_seed, shuffle_seed = ss.generate_state(3)
        topology = sample_topology(space, np.random.default_rng(topo_seed), input_dim)
        try:
            model = init_model(topology, seed=int(init_seed))
            trial_config = replace(config, seed=int(shuffle_seed))
            trained, history = train(model, X_train, y_train, X_val, y_val, trial_config)
            metrics = evaluate(trained, X_val, y_val)
            trials.append(
                SearchTrial(
                    trial=t,
                    topology=topology,
                    val_f1=history.best_val_f1,
                    parameter_count=parameter_count(topology),
                    inference_time_s=metrics.inference_time_s,
                    best_epoch=history.best_epoch,
                )
            )
        except ValidationError as exc:
            trials.append(
                SearchTrial(
                    trial=t,
                    topology=topology,
                    val_f1=-math.inf,
                    parameter_count=parameter_count(topology),
                    inference_time_s=math.inf,
                    best_epoch=0,
                    error=str(exc),
                )
            )
    trials.sort(key=lambda tr: (-tr.val_f1, tr.parameter_count, tr.inference_time_s))
    return trials


def retrain_topology(
    topology: MlpTopology,
    trial_index: int,
    X_train, y_train, X_val, y_val,
    config: TrainConfig,
    seed: int,
) -> tuple[MlpModel, TrainHistory]:
    """Reproduce a search trial's training run from its derived seeds."""
    ss = np.random.SeedSequence([seed, trial_index])
    _, init_seed, shuffle_seed = ss.generate_state(3)
    model = init_model(topology, seed=int(init_seed))
    return train(
        model, X_train, y_train, X_val, y_val, replace(config, seed=int(shuffle_seed))
    )


def save_model(model: MlpModel, path: str | Path) -> None:
    """Serialize to versioned JSON (topology, weights, standardization)."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "mlp",
        "label_order": list(model.label_order),
        "feature_schema_version": model.feature_schema_version,
        "topology": {
            "input_dim": model.topology.input_dim,
            "hidden_layers": list(model.topology.hidden_layers),
            "output_classes": model.topology.output_classes,
        },
        "weights": [w.tolist() for w in model.weights],
        "biases": [b.tolist() for b in model.biases],
        "feature_mean": model.feature_mean.tolist(),
        "feature_std": model.feature_std.tolist(),
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_model(path: str | Path) -> MlpModel:
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"model file not found at {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model file {path} is not valid JSON: {exc}") from exc
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValidationError(
            f"unsupported model format version {doc.get('format_version')!r}"
        )
    if doc.get("kind") != "mlp":
        raise ValidationError(f"expected an mlp model file, got kind {doc.get('kind')!r}")
    topo = MlpTopology(
        input_dim=int(doc["topology"]["input_dim"]),
        hidden_layers=tuple(int(w) for w in doc["topology"]["hidden_layers"]),
        output_classes=int(doc["topology"]["output_classes"]),
    )
    weights = [np.asarray(w, dtype=np.float64) for w in doc["weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
    expected = topo.layer_dims()
    if len(weights) != len(expected) or len(biases) != len(expected):
        raise DimensionError("layer count does not match topology")
    for (nin, nout), W, b in zip(expected, weights, biases):
        if W.shape != (nin, nout) or b.shape != (nout,):
            raise DimensionError(
                f"layer shape {W.shape}/{b.shape} does not match topology ({nin},{nout})"
            )
    model = MlpModel(
        topology=topo,
        weights=weights,
        biases=biases,
        feature_mean=np.asarray(doc["feature_mean"], dtype=np.float64),
        feature_std=np.asarray(doc["feature_std"], dtype=np.float64),
        label_order=tuple(doc["label_order"]),
        feature_schema_version=str(doc["feature_schema_version"]),
    )
    if model.feature_mean.shape != (topo.input_dim,) or model.feature_std.shape != (topo.input_dim,):
        raise DimensionError("standardization shape does not match input_dim")
    return model
