"""Late fusion of frozen transformer embeddings with the linguistic network.

The fused classifier keeps the linguistic network's hidden layers as a
trainable branch, drops its output layer, and feeds the concatenation
[embedding, last hidden activations] into a single affine head with a
softmax. Embedding vectors enter as constants: they are loaded from disk,
standardized by fixed statistics, and never receive gradient updates.

The head's logits are computed as the linguistic block plus the embedding
block. With an all-zero embedding matrix and a zero embedding head block
(the `from_linguistic` starting point), every training step reproduces the
unimodal network's arithmetic exactly, so the two models stay interchangeable
when the embedding modality carries no signal.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .ann import (
    MODEL_FORMAT_VERSION,
    MlpModel,
    MlpTopology,
    TrainConfig,
    TrainHistory,
    _ce_from_logits,
    _check_training_sets,
    _softmax,
    _train_core,
)
from .errors import DimensionError, ResourceError, ValidationError
from .stages import KEY_STAGES


@dataclass(frozen=True)
class AttentionSpan:
    """Aggregated attention weight of one sub-word token, with the surface
    character span it maps back to."""

    token: str
    start: int
    end: int
    weight: float


@dataclass(frozen=True, eq=False)
class EmbeddingRecord:
    """One chunk's frozen transformer output as ingested from disk."""

    chunk_id: str
    vector: np.ndarray
    attention: tuple[AttentionSpan, ...] | None
    logits: tuple[float, ...] | None
    model: str
    dim: int


def _parse_attention(raw, line_no: int) -> tuple[AttentionSpan, ...]:
    if not isinstance(raw, list):
        raise ValidationError(f"line {line_no}: attention must be a list or null")
    spans = []
    for item in raw:
        if not isinstance(item, dict):
            raise ValidationError(f"line {line_no}: attention entries must be objects")
        try:
            token = item["token"]
            start = item["start"]
            end = item["end"]
            weight = item["weight"]
        except KeyError as exc:
            raise ValidationError(
                f"line {line_no}: attention entry missing field {exc}"
            ) from exc
        if not isinstance(token, str):
            raise ValidationError(f"line {line_no}: attention token must be a string")
        if not isinstance(start, int) or not isinstance(end, int):
            raise ValidationError(f"line {line_no}: attention offsets must be integers")
        if start < 0 or end < start:
            raise ValidationError(
                f"line {line_no}: attention span [{start}, {end}) is not a valid range"
            )
        weight = float(weight)
        if not math.isfinite(weight) or weight < 0.0:
            raise ValidationError(
                f"line {line_no}: attention weight {weight} must be finite and non-negative"
            )
        spans.append(AttentionSpan(token=token, start=start, end=end, weight=weight))
    return tuple(spans)


def _parse_record(doc: dict, line_no: int) -> EmbeddingRecord:
    for field in ("chunk_id", "vector", "model", "dim"):
        if field not in doc:
            raise ValidationError(f"line {line_no}: record is missing field {field!r}")
    chunk_id = doc["chunk_id"]
    if not isinstance(chunk_id, str) or not chunk_id:
        raise ValidationError(f"line {line_no}: chunk_id must be a non-empty string")
    if not isinstance(doc["dim"], int) or doc["dim"] < 1:
        raise ValidationError(f"line {line_no}: dim must be a positive integer")
    try:
        vector = np.asarray(doc["vector"], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"line {line_no}: vector must be a list of numbers") from exc
    if vector.ndim != 1 or vector.shape[0] != doc["dim"]:
        raise DimensionError(
            f"line {line_no}: vector length {vector.shape[0] if vector.ndim == 1 else vector.shape}"
            f" does not match declared dim {doc['dim']}"
        )
    if not np.isfinite(vector).all():
        raise ValidationError(f"line {line_no}: vector contains non-finite values")
    vector.setflags(write=False)

    attention = None
    if doc.get("attention") is not None:
        attention = _parse_attention(doc["attention"], line_no)

    logits = None
    if doc.get("logits") is not None:
        raw = doc["logits"]
        if not isinstance(raw, list) or len(raw) != len(KEY_STAGES):
            raise ValidationError(
                f"line {line_no}: logits must be a list of {len(KEY_STAGES)} numbers or null"
            )
        logits = tuple(float(v) for v in raw)
        if not all(math.isfinite(v) for v in logits):
            raise ValidationError(f"line {line_no}: logits contain non-finite values")

    model = doc["model"]
    if not isinstance(model, str):
        raise ValidationError(f"line {line_no}: model must be a string")
    return EmbeddingRecord(
        chunk_id=chunk_id,
        vector=vector,
        attention=attention,
        logits=logits,
        model=model,
        dim=doc["dim"],
    )


def load_embeddings(path: str | Path) -> dict[str, EmbeddingRecord]:
    """Read a JSON-Lines embedding file into a chunk_id -> record map.

    Every record must share one vector dimension; duplicate chunk_ids and
    malformed records are rejected with the offending line number.
    """
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"embedding file not found at {path}")
    records: dict[str, EmbeddingRecord] = {}
    shared_dim: int | None = None
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"line {line_no}: invalid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise ValidationError(f"line {line_no}: record must be a JSON object")
            record = _parse_record(doc, line_no)
            if shared_dim is None:
                shared_dim = record.dim
            elif record.dim != shared_dim:
                raise DimensionError(
                    f"line {line_no}: vector dim {record.dim} differs from"
                    f" the file's dim {shared_dim}"
                )
            if record.chunk_id in records:
                raise ValidationError(
                    f"line {line_no}: duplicate chunk_id {record.chunk_id!r}"
                )
            records[record.chunk_id] = record
    return records


def embedding_matrix(
    chunk_ids: Sequence[str], embeddings: Mapping[str, EmbeddingRecord]
) -> np.ndarray:
    """Stack embedding vectors in chunk order; every id must be present."""
    missing = [cid for cid in chunk_ids if cid not in embeddings]
    if missing:
        shown = ", ".join(missing[:5])
        extra = f" (and {len(missing) - 5} more)" if len(missing) > 5 else ""
        raise ValidationError(f"missing embeddings for chunk ids: {shown}{extra}")
    if not chunk_ids:
        raise ValidationError("chunk id list must be non-empty")
    return np.vstack([embeddings[cid].vector for cid in chunk_ids])


@dataclass
class FusedModel:
    """Trainable linguistic branch plus an affine head over
    [embedding, last hidden activations]."""

    branch_topology: MlpTopology
    embedding_dim: int
    branch_weights: list[np.ndarray]
    branch_biases: list[np.ndarray]
    head_weights: np.ndarray
    head_bias: np.ndarray
    feature_mean: np.ndarray
    feature_std: np.ndarray
    embedding_mean: np.ndarray
    embedding_std: np.ndarray
    label_order: tuple[str, ...] = KEY_STAGES
    feature_schema_version: str = "1"

    def __post_init__(self):
        if self.embedding_dim < 1:
            raise ValidationError("embedding_dim must be positive")
        hidden = self.branch_topology.hidden_layers
        if len(self.branch_weights) != len(hidden):
            raise DimensionError("branch layer count does not match topology")
        expected = (
            self.embedding_dim + hidden[-1],
            self.branch_topology.output_classes,
        )
        if self.head_weights.shape != expected:
            raise DimensionError(
                f"head shape {self.head_weights.shape} does not match"
                f" embedding_dim + last hidden width {expected}"
            )

    @property
    def last_hidden_width(self) -> int:
        return self.branch_topology.hidden_layers[-1]

    def copy(self) -> "FusedModel":
        return FusedModel(
            branch_topology=self.branch_topology,
            embedding_dim=self.embedding_dim,
            branch_weights=[w.copy() for w in self.branch_weights],
            branch_biases=[b.copy() for b in self.branch_biases],
            head_weights=self.head_weights.copy(),
            head_bias=self.head_bias.copy(),
            feature_mean=self.feature_mean.copy(),
            feature_std=self.feature_std.copy(),
            embedding_mean=self.embedding_mean.copy(),
            embedding_std=self.embedding_std.copy(),
            label_order=self.label_order,
            feature_schema_version=self.feature_schema_version,
        )


@dataclass(frozen=True)
class ChunkPrediction:
    """Class distribution for one chunk, with the fallback path flagged."""

    key_stage: str
    confidence: float
    probabilities: tuple[float, ...]
    linguistics_only: bool


def from_linguistic(model: MlpModel, embedding_dim: int) -> FusedModel:
    """Lift a unimodal network into a fused one.

    The head's linguistic block starts as the unimodal output layer and its
    embedding block starts at zero, so initial fused predictions equal the
    unimodal model's.
    """
    if embedding_dim < 1:
        raise ValidationError("embedding_dim must be positive")
    hidden_width = model.topology.hidden_layers[-1]
    head = np.zeros((embedding_dim + hidden_width, model.topology.output_classes))
    head[embedding_dim:] = model.weights[-1]
    return FusedModel(
        branch_topology=model.topology,
        embedding_dim=embedding_dim,
        branch_weights=[w.copy() for w in model.weights[:-1]],
        branch_biases=[b.copy() for b in model.biases[:-1]],
        head_weights=head,
        head_bias=model.biases[-1].copy(),
        feature_mean=model.feature_mean.copy(),
        feature_std=model.feature_std.copy(),
        embedding_mean=np.zeros(embedding_dim),
        embedding_std=np.ones(embedding_dim),
        label_order=model.label_order,
        feature_schema_version=model.feature_schema_version,
    )


def _standardize_features(fused: FusedModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != fused.branch_topology.input_dim:
        raise DimensionError(
            f"expected {fused.branch_topology.input_dim} features, got {X.shape[-1]}"
        )
    return (X - fused.feature_mean) / fused.feature_std


def _standardize_embeddings(fused: FusedModel, E: np.ndarray) -> np.ndarray:
    E = np.asarray(E, dtype=np.float64)
    if E.shape[-1] != fused.embedding_dim:
        raise DimensionError(
            f"expected embedding dim {fused.embedding_dim}, got {E.shape[-1]}"
        )
    return (E - fused.embedding_mean) / fused.embedding_std


def _branch_pass(fused: FusedModel, Xs: np.ndarray) -> list[np.ndarray]:
    activations = [Xs]
    a = Xs
    for W, b in zip(fused.branch_weights, fused.branch_biases):
        a = np.maximum(a @ W + b, 0.0)
        activations.append(a)
    return activations


def _fused_logits(fused: FusedModel, hidden: np.ndarray, Es: np.ndarray) -> np.ndarray:
    # Linguistic block first: with zero embeddings this reproduces the
    # unimodal output layer's arithmetic bit for bit.
    E = fused.embedding_dim
    ling = hidden @ fused.head_weights[E:] + fused.head_bias
    return ling + Es @ fused.head_weights[:E]


def forward_fused(fused: FusedModel, features: np.ndarray, embeddings: np.ndarray) -> np.ndarray:
    """Class probabilities; accepts single vectors or aligned batches."""
    X = np.asarray(features, dtype=np.float64)
    E = np.asarray(embeddings, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X.reshape(1, -1)
        E = E.reshape(1, -1)
    if X.shape[0] != E.shape[0]:
        raise DimensionError("feature and embedding batches differ in length")
    Xs = _standardize_features(fused, X)
    Es = _standardize_embeddings(fused, E)
    hidden = _branch_pass(fused, Xs)[-1]
    probs = _softmax(_fused_logits(fused, hidden, Es))
    return probs[0] if single else probs


def _fused_grads(fused: FusedModel, Xs: np.ndarray, Es: np.ndarray, y: np.ndarray):
    n = Xs.shape[0]
    activations = _branch_pass(fused, Xs)
    hidden = activations[-1]
    logits = _fused_logits(fused, hidden, Es)
    probs = _softmax(logits)
    loss = _ce_from_logits(logits, y)

    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    delta /= n

    E = fused.embedding_dim
    grad_head = np.empty_like(fused.head_weights)
    grad_head[:E] = Es.T @ delta
    grad_head[E:] = hidden.T @ delta
    grad_head_b = delta.sum(axis=0)

    n_branch = len(fused.branch_weights)
    grad_w = [np.empty(0)] * n_branch
    grad_b = [np.empty(0)] * n_branch
    delta = (delta @ fused.head_weights[E:].T) * (hidden > 0.0)
    for layer in range(n_branch - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ fused.branch_weights[layer].T) * (activations[layer] > 0.0)
    return loss, grad_w, grad_b, grad_head, grad_head_b


def fused_cross_entropy(fused: FusedModel, X: np.ndarray, E: np.ndarray, y: np.ndarray) -> float:
    Xs = _standardize_features(fused, np.asarray(X, dtype=np.float64))
    Es = _standardize_embeddings(fused, np.asarray(E, dtype=np.float64))
    hidden = _branch_pass(fused, Xs)[-1]
    return _ce_from_logits(_fused_logits(fused, hidden, Es), np.asarray(y))


def fused_loss_and_gradients(fused: FusedModel, X: np.ndarray, E: np.ndarray, y: np.ndarray):
    """Cross-entropy and analytic gradients for branch layers and head."""
    Xs = _standardize_features(fused, np.asarray(X, dtype=np.float64))
    Es = _standardize_embeddings(fused, np.asarray(E, dtype=np.float64))
    return _fused_grads(fused, Xs, Es, np.asarray(y))


class _FusedState:
    """Training view for the shared SGD loop; parts = (features, embeddings),
    both standardized."""

    def __init__(self, fused: FusedModel, train_branch: bool):
        self.fused = fused
        self.train_branch = train_branch
        self.vel_w = [np.zeros_like(w) for w in fused.branch_weights]
        self.vel_b = [np.zeros_like(b) for b in fused.branch_biases]
        self.vel_head = np.zeros_like(fused.head_weights)
        self.vel_head_b = np.zeros_like(fused.head_bias)

    def loss_and_grads(self, parts, y):
        Xs, Es = parts
        return _fused_grads(self.fused, Xs, Es, y)

    def apply(self, grads, lr: float, momentum: float):
        _, grad_w, grad_b, grad_head, grad_head_b = grads
        if self.train_branch:
            for i in range(len(self.fused.branch_weights)):
                self.vel_w[i] = momentum * self.vel_w[i] - lr * grad_w[i]
                self.vel_b[i] = momentum * self.vel_b[i] - lr * grad_b[i]
                self.fused.branch_weights[i] += self.vel_w[i]
                self.fused.branch_biases[i] += self.vel_b[i]
        self.vel_head = momentum * self.vel_head - lr * grad_head
        self.vel_head_b = momentum * self.vel_head_b - lr * grad_head_b
        self.fused.head_weights += self.vel_head
        self.fused.head_bias += self.vel_head_b

    def predict_labels(self, parts) -> np.ndarray:
        Xs, Es = parts
        hidden = _branch_pass(self.fused, Xs)[-1]
        return np.argmax(_fused_logits(self.fused, hidden, Es), axis=1)

    def snapshot(self):
        return (
            [w.copy() for w in self.fused.branch_weights],
            [b.copy() for b in self.fused.branch_biases],
            self.fused.head_weights.copy(),
            self.fused.head_bias.copy(),
        )

    def restore(self, snap):
        weights, biases, head, head_b = snap
        self.fused.branch_weights = [w.copy() for w in weights]
        self.fused.branch_biases = [b.copy() for b in biases]
        self.fused.head_weights = head.copy()
        self.fused.head_bias = head_b.copy()


def train_fused(
    fused: FusedModel,
    X_train: np.ndarray,
    E_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray,
    E_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainConfig,
    train_branch: bool = True,
) -> tuple[FusedModel, TrainHistory]:
    """Train head (and optionally branch) with the unimodal loop's contract.

    Embedding columns are standardized by statistics fitted here, then enter
    every step as constants; only head and branch parameters update. With
    train_branch=False the linguistic branch is frozen too.
    """
    X_train = np.asarray(X_train, dtype=np.float64)
    X_val = np.asarray(X_val, dtype=np.float64)
    E_train = np.asarray(E_train, dtype=np.float64)
    E_val = np.asarray(E_val, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    y_val = np.asarray(y_val, dtype=np.int64)
    n_classes = fused.branch_topology.output_classes
    _check_training_sets(X_train, y_train, X_val, y_val, n_classes)
    if len(E_train) != len(X_train) or len(E_val) != len(X_val):
        raise ValidationError("embeddings and features differ in length")

    trained = fused.copy()
    trained.feature_mean = X_train.mean(axis=0)
    std = X_train.std(axis=0)
    std[std == 0.0] = 1.0
    trained.feature_std = std
    emb_mean = E_train.mean(axis=0)
    emb_std = E_train.std(axis=0)
    emb_std[emb_std == 0.0] = 1.0
    trained.embedding_mean = emb_mean
    trained.embedding_std = emb_std

    Xs_train = _standardize_features(trained, X_train)
    Xs_val = _standardize_features(trained, X_val)
    Es_train = _standardize_embeddings(trained, E_train)
    Es_val = _standardize_embeddings(trained, E_val)
    state = _FusedState(trained, train_branch=train_branch)
    history = _train_core(
        state,
        (Xs_train, Es_train),
        y_train,
        (Xs_val, Es_val),
        y_val,
        config,
        n_classes=n_classes,
    )
    return trained, history


def predict_chunk(
    fused: FusedModel,
    features: np.ndarray,
    embedding: EmbeddingRecord | np.ndarray | None,
    linguistics_only: bool = False,
) -> ChunkPrediction:
    """Classify one chunk; a missing embedding either fails or, when the
    linguistics-only fallback is requested, routes through the branch alone
    and flags the result."""
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError("features must be a single vector")
    if embedding is None:
        if not linguistics_only:
            raise ValidationError(
                "chunk has no embedding; enable the linguistics-only fallback"
                " or supply one"
            )
        Xs = _standardize_features(fused, x.reshape(1, -1))
        hidden = _branch_pass(fused, Xs)[-1]
        E = fused.embedding_dim
        logits = hidden @ fused.head_weights[E:] + fused.head_bias
        probs = _softmax(logits)[0]
        fallback = True
    else:
        vector = embedding.vector if isinstance(embedding, EmbeddingRecord) else embedding
        probs = forward_fused(fused, x, np.asarray(vector, dtype=np.float64))
        fallback = False
    label = int(np.argmax(probs))
    return ChunkPrediction(
        key_stage=fused.label_order[label],
        confidence=float(probs[label]),
        probabilities=tuple(float(p) for p in probs),
        linguistics_only=fallback,
    )


def save_fused_model(fused: FusedModel, path: str | Path) -> None:
    """Serialize to versioned JSON (branch, head, standardization)."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": "fused",
        "label_order": list(fused.label_order),
        "feature_schema_version": fused.feature_schema_version,
        "topology": {
            "input_dim": fused.branch_topology.input_dim,
            "hidden_layers": list(fused.branch_topology.hidden_layers),
            "output_classes": fused.branch_topology.output_classes,
        },
        "embedding_dim": fused.embedding_dim,
        "branch_weights": [w.tolist() for w in fused.branch_weights],
        "branch_biases": [b.tolist() for b in fused.branch_biases],
        "head_weights": fused.head_weights.tolist(),
        "head_bias": fused.head_bias.tolist(),
        "feature_mean": fused.feature_mean.tolist(),
        "feature_std": fused.feature_std.tolist(),
        "embedding_mean": fused.embedding_mean.tolist(),
        "embedding_std": fused.embedding_std.tolist(),
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_fused_model(path: str | Path) -> FusedModel:
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
    if doc.get("kind") != "fused":
        raise ValidationError(
            f"expected a fused model file, got kind {doc.get('kind')!r}"
        )
    topo = MlpTopology(
        input_dim=int(doc["topology"]["input_dim"]),
        hidden_layers=tuple(int(w) for w in doc["topology"]["hidden_layers"]),
        output_classes=int(doc["topology"]["output_classes"]),
    )
    embedding_dim = int(doc["embedding_dim"])
    weights = [np.asarray(w, dtype=np.float64) for w in doc["branch_weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in doc["branch_biases"]]
    expected = topo.layer_dims()[:-1]
    if len(weights) != len(expected) or len(biases) != len(expected):
        raise DimensionError("branch layer count does not match topology")
    for (nin, nout), W, b in zip(expected, weights, biases):
        if W.shape != (nin, nout) or b.shape != (nout,):
            raise DimensionError(
                f"branch shape {W.shape}/{b.shape} does not match topology ({nin},{nout})"
            )
    fused = FusedModel(
        branch_topology=topo,
        embedding_dim=embedding_dim,
        branch_weights=weights,
        branch_biases=biases,
        head_weights=np.asarray(doc["head_weights"], dtype=np.float64),
        head_bias=np.asarray(doc["head_bias"], dtype=np.float64),
        feature_mean=np.asarray(doc["feature_mean"], dtype=np.float64),
        feature_std=np.asarray(doc["feature_std"], dtype=np.float64),
        embedding_mean=np.asarray(doc["embedding_mean"], dtype=np.float64),
        embedding_std=np.asarray(doc["embedding_std"], dtype=np.float64),
        label_order=tuple(doc["label_order"]),
        feature_schema_version=str(doc["feature_schema_version"]),
    )
    if fused.head_bias.shape != (topo.output_classes,):
        raise DimensionError("head bias shape does not match output classes")
    if (
        fused.feature_mean.shape != (topo.input_dim,)
        or fused.feature_std.shape != (topo.input_dim,)
        or fused.embedding_mean.shape != (embedding_dim,)
        or fused.embedding_std.shape != (embedding_dim,)
    ):
        raise DimensionError("standardization shape does not match dims")
    return fused
