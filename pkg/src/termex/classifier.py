"""Stage-I sentence classifier: softmax cross-entropy over averaged sentence
vectors, with an optional trained hidden projection."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import modelio
from .corpus import SentenceLabel
from .embeddings import SentenceVector
from .errors import (
    ConfigError,
    DimensionMismatchError,
    NonFiniteLossError,
)

MAGIC = b"TXCLS"
VERSION = 1

# Probability/logit index 0 is the positive class.
CLASS_ORDER = (SentenceLabel.CONTAINS_TECH, SentenceLabel.NO_TECH)
_CLASS_INDEX = {label: i for i, label in enumerate(CLASS_ORDER)}

Example = tuple[SentenceVector, SentenceLabel]


@dataclass
class ClassifierModel:
    projection: np.ndarray  # (h, d); identity unless use_hidden
    output_weights: np.ndarray  # (2, h)
    bias: np.ndarray  # (2,)
    use_hidden: bool = False

    @property
    def d(self) -> int:
        return self.projection.shape[1]

    @property
    def h(self) -> int:
        return self.projection.shape[0]


@dataclass(frozen=True)
class Prediction:
    label: SentenceLabel
    probabilities: np.ndarray  # (2,) in CLASS_ORDER


@dataclass(frozen=True)
class ClassifierConfig:
    epochs: int = 50
    learning_rate: float = 1.0
    l2: float = 0.0
    seed: int = 0
    use_hidden: bool = False
    batch_size: int = 32

    def validate(self) -> None:
        if self.epochs < 0:
            raise ConfigError(f"epochs must be non-negative, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.l2 < 0:
            raise ConfigError(f"l2 must be non-negative, got {self.l2}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be >= 1, got {self.batch_size}")


def new_model(d: int, use_hidden: bool = False, seed: int = 0) -> ClassifierModel:
    rng = np.random.default_rng(seed)
    return ClassifierModel(
        projection=np.eye(d),
        output_weights=rng.uniform(-0.01, 0.01, size=(2, d)),
        bias=np.zeros(2),
        use_hidden=use_hidden,
    )


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def _stack(batch: Sequence[Example], d: int) -> tuple[np.ndarray, np.ndarray]:
    xs = np.empty((len(batch), d))
    ys = np.empty(len(batch), dtype=np.int64)
    for i, (vec, label) in enumerate(batch):
        if vec.values.shape != (d,):
            raise DimensionMismatchError(
                f"sentence vector has dim {vec.values.shape}, model expects {d}"
            )
        xs[i] = vec.values
        ys[i] = _CLASS_INDEX[label]
    return xs, ys


def _forward(model: ClassifierModel, xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    hidden = xs @ model.projection.T
    logits = hidden @ model.output_weights.T + model.bias
    return hidden, logits


def loss(model: ClassifierModel, batch: Sequence[Example]) -> float:
    """Mean softmax cross-entropy of the batch; always >= 0."""
    if not batch:
        raise ValueError("loss of an empty batch is undefined")
    xs, ys = _stack(batch, model.d)
    _, logits = _forward(model, xs)
    logp = logits - _logsumexp_rows(logits)
    return float(-logp[np.arange(len(ys)), ys].mean())


def _logsumexp_rows(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    return m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))


def loss_and_gradients(
    model: ClassifierModel, xs: np.ndarray, ys: np.ndarray, l2: float = 0.0
) -> tuple[float, dict[str, np.ndarray]]:
    """Regularized loss and its exact gradients for the trained parameters.

    The L2 penalty (l2/2)*||W||^2 covers output_weights, and the projection
    when it is trained; the bias is never regularized."""
    n = len(ys)
    hidden, logits = _forward(model, xs)
    logp = logits - _logsumexp_rows(logits)
    value = -logp[np.arange(n), ys].mean()

    probs = np.exp(logp)
    dlogits = probs
    dlogits[np.arange(n), ys] -= 1.0
    dlogits /= n

    grads = {
        "output_weights": dlogits.T @ hidden + l2 * model.output_weights,
        "bias": dlogits.sum(axis=0),
    }
    value += 0.5 * l2 * float((model.output_weights**2).sum())
    if model.use_hidden:
        dhidden = dlogits @ model.output_weights
        grads["projection"] = dhidden.T @ xs + l2 * model.projection
        value += 0.5 * l2 * float((model.projection**2).sum())
    return float(value), grads


def predict(model: ClassifierModel, vector: SentenceVector) -> Prediction:
    """Softmax probabilities and the thresholded label; a tie goes to NoTech."""
    if vector.values.shape != (model.d,):
        raise DimensionMismatchError(
            f"sentence vector has dim {vector.values.shape}, model expects {model.d}"
        )
    _, logits = _forward(model, vector.values[None, :])
    probs = softmax(logits[0])
    label = (
        SentenceLabel.CONTAINS_TECH
        if probs[0] > probs[1]
        else SentenceLabel.NO_TECH
    )
    return Prediction(label=label, probabilities=probs)


def _f_score_against(model: ClassifierModel, xs: np.ndarray, ys: np.ndarray) -> float:
    _, logits = _forward(model, xs)
    predicted = np.where(logits[:, 0] > logits[:, 1], 0, 1)
    tp = int(((predicted == 0) & (ys == 0)).sum())
    fp = int(((predicted == 0) & (ys == 1)).sum())
    fn = int(((predicted == 1) & (ys == 0)).sum())
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def train_classifier(
    train: Sequence[Example],
    validation: Sequence[Example],
    config: ClassifierConfig,
    callback: Callable[[int, dict], None] | None = None,
) -> ClassifierModel:
    """Mini-batch SGD on the cross-entropy objective plus L2.

    Returns the checkpoint from the epoch with the best validation F-score
    (training F-score stands in when no validation set is given).
    Deterministic under the config seed."""
    config.validate()
    if not train:
        raise ConfigError("training set is empty")
    d = train[0][0].values.shape[0]
    xs, ys = _stack(train, d)
    if validation:
        val_xs, val_ys = _stack(validation, d)
    else:
        val_xs, val_ys = xs, ys

    rng = np.random.default_rng(config.seed)
    model = new_model(d, use_hidden=config.use_hidden, seed=config.seed)
    best = _checkpoint(model)
    best_f = -1.0

    for epoch in range(config.epochs):
        order = rng.permutation(len(ys))
        for at in range(0, len(ys), config.batch_size):
            rows = order[at : at + config.batch_size]
            _, grads = loss_and_gradients(model, xs[rows], ys[rows], config.l2)
            model.output_weights -= config.learning_rate * grads["output_weights"]
            model.bias -= config.learning_rate * grads["bias"]
            if config.use_hidden:
                model.projection -= config.learning_rate * grads["projection"]

        epoch_loss = loss(model, train)
        if not np.isfinite(epoch_loss):
            raise NonFiniteLossError(f"classifier loss diverged at epoch {epoch}")
        val_f = _f_score_against(model, val_xs, val_ys)
        if val_f > best_f:
            best_f = val_f
            best = _checkpoint(model)
        if callback is not None:
            callback(epoch, {"train_loss": epoch_loss, "validation_f": val_f})

    return best


def _checkpoint(model: ClassifierModel) -> ClassifierModel:
    return ClassifierModel(
        projection=model.projection.copy(),
        output_weights=model.output_weights.copy(),
        bias=model.bias.copy(),
        use_hidden=model.use_hidden,
    )


def save_classifier(model: ClassifierModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        modelio.write_header(fh, MAGIC, VERSION)
        modelio.write_u32(fh, model.d)
        modelio.write_u32(fh, model.h)
        modelio.write_u32(fh, int(model.use_hidden))
        modelio.write_matrix(fh, model.projection)
        modelio.write_matrix(fh, model.output_weights)
        modelio.write_matrix(fh, model.bias)


def load_classifier(path: str | Path) -> ClassifierModel:
    with open(path, "rb") as fh:
        modelio.read_header(fh, MAGIC, VERSION)
        d = modelio.read_u32(fh)
        h = modelio.read_u32(fh)
        use_hidden = bool(modelio.read_u32(fh))
        projection = modelio.read_matrix(fh, (h, d))
        output_weights = modelio.read_matrix(fh, (2, h))
        bias = modelio.read_matrix(fh, (2,))
    return ClassifierModel(
        projection=projection,
        output_weights=output_weights,
        bias=bias,
        use_hidden=use_hidden,
    )
