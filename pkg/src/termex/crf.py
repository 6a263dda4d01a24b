"""Linear-chain CRF over the {T, O} label pair: log-space clique potentials,
forward-backward, Viterbi decoding, and maximum-likelihood training."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import modelio
from .corpus import TokenLabel
from .errors import ConfigError, LengthMismatchError, ModelFormatError, NonFiniteLossError
from .features import FeatureConfig, FeatureIndex, SparseFeatures

MAGIC = b"TXCRF"
VERSION = 1

LABELS = (TokenLabel.T, TokenLabel.O)
_LABEL_INDEX = {TokenLabel.T: 0, TokenLabel.O: 1}
# Transition rows: previous state BOS / T / O.
BOS = 0

TrainingSequence = tuple[Sequence[SparseFeatures], Sequence[TokenLabel]]


@dataclass
class CrfModel:
    feature_index: FeatureIndex
    emission_weights: np.ndarray  # (F, 2): feature id x current label
    transition_weights: np.ndarray  # (3, 2): previous state x current label
    l2: float = 1.0
    feature_config: FeatureConfig = field(default_factory=FeatureConfig)


@dataclass
class PotentialTable:
    """Log clique potentials: ``start[s]`` for position 0 (from BOS) and
    ``steps[i-1][prev, cur]`` for positions 1..L-1."""

    start: np.ndarray  # (2,)
    steps: np.ndarray  # (L-1, 2, 2)

    def __len__(self) -> int:
        return 1 + len(self.steps)


def _feature_ids(model: CrfModel, features_per_position: Sequence[SparseFeatures]) -> list[np.ndarray]:
    return [
        np.asarray(model.feature_index.ids(f), dtype=np.int64)
        for f in features_per_position
    ]


def _node_scores(emission: np.ndarray, ids_per_position: Sequence[np.ndarray]) -> np.ndarray:
    scores = np.zeros((len(ids_per_position), 2))
    for i, ids in enumerate(ids_per_position):
        if len(ids):
            scores[i] = emission[ids].sum(axis=0)
    return scores


def _table_from_ids(
    emission: np.ndarray, transition: np.ndarray, ids_per_position: Sequence[np.ndarray]
) -> PotentialTable:
    node = _node_scores(emission, ids_per_position)
    start = transition[BOS] + node[0]
    steps = transition[1:][None, :, :] + node[1:, None, :]
    return PotentialTable(start=start, steps=steps)


def potentials(
    model: CrfModel, features_per_position: Sequence[SparseFeatures]
) -> PotentialTable:
    """log phi_i(prev, cur) = transition[prev, cur] + sum of emission weights
    of the features fired at i (unknown features are ignored)."""
    if not features_per_position:
        raise ValueError("cannot build potentials for an empty sentence")
    return _table_from_ids(
        model.emission_weights,
        model.transition_weights,
        _feature_ids(model, features_per_position),
    )


def _forward(table: PotentialTable) -> np.ndarray:
    """Log forward scores, shape (L, 2); row i sums over prefixes ending at i."""
    alphas = np.empty((len(table), 2))
    alphas[0] = table.start
    for j, step in enumerate(table.steps):
        alphas[j + 1] = np.logaddexp.reduce(alphas[j][:, None] + step, axis=0)
    return alphas


def _backward(table: PotentialTable) -> np.ndarray:
    betas = np.zeros((len(table), 2))
    for j in range(len(table.steps) - 1, -1, -1):
        betas[j] = np.logaddexp.reduce(table.steps[j] + betas[j + 1][None, :], axis=1)
    return betas


def log_partition(table: PotentialTable) -> float:
    """log of the sum over all label sequences of the potential product."""
    return float(np.logaddexp.reduce(_forward(table)[-1]))


def _path_score(table: PotentialTable, states: np.ndarray) -> float:
    score = table.start[states[0]]
    for j, step in enumerate(table.steps):
        score += step[states[j], states[j + 1]]
    return float(score)


def sequence_log_prob(table: PotentialTable, labels: Sequence[TokenLabel]) -> float:
    """Normalized log-probability of one label sequence; always <= 0."""
    if len(labels) != len(table):
        raise LengthMismatchError(
            f"{len(labels)} labels for a table of length {len(table)}"
        )
    states = np.array([_LABEL_INDEX[l] for l in labels])
    return _path_score(table, states) - log_partition(table)


def viterbi_from_table(table: PotentialTable) -> list[TokenLabel]:
    """Best label sequence; ties prefer O at the earliest differing position."""
    length = len(table)
    # suffix[i][s]: best completion score of positions i..L-1 given state s at i-1.
    suffix = np.zeros((length + 1, 2))
    for i in range(length - 1, 0, -1):
        suffix[i] = (table.steps[i - 1] + suffix[i + 1][None, :]).max(axis=1)

    states = np.empty(length, dtype=np.int64)
    scores = table.start + suffix[1]
    states[0] = 0 if scores[0] > scores[1] else 1  # index 1 is O
    for i in range(1, length):
        scores = table.steps[i - 1][states[i - 1]] + suffix[i + 1]
        states[i] = 0 if scores[0] > scores[1] else 1
    return [LABELS[s] for s in states]


def viterbi(
    model: CrfModel, features_per_position: Sequence[SparseFeatures]
) -> list[TokenLabel]:
    return viterbi_from_table(potentials(model, features_per_position))


def marginals(table: PotentialTable) -> tuple[np.ndarray, np.ndarray]:
    """Posterior node marginals (L, 2) and edge marginals (L-1, 2, 2)."""
    alphas = _forward(table)
    betas = _backward(table)
    log_z = np.logaddexp.reduce(alphas[-1])
    node = np.exp(alphas + betas - log_z)
    if len(table.steps):
        edge = np.exp(
            alphas[:-1, :, None] + table.steps + betas[1:, None, :] - log_z
        )
    else:
        edge = np.zeros((0, 2, 2))
    return node, edge


@dataclass(frozen=True)
class CrfConfig:
    epochs: int = 100
    learning_rate: float = 0.05
    l2: float = 1.0
    seed: int = 0
    feature_min_count: int = 2
    feature_config: FeatureConfig = field(default_factory=FeatureConfig)

    def validate(self) -> None:
        if self.epochs < 0:
            raise ConfigError(f"epochs must be non-negative, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.l2 < 0:
            raise ConfigError(f"l2 must be non-negative, got {self.l2}")
        if self.feature_min_count < 1:
            raise ConfigError(
                f"feature_min_count must be >= 1, got {self.feature_min_count}"
            )


PreparedSequence = tuple[list[np.ndarray], np.ndarray]


def prepare_dataset(
    dataset: Sequence[TrainingSequence], index: FeatureIndex
) -> list[PreparedSequence]:
    prepared = []
    for features_per_position, gold in dataset:
        if len(features_per_position) != len(gold):
            raise LengthMismatchError(
                f"{len(gold)} labels for {len(features_per_position)} positions"
            )
        ids = [
            np.asarray(index.ids(f), dtype=np.int64) for f in features_per_position
        ]
        states = np.array([_LABEL_INDEX[l] for l in gold], dtype=np.int64)
        prepared.append((ids, states))
    return prepared


def regularized_log_likelihood_and_gradient(
    prepared: Sequence[PreparedSequence],
    emission: np.ndarray,
    transition: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Objective sum_seq log p(gold) - (l2/2)||w||^2 and its exact gradient
    (observed feature counts minus expected counts minus l2*w)."""
    value = 0.0
    grad_emission = np.zeros_like(emission)
    grad_transition = np.zeros_like(transition)

    for ids_per_position, states in prepared:
        table = _table_from_ids(emission, transition, ids_per_position)
        alphas = _forward(table)
        betas = _backward(table)
        log_z = float(np.logaddexp.reduce(alphas[-1]))
        value += _path_score(table, states) - log_z

        node = np.exp(alphas + betas - log_z)
        for i, ids in enumerate(ids_per_position):
            if len(ids):
                grad_emission[ids, states[i]] += 1.0
                grad_emission[ids] -= node[i]

        grad_transition[BOS, states[0]] += 1.0
        grad_transition[BOS] -= node[0]
        if len(table.steps):
            edge = np.exp(
                alphas[:-1, :, None] + table.steps + betas[1:, None, :] - log_z
            )
            np.add.at(grad_transition, (1 + states[:-1], states[1:]), 1.0)
            grad_transition[1:] -= edge.sum(axis=0)

    value -= 0.5 * l2 * (float((emission**2).sum()) + float((transition**2).sum()))
    grad_emission -= l2 * emission
    grad_transition -= l2 * transition
    return value, grad_emission, grad_transition


def train_crf(
    dataset: Sequence[TrainingSequence],
    config: CrfConfig,
    index: FeatureIndex | None = None,
    callback: Callable[[int, dict], None] | None = None,
) -> CrfModel:
    """Batch gradient ascent on the regularized log-likelihood from a zero
    initialization. Deterministic: the update depends only on the data order
    and the fixed learning rate."""
    config.validate()
    if not dataset:
        raise ConfigError("training dataset is empty")
    if index is None:
        index = FeatureIndex.build(
            (f for features, _ in dataset for f in features),
            min_count=config.feature_min_count,
        )
    prepared = prepare_dataset(dataset, index)
    emission = np.zeros((len(index), 2))
    transition = np.zeros((3, 2))

    for epoch in range(config.epochs):
        value, grad_emission, grad_transition = (
            regularized_log_likelihood_and_gradient(
                prepared, emission, transition, config.l2
            )
        )
        if not np.isfinite(value):
            raise NonFiniteLossError(f"CRF objective diverged at epoch {epoch}")
        penalty = 0.5 * config.l2 * (
            float((emission**2).sum()) + float((transition**2).sum())
        )
        emission += config.learning_rate * grad_emission
        transition += config.learning_rate * grad_transition
        if callback is not None:
            callback(epoch, {"objective": value, "nll": -(value + penalty)})

    return CrfModel(
        feature_index=index,
        emission_weights=emission,
        transition_weights=transition,
        l2=config.l2,
        feature_config=config.feature_config,
    )


def save_crf(model: CrfModel, path: str | Path) -> None:
    strings = model.feature_index.strings()
    with open(path, "wb") as fh:
        modelio.write_header(fh, MAGIC, VERSION)
        modelio.write_u32(fh, len(strings))
        for feature in strings:
            modelio.write_str(fh, feature)
        for label in LABELS:
            modelio.write_str(fh, label.value)
        modelio.write_f64(fh, model.l2)
        modelio.write_u32(fh, model.feature_config.ngram_min)
        modelio.write_u32(fh, model.feature_config.ngram_max)
        modelio.write_u32(fh, model.feature_config.window)
        modelio.write_matrix(fh, model.emission_weights)
        modelio.write_matrix(fh, model.transition_weights)


def load_crf(path: str | Path) -> CrfModel:
    with open(path, "rb") as fh:
        modelio.read_header(fh, MAGIC, VERSION)
        count = modelio.read_u32(fh)
        strings = [modelio.read_str(fh) for _ in range(count)]
        labels = tuple(modelio.read_str(fh) for _ in LABELS)
        if labels != tuple(l.value for l in LABELS):
            raise ModelFormatError(f"unexpected label order {labels}")
        l2 = modelio.read_f64(fh)
        feature_config = FeatureConfig(
            ngram_min=modelio.read_u32(fh),
            ngram_max=modelio.read_u32(fh),
            window=modelio.read_u32(fh),
        )
        emission = modelio.read_matrix(fh, (count, 2))
        transition = modelio.read_matrix(fh, (3, 2))
    return CrfModel(
        feature_index=FeatureIndex.from_strings(strings),
        emission_weights=emission,
        transition_weights=transition,
        l2=l2,
        feature_config=feature_config,
    )
