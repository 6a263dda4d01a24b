"""Word-level skipgram embeddings with negative sampling, trained from
scratch, plus averaged sentence vectors for the downstream classifier."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import modelio
from .corpus import Sentence
from .errors import ConfigError, EmptyVocabularyError, NonFiniteLossError

MAGIC = b"TXEMB"
VERSION = 1


@dataclass
class Vocabulary:
    words: list[str]
    counts: np.ndarray  # int64 corpus frequency per index
    min_count: int
    index: dict[str, int] = field(init=False)

    def __post_init__(self):
        self.index = {w: i for i, w in enumerate(self.words)}

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def lookup(self, word: str) -> int | None:
        return self.index.get(word)


@dataclass
class EmbeddingModel:
    dim: int
    vocab: Vocabulary
    input_vectors: np.ndarray  # (|V|, dim)
    output_vectors: np.ndarray  # (|V|, dim)

    def vector(self, word: str) -> np.ndarray | None:
        idx = self.vocab.lookup(word.casefold())
        return None if idx is None else self.input_vectors[idx]


@dataclass(frozen=True)
class SentenceVector:
    values: np.ndarray
    contributing_count: int


@dataclass(frozen=True)
class SkipgramConfig:
    dim: int = 300
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    min_count: int = 1
    seed: int = 0
    workers: int = 1

    def validate(self) -> None:
        positive = {
            "dim": self.dim,
            "window": self.window,
            "negatives": self.negatives,
            "learning_rate": self.learning_rate,
            "min_count": self.min_count,
            "workers": self.workers,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ConfigError(f"{name} must be positive, got {value}")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be non-negative, got {self.epochs}")


def build_vocab(corpus: Iterable[Sentence], min_count: int = 1) -> Vocabulary:
    """Case-folded token counts; words under min_count are dropped."""
    if min_count < 1:
        raise ConfigError(f"min_count must be >= 1, got {min_count}")
    counts: dict[str, int] = {}
    for sentence in corpus:
        for word in sentence.folded_texts():
            counts[word] = counts.get(word, 0) + 1
    kept = sorted(
        ((w, c) for w, c in counts.items() if c >= min_count),
        key=lambda wc: (-wc[1], wc[0]),
    )
    if not kept:
        raise EmptyVocabularyError(f"no token reached min_count={min_count}")
    return Vocabulary(
        words=[w for w, _ in kept],
        counts=np.array([c for _, c in kept], dtype=np.int64),
        min_count=min_count,
    )


def generate_pairs(
    vocab: Vocabulary, sentence: Sentence, window: int
) -> list[tuple[int, int]]:
    """(center, context) vocabulary-index pairs for all in-vocabulary token
    positions at distance <= window. Distances count original positions, so
    out-of-vocabulary tokens still consume window slots."""
    if window < 1:
        raise ConfigError(f"window must be >= 1, got {window}")
    ids = [vocab.lookup(w) for w in sentence.folded_texts()]
    pairs: list[tuple[int, int]] = []
    for i, center in enumerate(ids):
        if center is None:
            continue
        for j in range(max(0, i - window), min(len(ids), i + window + 1)):
            if j == i or ids[j] is None:
                continue
            pairs.append((center, ids[j]))
    return pairs


def negative_distribution(vocab: Vocabulary) -> np.ndarray:
    """Unigram^(3/4) sampling weights over vocabulary indices."""
    weights = vocab.counts.astype(np.float64) ** 0.75
    return weights / weights.sum()


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _log_sigmoid(x: np.ndarray) -> np.ndarray:
    return -np.logaddexp(0.0, -x)


def pair_loss_and_grads(
    center_vec: np.ndarray, context_vec: np.ndarray, negative_vecs: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Negative-sampling loss for one pair and its exact gradients.

    The loss is -log s(u_ctx . v_cen) - sum_k log s(-u_neg_k . v_cen); the
    trainer descends it, which maximizes the skipgram objective. Returns
    (loss, d/d center, d/d context, d/d negatives)."""
    pos_score = float(center_vec @ context_vec)
    neg_scores = negative_vecs @ center_vec
    loss = -float(_log_sigmoid(np.array(pos_score))) - float(
        _log_sigmoid(-neg_scores).sum()
    )
    g_pos = float(_sigmoid(np.array(pos_score))) - 1.0
    g_neg = _sigmoid(neg_scores)
    grad_center = g_pos * context_vec + g_neg @ negative_vecs
    grad_context = g_pos * center_vec
    grad_negatives = g_neg[:, None] * center_vec[None, :]
    return loss, grad_center, grad_context, grad_negatives


def _run_pairs(
    input_vectors: np.ndarray,
    output_vectors: np.ndarray,
    pairs: np.ndarray,
    negatives: np.ndarray,
    lrs: np.ndarray,
) -> float:
    """Sequential SGD over the pair stream; returns the summed loss.

    One update per pair, exactly as the objective is stated; batching pairs
    would let frequent rows absorb many stale-gradient steps at once and
    diverge at learning rates that per-pair SGD tolerates."""
    total = 0.0
    # Divergent runs hit inf/nan transiently before the per-epoch finiteness
    # check raises; keep numpy quiet about it.
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(len(pairs)):
            center, context = pairs[t]
            negs = negatives[t]
            lr = lrs[t]
            v_cen = input_vectors[center]
            u_ctx = output_vectors[context]
            u_neg = output_vectors[negs]

            pos_score = v_cen @ u_ctx
            neg_scores = u_neg @ v_cen
            total += float(np.logaddexp(0.0, -pos_score)) + float(
                np.logaddexp(0.0, neg_scores).sum()
            )

            g_pos = _sigmoid(np.asarray(pos_score)) - 1.0
            g_neg = _sigmoid(neg_scores)

            grad_cen = g_pos * u_ctx + g_neg @ u_neg
            output_vectors[context] -= lr * g_pos * v_cen
            # negs can repeat a row within one draw; add.at accumulates.
            np.add.at(output_vectors, negs, (-lr) * g_neg[:, None] * v_cen[None, :])
            input_vectors[center] -= lr * grad_cen
    return total


def _collect_pairs(
    corpus: Sequence[Sentence], vocab: Vocabulary, window: int
) -> np.ndarray:
    chunks = []
    for sentence in corpus:
        pairs = generate_pairs(vocab, sentence, window)
        if pairs:
            chunks.append(np.asarray(pairs, dtype=np.int64))
    if not chunks:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(chunks, axis=0)


def train_skipgram(
    corpus: Sequence[Sentence],
    config: SkipgramConfig,
    callback: Callable[[int, dict], None] | None = None,
) -> EmbeddingModel:
    """Train skipgram-with-negative-sampling embeddings.

    Input vectors start uniform in [-0.5/dim, 0.5/dim), output vectors at
    zero; negatives come from the unigram^(3/4) distribution; the learning
    rate decays linearly to 1e-4 of its initial value over the total pair
    count. Single-worker runs are bit-reproducible under a fixed seed;
    workers > 1 updates shared matrices lock-free and is not deterministic."""
    config.validate()
    corpus = list(corpus)
    if not corpus:
        raise ConfigError("corpus is empty")
    vocab = build_vocab(corpus, config.min_count)
    rng = np.random.default_rng(config.seed)
    input_vectors = (rng.random((len(vocab), config.dim)) - 0.5) / config.dim
    output_vectors = np.zeros((len(vocab), config.dim))
    model = EmbeddingModel(
        dim=config.dim,
        vocab=vocab,
        input_vectors=input_vectors,
        output_vectors=output_vectors,
    )
    if config.epochs == 0:
        return model

    pairs = _collect_pairs(corpus, vocab, config.window)
    if len(pairs) == 0:
        return model
    neg_probs = negative_distribution(vocab)
    total_updates = len(pairs) * config.epochs

    if config.workers == 1:
        for epoch in range(config.epochs):
            negatives = rng.choice(
                len(vocab), size=(len(pairs), config.negatives), p=neg_probs
            )
            done = epoch * len(pairs)
            lrs = config.learning_rate * (
                1.0
                - (1.0 - 1e-4)
                * ((done + np.arange(len(pairs))) / total_updates)
            )
            epoch_loss = _run_pairs(
                input_vectors, output_vectors, pairs, negatives, lrs
            )
            if not np.isfinite(epoch_loss):
                raise NonFiniteLossError(f"skipgram loss diverged at epoch {epoch}")
            if callback is not None:
                callback(epoch, {"loss": epoch_loss / len(pairs)})
    else:
        _train_lockfree(pairs, input_vectors, output_vectors, neg_probs, config)

    return model


def _train_lockfree(
    pairs: np.ndarray,
    input_vectors: np.ndarray,
    output_vectors: np.ndarray,
    neg_probs: np.ndarray,
    config: SkipgramConfig,
) -> None:
    """Hogwild-style threads sharing the matrices without locks; update
    interleaving (hence the result) is nondeterministic."""
    shards = np.array_split(pairs, config.workers)
    total = len(pairs) * config.epochs

    def worker(shard: np.ndarray, seed: int) -> None:
        wrng = np.random.default_rng(seed)
        done = 0
        for _ in range(config.epochs):
            negatives = wrng.choice(
                len(neg_probs), size=(len(shard), config.negatives), p=neg_probs
            )
            lrs = config.learning_rate * (
                1.0
                - (1.0 - 1e-4)
                * ((done + np.arange(len(shard))) * config.workers / total)
            )
            _run_pairs(input_vectors, output_vectors, shard, negatives, lrs)
            done += len(shard)

    threads = [
        threading.Thread(target=worker, args=(shard, config.seed + k))
        for k, shard in enumerate(shards)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()


def embed_sentence(model: EmbeddingModel, sentence: Sentence) -> SentenceVector:
    """Element-wise mean of the input vectors of in-vocabulary tokens.

    Out-of-vocabulary tokens are skipped; an all-OOV sentence yields the
    zero vector with contributing_count == 0."""
    rows = [
        idx
        for idx in (model.vocab.lookup(w) for w in sentence.folded_texts())
        if idx is not None
    ]
    if not rows:
        return SentenceVector(np.zeros(model.dim), 0)
    values = model.input_vectors[rows].mean(axis=0)
    return SentenceVector(values, len(rows))


def save_embeddings(model: EmbeddingModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        modelio.write_header(fh, MAGIC, VERSION)
        modelio.write_u32(fh, model.dim)
        modelio.write_u32(fh, len(model.vocab))
        modelio.write_u32(fh, model.vocab.min_count)
        for word, count in zip(model.vocab.words, model.vocab.counts):
            modelio.write_str(fh, word)
            modelio.write_u64(fh, int(count))
        modelio.write_matrix(fh, model.input_vectors)
        modelio.write_matrix(fh, model.output_vectors)


def load_embeddings(path: str | Path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        modelio.read_header(fh, MAGIC, VERSION)
        dim = modelio.read_u32(fh)
        size = modelio.read_u32(fh)
        min_count = modelio.read_u32(fh)
        words = []
        counts = np.empty(size, dtype=np.int64)
        for i in range(size):
            words.append(modelio.read_str(fh))
            counts[i] = modelio.read_u64(fh)
        vocab = Vocabulary(words=words, counts=counts, min_count=min_count)
        input_vectors = modelio.read_matrix(fh, (size, dim))
        output_vectors = modelio.read_matrix(fh, (size, dim))
    return EmbeddingModel(
        dim=dim, vocab=vocab, input_vectors=input_vectors, output_vectors=output_vectors
    )


def load_text_vectors(source: str | Iterable[str]) -> EmbeddingModel:
    """Testing-only importer for "word v1 ... vdim" lines."""
    lines = source.splitlines() if isinstance(source, str) else source
    words: list[str] = []
    rows: list[list[float]] = []
    for raw in lines:
        parts = raw.split()
        if not parts:
            continue
        words.append(parts[0].casefold())
        rows.append([float(x) for x in parts[1:]])
    if not rows:
        raise EmptyVocabularyError("no vectors in text source")
    dims = {len(r) for r in rows}
    if len(dims) != 1:
        raise ConfigError(f"inconsistent vector dimensions: {sorted(dims)}")
    matrix = np.asarray(rows, dtype=np.float64)
    vocab = Vocabulary(
        words=words, counts=np.ones(len(words), dtype=np.int64), min_count=1
    )
    return EmbeddingModel(
        dim=matrix.shape[1],
        vocab=vocab,
        input_vectors=matrix,
        output_vectors=np.zeros_like(matrix),
    )
