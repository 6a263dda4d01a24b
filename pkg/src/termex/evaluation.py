"""Precision/recall/F-score reports for the sentence stage, the token stage,
and the end-to-end cascade."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cascade import PipelineModels, spans_from_labels
from .classifier import predict
from .corpus import LabeledSentence, SentenceLabel, TokenLabel
from .crf import viterbi
from .embeddings import embed_sentence
from .features import sentence_features


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.tn, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class EvalReport:
    counts: ConfusionCounts
    precision: float
    recall: float
    f_score: float
    mode: str


def f_score(counts: ConfusionCounts, mode: str = "token") -> EvalReport:
    """Harmonic-mean F from the counts; 0/0 denominators yield 0."""
    tp, fp, fn = counts.tp, counts.fp, counts.fn
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return EvalReport(counts, precision, recall, f, mode)


def _count(gold_positive: bool, predicted_positive: bool) -> str:
    if gold_positive:
        return "tp" if predicted_positive else "fn"
    return "fp" if predicted_positive else "tn"


def _tally(outcomes: Sequence[str]) -> ConfusionCounts:
    return ConfusionCounts(
        tp=outcomes.count("tp"),
        fp=outcomes.count("fp"),
        tn=outcomes.count("tn"),
        fn=outcomes.count("fn"),
    )


def _predict_sentence_label(models: PipelineModels, labeled: LabeledSentence) -> SentenceLabel:
    vector = embed_sentence(models.embedding, labeled.sentence)
    return predict(models.classifier, vector).label


def evaluate_stage1(
    models: PipelineModels, test: Sequence[LabeledSentence]
) -> EvalReport:
    """Sentence-level report with ContainsTech as the positive class."""
    outcomes = [
        _count(
            labeled.sentence_label is SentenceLabel.CONTAINS_TECH,
            _predict_sentence_label(models, labeled) is SentenceLabel.CONTAINS_TECH,
        )
        for labeled in test
    ]
    return f_score(_tally(outcomes), mode="sentence")


def _decode(models: PipelineModels, labeled: LabeledSentence) -> list[TokenLabel]:
    features = sentence_features(labeled.sentence, models.crf.feature_config)
    return viterbi(models.crf, features)


def evaluate_stage2(
    models: PipelineModels, test: Sequence[LabeledSentence]
) -> EvalReport:
    """Token-level report over gold-positive sentences, decoding every one
    (no stage-I gating), mirroring how the tagger is trained."""
    for labeled in test:
        if labeled.sentence_label is not SentenceLabel.CONTAINS_TECH:
            raise ValueError("stage-II evaluation expects gold-positive sentences only")
    outcomes = []
    for labeled in test:
        predicted = _decode(models, labeled)
        for gold, pred in zip(labeled.token_labels, predicted):
            outcomes.append(_count(gold is TokenLabel.T, pred is TokenLabel.T))
    return f_score(_tally(outcomes), mode="token")


def evaluate_end_to_end(
    models: PipelineModels, test: Sequence[LabeledSentence]
) -> EvalReport:
    """Token-level report over all sentences with the cascade's gating: a
    stage-I negative pushes every one of its tokens to predicted O."""
    outcomes = []
    for labeled in test:
        if _predict_sentence_label(models, labeled) is SentenceLabel.CONTAINS_TECH:
            predicted = _decode(models, labeled)
        else:
            predicted = [TokenLabel.O] * len(labeled.token_labels)
        for gold, pred in zip(labeled.token_labels, predicted):
            outcomes.append(_count(gold is TokenLabel.T, pred is TokenLabel.T))
    return f_score(_tally(outcomes), mode="end_to_end")


def evaluate_spans(
    models: PipelineModels, test: Sequence[LabeledSentence]
) -> EvalReport:
    """Secondary exact-span view: a predicted span counts only if it matches
    a gold term span exactly. There are no true negatives at span level."""
    tp = fp = fn = 0
    for labeled in test:
        gold = {
            (s.start, s.end)
            for s in spans_from_labels(labeled.sentence.tokens, labeled.token_labels)
        }
        predicted = {
            (s.start, s.end)
            for s in spans_from_labels(labeled.sentence.tokens, _decode(models, labeled))
        }
        tp += len(gold & predicted)
        fp += len(predicted - gold)
        fn += len(gold - predicted)
    return f_score(ConfusionCounts(tp=tp, fp=fp, tn=0, fn=fn), mode="span")


def report_to_json(report: EvalReport) -> dict:
    return {
        "mode": report.mode,
        "tp": report.counts.tp,
        "fp": report.counts.fp,
        "tn": report.counts.tn,
        "fn": report.counts.fn,
        "precision": report.precision,
        "recall": report.recall,
        "f_score": report.f_score,
    }
