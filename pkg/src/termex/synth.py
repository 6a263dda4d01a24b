"""Synthetic news-style corpus generator with gold labels by construction.

Sentences come from small templates that embed gazetteer terms; every other
word is drawn from pools disjoint from the gazetteer, so re-annotating the
generated text reproduces the gold labels exactly."""

from __future__ import annotations

import random
from dataclasses import dataclass

from .corpus import (
    Document,
    Gazetteer,
    LabeledSentence,
    TokenLabel,
    split_document,
    tokenize,
)
from .errors import ConfigError

SUBJECTS = [
    "Researchers", "Developers", "Engineers", "Analysts", "Teams", "Students",
    "Vendors", "Startups", "Companies", "Reporters", "Scientists", "Consultants",
    "Operators", "Designers", "Architects", "Regulators", "Customers", "Partners",
    "Investors", "Managers",
]
VERBS = [
    "use", "adopt", "deploy", "evaluate", "test", "prefer", "recommend",
    "install", "benchmark", "review", "discuss", "examine", "audit", "monitor",
    "document", "debug", "extend", "maintain", "ship", "trial",
]
NOUNS = [
    "report", "meeting", "budget", "schedule", "garden", "weather", "hallway",
    "contract", "invoice", "manual", "roadmap", "survey", "workshop", "seminar",
    "memo", "policy", "handbook", "cafeteria", "elevator", "newsletter",
    "agenda", "ledger", "charter", "brochure",
]
ADVERBS = [
    "today", "daily", "widely", "recently", "quickly", "internally", "globally",
    "carefully", "regularly", "often", "rarely", "successfully", "reliably",
    "heavily", "routinely", "publicly", "quietly", "early", "repeatedly",
    "extensively",
]
# Fixed template glue; generation refuses gazetteers that collide with it.
STRUCTURAL = ["compared", "with", "for", "the", "and"]


@dataclass(frozen=True)
class SynthConfig:
    n_sentences: int
    seed: int = 0
    positive_rate: float = 0.5
    sentences_per_doc: int = 5

    def validate(self) -> None:
        if self.n_sentences < 1:
            raise ConfigError(f"n_sentences must be >= 1, got {self.n_sentences}")
        if not 0.0 < self.positive_rate < 1.0:
            raise ConfigError(
                f"positive_rate must be in (0, 1), got {self.positive_rate}"
            )
        if self.sentences_per_doc < 1:
            raise ConfigError(
                f"sentences_per_doc must be >= 1, got {self.sentences_per_doc}"
            )


def _detokenize(words: list[str]) -> str:
    """Join with spaces, attaching the terminal period to the last word."""
    out = " ".join(words[:-1]) if words[-1] == "." else " ".join(words)
    return out + "." if words[-1] == "." else out


def _filter_pool(pool: list[str], reserved: set[str], name: str) -> list[str]:
    kept = [w for w in pool if w.casefold() not in reserved]
    if not kept:
        raise ConfigError(f"gazetteer exhausts the {name} word pool")
    return kept


def generate_corpus(
    gazetteer: Gazetteer, config: SynthConfig
) -> tuple[list[Document], list[LabeledSentence]]:
    """Deterministic synthetic documents plus their gold-labeled sentences.

    Raises ConfigError for gazetteers the templates cannot host safely
    (e.g. entries colliding with template glue, or terms whose spelling
    does not survive tokenization and sentence splitting)."""
    config.validate()
    reserved = {tok for entry in gazetteer.entries for tok in entry}
    for word in STRUCTURAL:
        if word in reserved:
            raise ConfigError(f"gazetteer entry token {word!r} collides with templates")
    subjects = _filter_pool(SUBJECTS, reserved, "subject")
    verbs = _filter_pool(VERBS, reserved, "verb")
    nouns = _filter_pool(NOUNS, reserved, "noun")
    adverbs = _filter_pool(ADVERBS, reserved, "adverb")
    terms = [
        [t.text for t in tokenize(surface)]
        for surface in gazetteer.surface_forms.values()
    ]

    rng = random.Random(config.seed)
    planned: list[tuple[list[str], list[bool]]] = []
    for _ in range(config.n_sentences):
        if rng.random() < config.positive_rate:
            planned.append(_positive_sentence(rng, subjects, verbs, nouns, adverbs, terms))
        else:
            planned.append(_distractor_sentence(rng, subjects, verbs, nouns, adverbs))

    docs: list[Document] = []
    gold: list[LabeledSentence] = []
    for at in range(0, len(planned), config.sentences_per_doc):
        chunk = planned[at : at + config.sentences_per_doc]
        doc_id = f"synth-{at // config.sentences_per_doc:05d}"
        text = " ".join(_detokenize(words) for words, _ in chunk)
        doc = Document(id=doc_id, text=text)
        sentences = split_document(doc)
        if len(sentences) != len(chunk):
            raise ConfigError(
                f"gazetteer produced text that does not split back into "
                f"{len(chunk)} sentences (doc {doc_id})"
            )
        for sentence, (words, mask) in zip(sentences, chunk):
            if sentence.token_texts() != words:
                raise ConfigError(
                    f"gazetteer term does not survive tokenization in doc {doc_id}"
                )
            labels = [TokenLabel.T if flag else TokenLabel.O for flag in mask]
            gold.append(LabeledSentence.from_token_labels(sentence, labels))
        docs.append(doc)
    return docs, gold


def _emit(words: list[str], mask: list[bool], text: str, is_term: bool = False) -> None:
    words.append(text)
    mask.append(is_term)


def _emit_term(words: list[str], mask: list[bool], term: list[str]) -> None:
    for tok in term:
        _emit(words, mask, tok, is_term=True)


def _positive_sentence(rng, subjects, verbs, nouns, adverbs, terms):
    words: list[str] = []
    mask: list[bool] = []
    shape = rng.randrange(4)
    _emit(words, mask, rng.choice(subjects))
    if shape == 0:
        _emit(words, mask, rng.choice(verbs))
        _emit_term(words, mask, rng.choice(terms))
        _emit(words, mask, rng.choice(adverbs))
    elif shape == 1:
        _emit(words, mask, rng.choice(verbs))
        _emit_term(words, mask, rng.choice(terms))
    elif shape == 2:
        _emit(words, mask, "compared")
        _emit_term(words, mask, rng.choice(terms))
        _emit(words, mask, "with")
        _emit_term(words, mask, rng.choice(terms))
        _emit(words, mask, rng.choice(adverbs))
    else:
        _emit(words, mask, rng.choice(verbs))
        _emit_term(words, mask, rng.choice(terms))
        _emit(words, mask, "for")
        _emit(words, mask, "the")
        _emit(words, mask, rng.choice(nouns))
    _emit(words, mask, ".")
    return words, mask


def _distractor_sentence(rng, subjects, verbs, nouns, adverbs):
    words: list[str] = []
    mask: list[bool] = []
    shape = rng.randrange(3)
    _emit(words, mask, rng.choice(subjects))
    _emit(words, mask, rng.choice(verbs))
    _emit(words, mask, "the")
    _emit(words, mask, rng.choice(nouns))
    if shape == 1:
        _emit(words, mask, rng.choice(adverbs))
    elif shape == 2:
        _emit(words, mask, "and")
        _emit(words, mask, "the")
        _emit(words, mask, rng.choice(nouns))
    _emit(words, mask, ".")
    return words, mask
