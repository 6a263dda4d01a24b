"""Deterministic per-token feature templates for the CRF tagger: lexical
context, character n-grams, coarse orthographic tags, and word shapes."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .corpus import Sentence


class CoarsePosTag(Enum):
    CAP = "CAP"
    LOWER = "LOWER"
    MIXED = "MIXED"
    NUM = "NUM"
    PUNCT = "PUNCT"
    SYM = "SYM"


@dataclass(frozen=True)
class FeatureConfig:
    ngram_min: int = 2
    ngram_max: int = 4
    window: int = 4  # context words on each side, current token excluded


DEFAULT_FEATURES = FeatureConfig()


@dataclass(frozen=True)
class SparseFeatures:
    fired: frozenset[str]

    def ordered(self) -> list[str]:
        # Sorted view so downstream float accumulation has a fixed order
        # regardless of the process hash seed.
        return sorted(self.fired)


def word_shape(text: str) -> str:
    """Orthographic shape: X/x/d/s character classes with runs collapsed."""
    out: list[str] = []
    for ch in text:
        if ch.isupper():
            cls = "X"
        elif ch.islower():
            cls = "x"
        elif ch.isdigit():
            cls = "d"
        else:
            cls = "s"
        if not out or out[-1] != cls:
            out.append(cls)
    return "".join(out)


def char_ngrams(text: str, n_min: int = 2, n_max: int = 4) -> set[str]:
    """All contiguous n-grams of the boundary-marked, lowercased token."""
    marked = "<" + text.lower() + ">"
    grams: set[str] = set()
    for n in range(n_min, n_max + 1):
        for at in range(len(marked) - n + 1):
            grams.add(marked[at : at + n])
    return grams


def _tag_token(text: str) -> CoarsePosTag:
    if any(ch.isdigit() for ch in text) and all(
        ch.isdigit() or ch in ",." for ch in text
    ):
        return CoarsePosTag.NUM
    if all(unicodedata.category(ch).startswith("P") for ch in text):
        return CoarsePosTag.PUNCT
    if text[0].isupper() and (len(text) == 1 or text[1:].islower() and text[1:].isalpha()):
        return CoarsePosTag.CAP
    if text.islower() and text.isalpha():
        return CoarsePosTag.LOWER
    if text.isalnum():
        return CoarsePosTag.MIXED
    return CoarsePosTag.SYM


def pos_tag(sentence: Sentence) -> list[CoarsePosTag]:
    """Coarse orthographic tag per token. A stand-in for a real POS tagger
    with the same interface, so one can be swapped in."""
    return [_tag_token(t.text) for t in sentence.tokens]


def extract_features(
    sentence: Sentence,
    pos_tags: Sequence[CoarsePosTag],
    i: int,
    config: FeatureConfig = DEFAULT_FEATURES,
) -> SparseFeatures:
    """Fire the full template set for token position i.

    Output depends only on tokens within the context window of i plus the
    tags and shapes of the immediate neighbours."""
    words = sentence.folded_texts()
    n = len(words)
    if not 0 <= i < n:
        raise IndexError(f"position {i} out of range for {n} tokens")

    fired = {
        f"W0={words[i]}",
        f"W-1={words[i - 1] if i > 0 else '<BOS>'}",
        f"W+1={words[i + 1] if i + 1 < n else '<EOS>'}",
        f"P0={pos_tags[i].value}",
        f"SH0={word_shape(sentence.tokens[i].text)}",
    }
    fired.update(
        f"NG={g}"
        for g in char_ngrams(sentence.tokens[i].text, config.ngram_min, config.ngram_max)
    )

    tag_left = pos_tags[i - 1].value if i > 0 else "BOS"
    tag_right = pos_tags[i + 1].value if i + 1 < n else "EOS"
    fired.add(f"PSEQ={tag_left}_{pos_tags[i].value}_{tag_right}")

    shape_left = word_shape(sentence.tokens[i - 1].text) if i > 0 else "BOS"
    shape_right = word_shape(sentence.tokens[i + 1].text) if i + 1 < n else "EOS"
    fired.add(f"SHSEQ={shape_left}_{word_shape(sentence.tokens[i].text)}_{shape_right}")

    fired.update(f"LW={w}" for w in words[max(0, i - config.window) : i])
    fired.update(f"RW={w}" for w in words[i + 1 : i + 1 + config.window])
    return SparseFeatures(frozenset(fired))


def sentence_features(
    sentence: Sentence, config: FeatureConfig = DEFAULT_FEATURES
) -> list[SparseFeatures]:
    tags = pos_tag(sentence)
    return [extract_features(sentence, tags, i, config) for i in range(len(sentence.tokens))]


class FeatureIndex:
    """Dense ids for feature strings; frozen after building, so unseen
    features at inference map to nothing."""

    def __init__(self) -> None:
        self._ids: dict[str, int] = {}
        self.frozen = False

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, feature: str) -> bool:
        return feature in self._ids

    def add(self, feature: str) -> int:
        if self.frozen:
            raise ValueError("feature index is frozen")
        if feature not in self._ids:
            self._ids[feature] = len(self._ids)
        return self._ids[feature]

    def freeze(self) -> "FeatureIndex":
        self.frozen = True
        return self

    def lookup(self, feature: str) -> int | None:
        return self._ids.get(feature)

    def ids(self, features: SparseFeatures) -> list[int]:
        """Known ids for the fired features; unknown ones are dropped."""
        out = [self._ids[f] for f in features.ordered() if f in self._ids]
        return out

    def strings(self) -> list[str]:
        """Feature strings in id order."""
        out = [""] * len(self._ids)
        for feature, idx in self._ids.items():
            out[idx] = feature
        return out

    @classmethod
    def build(
        cls, feature_sets: Iterable[SparseFeatures], min_count: int = 2
    ) -> "FeatureIndex":
        """Index features seen at least min_count times, in first-seen order."""
        counts: dict[str, int] = {}
        seen_order: list[str] = []
        for features in feature_sets:
            for feature in features.ordered():
                if feature not in counts:
                    seen_order.append(feature)
                    counts[feature] = 0
                counts[feature] += 1
        index = cls()
        for feature in seen_order:
            if counts[feature] >= min_count:
                index.add(feature)
        return index.freeze()

    @classmethod
    def from_strings(cls, strings: Sequence[str]) -> "FeatureIndex":
        index = cls()
        for feature in strings:
            index.add(feature)
        return index.freeze()
