"""ANSI and HTML renderings of extraction results: positive sentences in
green, extracted terms in yellow, missed gold terms (when gold labels are
supplied) in red. Stripping the markup recovers the original text exactly."""

from __future__ import annotations

import html
import re
from typing import Sequence

from .cascade import Extraction, spans_from_labels
from .corpus import Document, LabeledSentence, Sentence, split_document

_STYLE_NONE = 0
_STYLE_SENTENCE = 1
_STYLE_TERM = 2
_STYLE_MISSED = 3

_ANSI_CODES = {
    _STYLE_SENTENCE: "\x1b[32m",
    _STYLE_TERM: "\x1b[30;43m",
    _STYLE_MISSED: "\x1b[37;41m",
}
_ANSI_RESET = "\x1b[0m"
_ANSI_RE = re.compile(r"\x1b\[[0-9;]*m")

_HTML_STYLES = {
    _STYLE_SENTENCE: "color:#1b7f2a",
    _STYLE_TERM: "background:#ffe84d",
    _STYLE_MISSED: "background:#ff6b6b;color:#fff",
}
_TAG_RE = re.compile(r"<[^>]*>")


def strip_ansi(text: str) -> str:
    return _ANSI_RE.sub("", text)


def strip_html(text: str) -> str:
    return html.unescape(_TAG_RE.sub("", text))


def _token_range_bytes(sentence: Sentence, start_tok: int, end_tok: int) -> tuple[int, int]:
    return sentence.tokens[start_tok].start, sentence.tokens[end_tok].end


def _styled_ranges(
    sentences: Sequence[Sentence],
    extractions: Sequence[Extraction],
    gold: Sequence[LabeledSentence] | None,
) -> list[tuple[int, int, int]]:
    """(start_byte, end_byte, style) ranges; later entries take priority."""
    by_index = {e.sentence_index: e for e in extractions}
    gold_by_index = {}
    if gold is not None:
        gold_by_index = {g.sentence.index: g for g in gold}

    ranges: list[tuple[int, int, int]] = []
    for sentence in sentences:
        extraction = by_index.get(sentence.index)
        if extraction is None:
            continue
        predicted = {(s.start, s.end) for s in extraction.term_spans}
        if extraction.sentence_positive:
            a, b = _token_range_bytes(sentence, 0, len(sentence.tokens) - 1)
            ranges.append((a, b, _STYLE_SENTENCE))
            for span in extraction.term_spans:
                a, b = _token_range_bytes(sentence, span.start, span.end)
                ranges.append((a, b, _STYLE_TERM))
        labeled = gold_by_index.get(sentence.index)
        if labeled is not None:
            for span in spans_from_labels(labeled.sentence.tokens, labeled.token_labels):
                if (span.start, span.end) not in predicted:
                    a, b = _token_range_bytes(sentence, span.start, span.end)
                    ranges.append((a, b, _STYLE_MISSED))
    return ranges


def _segment_styles(length: int, ranges: list[tuple[int, int, int]]) -> list[tuple[int, int, int]]:
    """Collapse overlapping ranges into contiguous (start, end, style) runs."""
    styles = [0] * length
    for a, b, style in ranges:
        for k in range(a, b):
            styles[k] = max(styles[k], style)
    segments = []
    at = 0
    while at < length:
        end = at
        while end < length and styles[end] == styles[at]:
            end += 1
        segments.append((at, end, styles[at]))
        at = end
    return segments


def _render(
    doc: Document,
    extractions: Sequence[Extraction],
    fmt: str,
    gold: Sequence[LabeledSentence] | None,
) -> str:
    sentences = split_document(doc)
    raw = doc.text.encode("utf-8")
    ranges = _styled_ranges(sentences, extractions, gold)
    segments = _segment_styles(len(raw), ranges)

    pieces: list[str] = []
    for a, b, style in segments:
        text = raw[a:b].decode("utf-8")
        if fmt == "ansi":
            if style == _STYLE_NONE:
                pieces.append(text)
            else:
                pieces.append(f"{_ANSI_CODES[style]}{text}{_ANSI_RESET}")
        else:
            escaped = html.escape(text, quote=False)
            if style == _STYLE_NONE:
                pieces.append(escaped)
            else:
                pieces.append(f'<span style="{_HTML_STYLES[style]}">{escaped}</span>')
    body = "".join(pieces)
    if fmt == "html":
        return f"<pre>{body}</pre>"
    return body


def render_ansi(
    doc: Document,
    extractions: Sequence[Extraction],
    gold: Sequence[LabeledSentence] | None = None,
) -> str:
    return _render(doc, extractions, "ansi", gold)


def render_html(
    doc: Document,
    extractions: Sequence[Extraction],
    gold: Sequence[LabeledSentence] | None = None,
) -> str:
    return _render(doc, extractions, "html", gold)
