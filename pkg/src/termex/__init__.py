"""termex: two-stage technology-term extraction.

Stage I classifies whether a sentence mentions a technology (softmax over
averaged skipgram sentence vectors); stage II tags the term tokens with a
linear-chain CRF over hand-engineered features."""

__version__ = "0.1.0"

from .corpus import (  # noqa: F401
    DatasetSplit,
    Document,
    Gazetteer,
    LabeledSentence,
    Sentence,
    SentenceLabel,
    Token,
    TokenLabel,
    annotate,
    balance,
    load_gazetteer,
    split_dataset,
    split_sentences,
    tokenize,
)
from .cascade import (  # noqa: F401
    Extraction,
    PipelineModels,
    Span,
    extract_from_document,
    spans_from_labels,
)
from .evaluation import ConfusionCounts, EvalReport, f_score  # noqa: F401
