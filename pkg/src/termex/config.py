"""Flat INI-style run configuration with one section per pipeline stage.

Command-line flags override file values; the TERMEX_CONFIG environment
variable supplies a default config path."""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from pathlib import Path

from .classifier import ClassifierConfig
from .crf import CrfConfig
from .embeddings import SkipgramConfig
from .errors import ConfigError
from .features import FeatureConfig
from .synth import SynthConfig

ENV_CONFIG = "TERMEX_CONFIG"


@dataclass
class RunConfig:
    seed: int = 0
    corpus_path: str | None = None
    gazetteer_path: str | None = None
    workdir: str = "termex-run"
    ratios: tuple[float, float, float] = (0.7, 0.15, 0.15)
    synth_sentences: int = 2000
    synth_positive_rate: float = 0.5
    synth_sentences_per_doc: int = 5
    embeddings: SkipgramConfig = field(default_factory=SkipgramConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    crf: CrfConfig = field(default_factory=CrfConfig)

    def synth(self) -> SynthConfig:
        return SynthConfig(
            n_sentences=self.synth_sentences,
            seed=self.seed,
            positive_rate=self.synth_positive_rate,
            sentences_per_doc=self.synth_sentences_per_doc,
        )


def default_config_path() -> str | None:
    return os.environ.get(ENV_CONFIG)


def _section(parser: configparser.ConfigParser, name: str) -> dict[str, str]:
    return dict(parser[name]) if parser.has_section(name) else {}


def _get(values: dict[str, str], key: str, cast, fallback):
    if key not in values:
        return fallback
    try:
        if cast is bool:
            text = values[key].strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        return cast(values[key])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {values[key]!r}") from exc


def load_run_config(path: str | Path | None) -> RunConfig:
    """Build a RunConfig from an INI file; a missing path yields defaults."""
    cfg = RunConfig()
    if path is None:
        return cfg
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise ConfigError(f"config file not found: {path}")

    main = _section(parser, "main")
    cfg.seed = _get(main, "seed", int, cfg.seed)
    cfg.corpus_path = main.get("corpus", cfg.corpus_path)
    cfg.gazetteer_path = main.get("gazetteer", cfg.gazetteer_path)
    cfg.workdir = main.get("workdir", cfg.workdir)
    if "ratios" in main:
        parts = [p for p in main["ratios"].replace(",", " ").split() if p]
        if len(parts) != 3:
            raise ConfigError(f"ratios needs three numbers, got {main['ratios']!r}")
        cfg.ratios = tuple(float(p) for p in parts)  # type: ignore[assignment]

    synth = _section(parser, "synth")
    cfg.synth_sentences = _get(synth, "n_sentences", int, cfg.synth_sentences)
    cfg.synth_positive_rate = _get(
        synth, "positive_rate", float, cfg.synth_positive_rate
    )
    cfg.synth_sentences_per_doc = _get(
        synth, "sentences_per_doc", int, cfg.synth_sentences_per_doc
    )

    emb = _section(parser, "embeddings")
    base = cfg.embeddings
    cfg.embeddings = SkipgramConfig(
        dim=_get(emb, "dim", int, base.dim),
        window=_get(emb, "window", int, base.window),
        negatives=_get(emb, "negatives", int, base.negatives),
        epochs=_get(emb, "epochs", int, base.epochs),
        learning_rate=_get(emb, "learning_rate", float, base.learning_rate),
        min_count=_get(emb, "min_count", int, base.min_count),
        seed=cfg.seed,
        workers=_get(emb, "workers", int, base.workers),
    )

    cls = _section(parser, "classifier")
    cbase = cfg.classifier
    cfg.classifier = ClassifierConfig(
        epochs=_get(cls, "epochs", int, cbase.epochs),
        learning_rate=_get(cls, "learning_rate", float, cbase.learning_rate),
        l2=_get(cls, "l2", float, cbase.l2),
        seed=cfg.seed,
        use_hidden=_get(cls, "use_hidden", bool, cbase.use_hidden),
        batch_size=_get(cls, "batch_size", int, cbase.batch_size),
    )

    crf = _section(parser, "crf")
    kbase = cfg.crf
    cfg.crf = CrfConfig(
        epochs=_get(crf, "epochs", int, kbase.epochs),
        learning_rate=_get(crf, "learning_rate", float, kbase.learning_rate),
        l2=_get(crf, "l2", float, kbase.l2),
        seed=cfg.seed,
        feature_min_count=_get(crf, "feature_min_count", int, kbase.feature_min_count),
        feature_config=FeatureConfig(
            ngram_min=_get(crf, "ngram_min", int, kbase.feature_config.ngram_min),
            ngram_max=_get(crf, "ngram_max", int, kbase.feature_config.ngram_max),
            window=_get(crf, "window", int, kbase.feature_config.window),
        ),
    )
    return cfg
