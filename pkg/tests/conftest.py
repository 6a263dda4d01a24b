import pytest

from termex.classifier import ClassifierConfig
from termex.config import RunConfig
from termex.corpus import Gazetteer, load_gazetteer
from termex.crf import CrfConfig
from termex.embeddings import SkipgramConfig
from termex.pipeline import PipelineResult, run_pipeline

SINGLE_TERMS = [
    "tensorflow", "pytorch", "cortana", "kubernetes", "hadoop", "redis",
    "kafka", "spark", "airflow", "mlflow", "keras", "scikit", "numpy",
    "pandas", "jupyter", "docker", "terraform", "ansible", "grafana",
    "prometheus", "elasticsearch", "logstash", "kibana", "cassandra",
    "postgres", "sqlite", "mongodb", "rabbitmq", "zookeeper", "flink",
    "beam", "dask", "polars", "duckdb", "snowflake", "databricks",
    "tableau", "airbyte",
]
MULTI_TERMS = [
    "apache hive", "google cloud natural language api", "amazon web services",
    "azure machine learning", "apache spark streaming", "google cloud platform",
    "watson natural language understanding", "hugging face transformers",
    "stanford core nlp", "open neural network exchange", "vertex ai",
    "sage maker",
]
ALL_TERMS = SINGLE_TERMS + MULTI_TERMS


def gazetteer_text() -> str:
    lines = [t.capitalize() if " " not in t else t.title() for t in ALL_TERMS]
    return "\n".join(lines)


@pytest.fixture(scope="session")
def gazetteer() -> Gazetteer:
    return load_gazetteer(gazetteer_text())


@pytest.fixture(scope="session")
def gazetteer_file(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("gazetteer") / "gazetteer.txt"
    path.write_text(gazetteer_text(), encoding="utf-8")
    return str(path)


def fast_config(gazetteer_path: str, n_sentences: int = 400, seed: int = 0) -> RunConfig:
    """Small models that still separate cleanly; keeps fixtures fast."""
    cfg = RunConfig()
    cfg.seed = seed
    cfg.gazetteer_path = gazetteer_path
    cfg.synth_sentences = n_sentences
    cfg.embeddings = SkipgramConfig(
        dim=32, window=5, negatives=5, epochs=3, learning_rate=0.05, seed=seed
    )
    cfg.classifier = ClassifierConfig(epochs=30, learning_rate=1.0, seed=seed)
    cfg.crf = CrfConfig(epochs=40, learning_rate=0.05, seed=seed)
    return cfg


@pytest.fixture(scope="session")
def small_run(gazetteer_file, tmp_path_factory) -> PipelineResult:
    workdir = tmp_path_factory.mktemp("small-run")
    cfg = fast_config(gazetteer_file)
    return run_pipeline(cfg, workdir=workdir)
