"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete."""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from termex.cascade import PipelineModels
from termex.classifier import (
    ClassifierConfig,
    ClassifierModel,
    load_classifier,
    loss,
    loss_and_gradients,
    new_model,
    predict,
    save_classifier,
    train_classifier,
)
from termex.corpus import (
    LabeledSentence,
    Sentence,
    SentenceLabel,
    Token,
    TokenLabel,
    annotate,
    balance,
    split_dataset,
    split_document,
)
from termex.crf import (
    CrfConfig,
    CrfModel,
    load_crf,
    log_partition,
    marginals,
    potentials,
    prepare_dataset,
    regularized_log_likelihood_and_gradient,
    save_crf,
    train_crf,
    viterbi,
)
from termex.embeddings import (
    SentenceVector,
    SkipgramConfig,
    embed_sentence,
    load_embeddings,
    pair_loss_and_grads,
    save_embeddings,
    train_skipgram,
)
from termex.evaluation import ConfusionCounts, f_score
from termex.features import FeatureIndex, SparseFeatures, sentence_features
from termex.pipeline import run_pipeline
from termex.synth import SynthConfig, generate_corpus
from tests.conftest import ALL_TERMS, MULTI_TERMS

T, O = TokenLabel.T, TokenLabel.O


def check(number, name, body):
    try:
        body()
    except BaseException:
        print(f"\nACCEPTANCE {number} ({name}): FAIL")
        raise
    print(f"\nACCEPTANCE {number} ({name}): PASS")


def make_sentence(words, index=0):
    tokens = []
    at = 0
    for w in words:
        tokens.append(Token(w, at, at + len(w)))
        at += len(w) + 1
    return Sentence(doc_id="d", index=index, tokens=tuple(tokens))


@pytest.fixture(scope="module")
def full_run(gazetteer_file, tmp_path_factory):
    """Criterion-1 pipeline: 50-term gazetteer, 2,000 sentences, defaults."""
    from termex.config import RunConfig

    cfg = RunConfig()
    cfg.seed = 0
    cfg.gazetteer_path = gazetteer_file
    cfg.synth_sentences = 2000
    workdir = tmp_path_factory.mktemp("acceptance-run")
    started = time.monotonic()
    result = run_pipeline(cfg, workdir=workdir)
    elapsed = time.monotonic() - started
    return result, elapsed


def test_criterion_1_synthetic_end_to_end(full_run):
    result, elapsed = full_run

    def body():
        assert len(ALL_TERMS) == 50
        assert len(MULTI_TERMS) >= 10
        sentence_f = result.reports["sentence"].f_score
        token_f = result.reports["token"].f_score
        print(
            f"  stage-I sentence F = {sentence_f:.4f}, "
            f"stage-II token F = {token_f:.4f}, runtime = {elapsed:.1f}s"
        )
        assert sentence_f >= 0.90
        assert token_f >= 0.90
        assert elapsed <= 300.0

    check(1, "synthetic end-to-end", body)


def _random_crf_instance(rng, max_features=10, max_len=10):
    n_features = int(rng.integers(1, max_features + 1))
    index = FeatureIndex()
    for i in range(n_features):
        index.add(f"f={i}")
    index.freeze()
    model = CrfModel(
        feature_index=index,
        emission_weights=rng.normal(size=(n_features, 2)),
        transition_weights=rng.normal(size=(3, 2)),
    )
    length = int(rng.integers(1, max_len + 1))
    features = []
    for _ in range(length):
        k = int(rng.integers(0, min(4, n_features) + 1))
        chosen = rng.choice(n_features, size=k, replace=False)
        features.append(SparseFeatures(frozenset(f"f={i}" for i in chosen)))
    return model, features


def _enumerate_scores(table):
    length = 1 + len(table.steps)
    scores = {}
    for states in itertools.product((0, 1), repeat=length):
        score = table.start[states[0]]
        for j in range(length - 1):
            score += table.steps[j][states[j], states[j + 1]]
        scores[states] = float(score)
    return scores


def test_criterion_2_crf_decoding_oracle():
    def body():
        rng = np.random.default_rng(20)
        for _ in range(100):
            model, features = _random_crf_instance(rng)
            table = potentials(model, features)
            scores = _enumerate_scores(table)
            values = np.array(list(scores.values()))
            log_z = float(np.logaddexp.reduce(values))
            assert abs(log_partition(table) - log_z) < 1e-8

            order = sorted(scores, key=lambda st: tuple(-s for s in st))
            best = order[0]
            for states in order[1:]:
                if scores[states] > scores[best]:
                    best = states
            decoded = tuple(0 if l is T else 1 for l in viterbi(model, features))
            assert decoded == best

            length = len(table)
            probs = np.exp(values - log_z)
            node_ref = np.zeros((length, 2))
            edge_ref = np.zeros((length - 1, 2, 2))
            for (states, _), p in zip(scores.items(), probs):
                for i, s in enumerate(states):
                    node_ref[i, s] += p
                for j in range(length - 1):
                    edge_ref[j, states[j], states[j + 1]] += p
            node, edge = marginals(table)
            assert np.max(np.abs(node - node_ref)) < 1e-8
            if length > 1:
                assert np.max(np.abs(edge - edge_ref)) < 1e-8

    check(2, "CRF decoding oracle", body)


def _fd_grad(value_fn, arr, eps):
    grad = np.zeros_like(arr)
    it = np.nditer(arr, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = arr[idx]
        arr[idx] = old + eps
        up = value_fn()
        arr[idx] = old - eps
        down = value_fn()
        arr[idx] = old
        grad[idx] = (up - down) / (2 * eps)
    return grad


def test_criterion_3_crf_gradient():
    def body():
        rng = np.random.default_rng(30)
        for _ in range(5):
            index = FeatureIndex()
            for i in range(5):
                index.add(f"f={i}")
            index.freeze()
            dataset = []
            for _ in range(3):
                length = int(rng.integers(1, 6))
                feats, labels = [], []
                for _ in range(length):
                    k = int(rng.integers(0, 4))
                    chosen = rng.choice(5, size=k, replace=False)
                    feats.append(SparseFeatures(frozenset(f"f={i}" for i in chosen)))
                    labels.append(T if rng.random() < 0.5 else O)
                dataset.append((feats, labels))
            prepared = prepare_dataset(dataset, index)
            emission = rng.normal(size=(5, 2)) * 0.5
            transition = rng.normal(size=(3, 2)) * 0.5
            l2 = float(rng.uniform(0.0, 1.5))
            _, grad_e, grad_t = regularized_log_likelihood_and_gradient(
                prepared, emission, transition, l2
            )
            value_fn = lambda: regularized_log_likelihood_and_gradient(
                prepared, emission, transition, l2
            )[0]
            for arr, grad in ((emission, grad_e), (transition, grad_t)):
                numeric = _fd_grad(value_fn, arr, eps=1e-5)
                rel = np.abs(grad - numeric) / (np.abs(numeric) + 1e-10)
                assert np.max(rel) < 1e-4

    check(3, "CRF gradient vs finite differences", body)


def test_criterion_4_classifier():
    def body():
        # gradient check
        rng = np.random.default_rng(40)
        model = new_model(4, use_hidden=True, seed=1)
        model.output_weights = rng.normal(size=(2, 4)) * 0.4
        model.projection = rng.normal(size=(4, 4)) * 0.4
        model.bias = rng.normal(size=2) * 0.2
        xs = rng.normal(size=(6, 4))
        ys = rng.integers(0, 2, size=6)
        _, grads = loss_and_gradients(model, xs, ys, l2=0.0)
        value_fn = lambda: loss_and_gradients(model, xs, ys, l2=0.0)[0]
        for name, arr in (
            ("output_weights", model.output_weights),
            ("bias", model.bias),
            ("projection", model.projection),
        ):
            numeric = _fd_grad(value_fn, arr, eps=1e-5)
            rel = np.abs(grads[name] - numeric) / (np.abs(numeric) + 1e-10)
            assert np.max(rel) < 1e-4

        # separable toy set reaches 100% train accuracy within 50 epochs
        toy_rng = np.random.default_rng(41)
        dim = 10
        pos = toy_rng.normal(1.0, 0.1, size=(100, dim))
        neg = toy_rng.normal(-1.0, 0.1, size=(100, dim))
        train = [
            (SentenceVector(x, dim), SentenceLabel.CONTAINS_TECH) for x in pos
        ] + [(SentenceVector(x, dim), SentenceLabel.NO_TECH) for x in neg]
        trained = train_classifier(
            train, [], ClassifierConfig(epochs=50, learning_rate=0.5, seed=0)
        )
        assert all(predict(trained, v).label is y for v, y in train)

        # zero model: loss ln 2 within 1e-9, probabilities exactly (0.5, 0.5)
        zero = ClassifierModel(
            projection=np.eye(dim),
            output_weights=np.zeros((2, dim)),
            bias=np.zeros(2),
        )
        assert abs(loss(zero, train) - math.log(2)) < 1e-9
        p = predict(zero, train[0][0])
        assert np.allclose(p.probabilities, [0.5, 0.5], atol=1e-12)
        assert p.label is SentenceLabel.NO_TECH

    check(4, "classifier objective and training", body)


def _shared_context_corpus(n=500):
    rng = np.random.default_rng(50)
    left = ["teams", "users", "labs", "crews"]
    right = ["daily", "often", "early", "late"]
    other_left = ["rain", "snow", "wind", "fog"]
    other_right = ["falls", "stops", "lifts", "builds"]
    sentences = []
    for i in range(n):
        kind = i % 5
        if kind < 2:
            words = [str(rng.choice(left)), "alpha", str(rng.choice(right))]
        elif kind < 4:
            words = [str(rng.choice(left)), "beta", str(rng.choice(right))]
        else:
            words = [
                str(rng.choice(other_left)), "unrelated", str(rng.choice(other_right)),
            ]
        sentences.append(make_sentence(words, index=i))
    return sentences


def test_criterion_5_embeddings():
    def body():
        # negative-sampling gradient vs finite differences, relative 1e-5
        rng = np.random.default_rng(51)
        center = rng.normal(size=4)
        context = rng.normal(size=4)
        negatives = rng.normal(size=(3, 4))
        _, g_cen, g_ctx, g_neg = pair_loss_and_grads(center, context, negatives)
        for arr, grad in ((center, g_cen), (context, g_ctx), (negatives, g_neg)):
            numeric = _fd_grad(
                lambda: pair_loss_and_grads(center, context, negatives)[0],
                arr,
                eps=1e-6,
            )
            rel = np.abs(grad - numeric) / (np.abs(numeric) + 1e-12)
            assert np.max(rel) < 1e-5

        # cosine ordering across 100 seeded runs
        corpus = _shared_context_corpus()
        wins = 0
        for seed in range(100):
            model = train_skipgram(
                corpus,
                SkipgramConfig(
                    dim=16, window=2, negatives=5, epochs=2,
                    learning_rate=0.05, seed=seed,
                ),
            )
            alpha = model.vector("alpha")
            beta = model.vector("beta")
            unrelated = model.vector("unrelated")
            cos_ab = float(
                alpha @ beta / (np.linalg.norm(alpha) * np.linalg.norm(beta))
            )
            cos_au = float(
                alpha @ unrelated
                / (np.linalg.norm(alpha) * np.linalg.norm(unrelated))
            )
            wins += cos_ab > cos_au
        print(f"  cosine ordering held in {wins}/100 runs")
        assert wins >= 95

    check(5, "skipgram embeddings", body)


def test_criterion_6_annotation_balancing(gazetteer):
    def body():
        # annotator reproduces generated gold labels exactly
        docs, gold = generate_corpus(gazetteer, SynthConfig(n_sentences=600, seed=6))
        sentences = [s for doc in docs for s in split_document(doc)]
        assert len(sentences) == len(gold)
        for sentence, labeled in zip(sentences, gold):
            assert annotate(sentence, gazetteer) == labeled

        # balance yields exactly equal class counts
        balanced = balance(gold, seed=1)
        pos = sum(
            1 for s in balanced if s.sentence_label is SentenceLabel.CONTAINS_TECH
        )
        assert pos * 2 == len(balanced)

        # production-scale sanity: 10,000 positive + 233,336 negative -> 20,000
        pos_proto = LabeledSentence.from_token_labels(
            make_sentence(["uses", "hive"]), [O, T]
        )
        neg_proto = LabeledSentence.from_token_labels(
            make_sentence(["uses", "nothing"]), [O, O]
        )
        big = [pos_proto] * 10_000 + [neg_proto] * 233_336
        kept = balance(big, seed=2)
        assert len(kept) == 20_000
        kept_pos = sum(
            1 for s in kept if s.sentence_label is SentenceLabel.CONTAINS_TECH
        )
        assert kept_pos == 10_000

    check(6, "annotation and balancing", body)


def test_criterion_7_f_score_arithmetic():
    def body():
        rng = np.random.default_rng(70)
        for _ in range(1000):
            tp, fp, tn, fn = (int(x) for x in rng.integers(0, 1000, size=4))
            report = f_score(ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn))
            precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
            recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
            f = (
                2 * precision * recall / (precision + recall)
                if precision + recall
                else Fraction(0)
            )
            assert report.precision == float(precision)
            assert report.recall == float(recall)
            assert abs(report.f_score - float(f)) < 1e-12

    check(7, "F-score arithmetic vs rational oracle", body)


def test_criterion_8_determinism(gazetteer, gazetteer_file, tmp_path):
    def body():
        # synthesis
        cfg = SynthConfig(n_sentences=150, seed=8)
        assert generate_corpus(gazetteer, cfg) == generate_corpus(gazetteer, cfg)

        docs, gold = generate_corpus(gazetteer, cfg)

        # balancing and splitting
        assert balance(gold, seed=4) == balance(gold, seed=4)
        a = split_dataset(gold, (0.7, 0.15, 0.15), seed=4)
        b = split_dataset(gold, (0.7, 0.15, 0.15), seed=4)
        assert (a.train, a.validation, a.test) == (b.train, b.validation, b.test)

        # skipgram, single-threaded: bit-identical matrices
        sentences = [s.sentence for s in gold]
        emb_cfg = SkipgramConfig(dim=12, window=3, negatives=3, epochs=2, seed=3)
        e1 = train_skipgram(sentences, emb_cfg)
        e2 = train_skipgram(sentences, emb_cfg)
        assert np.array_equal(e1.input_vectors, e2.input_vectors)
        assert np.array_equal(e1.output_vectors, e2.output_vectors)

        # classifier: bit-identical weights
        examples = [
            (embed_sentence(e1, s.sentence), s.sentence_label) for s in gold
        ]
        cls_cfg = ClassifierConfig(epochs=8, learning_rate=0.5, seed=5)
        c1 = train_classifier(examples, [], cls_cfg)
        c2 = train_classifier(examples, [], cls_cfg)
        assert np.array_equal(c1.output_weights, c2.output_weights)
        assert np.array_equal(c1.bias, c2.bias)

        # CRF: bit-identical weights
        crf_cfg = CrfConfig(epochs=5, learning_rate=0.02, seed=6)
        dataset = [
            (sentence_features(s.sentence), list(s.token_labels))
            for s in gold
            if s.sentence_label is SentenceLabel.CONTAINS_TECH
        ]
        k1 = train_crf(dataset, crf_cfg)
        k2 = train_crf(dataset, crf_cfg)
        assert np.array_equal(k1.emission_weights, k2.emission_weights)
        assert np.array_equal(k1.transition_weights, k2.transition_weights)

    check(8, "seeded determinism", body)


def test_criterion_9_serialization(full_run, tmp_path):
    result, _ = full_run

    def body():
        models = result.models
        probe = result.split.test[:30]

        emb_path = tmp_path / "emb.bin"
        save_embeddings(models.embedding, emb_path)
        emb = load_embeddings(emb_path)

        cls_path = tmp_path / "cls.bin"
        save_classifier(models.classifier, cls_path)
        cls = load_classifier(cls_path)

        crf_path = tmp_path / "crf.bin"
        save_crf(models.crf, crf_path)
        crf = load_crf(crf_path)

        reloaded = PipelineModels(embedding=emb, classifier=cls, crf=crf)
        for labeled in probe:
            v1 = embed_sentence(models.embedding, labeled.sentence)
            v2 = embed_sentence(reloaded.embedding, labeled.sentence)
            assert np.array_equal(v1.values, v2.values)
            p1 = predict(models.classifier, v1)
            p2 = predict(reloaded.classifier, v2)
            assert p1.label is p2.label
            assert np.array_equal(p1.probabilities, p2.probabilities)
            feats = sentence_features(labeled.sentence, models.crf.feature_config)
            assert viterbi(models.crf, feats) == viterbi(reloaded.crf, feats)

    check(9, "model serialization round-trip", body)
