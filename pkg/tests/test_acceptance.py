"""Acceptance suite: one test per release criterion.

Each criterion prints one [PASS]/[FAIL] line on the real stdout so the
outcome is visible even under pytest's capture. Tolerances are pinned in
the asserts; the suite depends only on this package and its fixtures.
"""
from __future__ import annotations

import csv
import functools
import json
import math
import sys
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pytest
from fastapi.testclient import TestClient

from keystage.ann import (
    MlpTopology,
    TrainConfig,
    cross_entropy_loss,
    evaluate,
    init_model,
    loss_and_gradients,
    macro_f1,
    predict,
    train,
)
from keystage.config import EngineConfig
from keystage.curriculum import count_curriculum_features, load_curriculum_lexicon
from keystage.dataset import balance_and_split, map_lexile
from keystage.errors import ValidationError
from keystage.evalstats import ModelResult, paired_t_test, pareto_front
from keystage.features import _is_difficult, extract_features
from keystage.fusion import forward_fused, from_linguistic, train_fused
from keystage.lexicons import default_resources, tag_pos
from keystage.pipeline import document_chunks
from keystage.report import ChunkResult, chunk_difficulty, distribution, overall_score
from keystage.service import create_app
from keystage.stages import KEY_STAGES
from keystage.textseg import segment_text

FIXTURES = Path(__file__).parent / "fixtures"


def _criterion(name):
    """Tag a test as a release criterion and echo its outcome immediately.

    The immediate print is visible under `pytest -s`; the marker makes the
    conftest summary hook repeat one line per criterion on every run.
    """

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"[FAIL] {name}", file=sys.__stdout__, flush=True)
                raise
            print(f"[PASS] {name}", file=sys.__stdout__, flush=True)
            return result

        return pytest.mark.acceptance_criterion(name)(run)

    return wrap


@pytest.fixture(scope="module")
def resources():
    return default_resources()


# --- criterion 1: readability and diversity formulas against an oracle ---

ORACLE_TEXTS = (
    "The cat sat.",
    "Marley was dead, to begin with. There is no doubt whatever about that.",
    "The epistemological ramifications of computational linguistics remain "
    "perpetually controversial among institutional researchers.",
    '"Where are you going?" she asked. "Nowhere in particular," he replied!',
    "Dr. Smith arrived at 3 p.m. on Tuesday. The meeting lasted two hours.",
    "a a b",
    "Extraordinarily complicated administrative considerations necessitated "
    "comprehensive organizational restructuring throughout the institution.",
    "It rained all night. The river rose quickly.\n\nBy morning the bridge "
    "was gone, and the village was an island.",
    "Don't touch the well-known painting; it isn't yours.",
    "Stop! Who goes there? Answer me now, or leave at once!",
)


def _oracle_metrics(text: str, easy_words) -> dict[str, float]:
    """Direct evaluation of every formula from counted operands."""
    seg = segment_text(text)
    words = [t for t in seg.tokens if t.is_word]
    w = len(words)
    s = seg.sentence_count
    syllables = sum(t.syllables for t in words)
    chars = sum(t.char_count for t in words)
    long_words = sum(1 for t in words if t.char_count > 6)
    complex_words = sum(1 for t in words if t.syllables >= 3)
    difficult = sum(1 for t in words if _is_difficult(t.surface, easy_words))

    freq = Counter(t.surface.casefold() for t in words)
    n, v = w, len(freq)
    hapax = sum(1 for c in freq.values() if c == 1)

    return {
        "readability.kincaid": 0.39 * (w / s) + 11.8 * (syllables / w) - 15.59,
        "readability.ari": 4.71 * (chars / w) + 0.5 * (w / s) - 21.43,
        "readability.coleman_liau": (
            0.0588 * (100.0 * chars / w) - 0.296 * (100.0 * s / w) - 15.8
        ),
        "readability.flesch": 206.835 - 1.015 * (w / s) - 84.6 * (syllables / w),
        "readability.gunning_fog": 0.4 * ((w / s) + 100.0 * complex_words / w),
        "readability.lix": (w / s) + 100.0 * long_words / w,
        "readability.smog": 1.0430 * math.sqrt(complex_words * 30.0 / s) + 3.1291,
        "readability.rix": long_words / s,
        "readability.dale_chall": (
            0.1579 * (100.0 * difficult / w) + 0.0496 * (w / s)
        ),
        "diversity.ttr": v / n,
        "diversity.yule_k": 1e4 * (sum(c * c for c in freq.values()) - n) / (n * n),
        "diversity.simpson_d": (
            sum(c * (c - 1) for c in freq.values()) / (n * (n - 1)) if n >= 2 else 0.0
        ),
        "diversity.herdan_c": math.log(n) / math.log(v) if v > 1 else 0.0,
        "diversity.brunet_w": n ** (v ** -0.165),
        "diversity.honore_r": (
            100.0 * math.log(n) / (1.0 - hapax / v) if hapax != v else 0.0
        ),
    }


@_criterion("formula oracle suite (9 readability + 6 diversity, 10 texts)")
def test_formula_oracle_suite(resources):
    for text in ORACLE_TEXTS:
        vector = extract_features(segment_text(text), resources)
        got = dict(zip(vector.schema, vector.values))
        want = _oracle_metrics(text, resources.easy_words)
        for name, value in want.items():
            assert got[name] == pytest.approx(value, abs=1e-9), (name, text)

    cat = dict(
        zip(*(lambda fv: (fv.schema, fv.values))(
            extract_features(segment_text("The cat sat."), resources)
        ))
    )
    assert cat["readability.flesch"] == pytest.approx(119.19, abs=1e-9)
    assert cat["readability.kincaid"] == pytest.approx(-2.62, abs=1e-9)
    assert cat["readability.ari"] == pytest.approx(-5.80, abs=1e-9)
    assert cat["readability.lix"] == pytest.approx(3.0, abs=1e-9)
    assert cat["readability.smog"] == pytest.approx(3.1291, abs=1e-9)
    assert cat["readability.gunning_fog"] == pytest.approx(1.2, abs=1e-9)
    # The published figure is rounded to two decimals; exact is -8.0266...
    assert cat["readability.coleman_liau"] == pytest.approx(-8.03, abs=5e-3)
    assert cat["readability.dale_chall"] == pytest.approx(0.1488, abs=1e-9)


# --- criterion 2: Lexile boundaries and anchors ---

@_criterion("Lexile-to-Key-Stage mapping boundaries and anchors")
def test_lexile_mapping():
    table = {
        399: "KS1", 400: "KS2", 800: "KS2", 801: "KS3",
        1000: "KS3", 1001: "KS4", 1200: "KS4", 1201: "KS5",
    }
    for score, stage in table.items():
        assert map_lexile(score) == stage, score
    assert map_lexile(420) == "KS2"
    assert map_lexile(1840) == "KS5"


# --- criterion 3: balanced 20,000-row dataset pipeline ---

@_criterion("dataset pipeline: 5,000/class cap, 4,000/1,000 split, < 10 s")
def test_dataset_pipeline(tmp_path):
    from keystage.dataset import ingest_csv

    path = tmp_path / "corpus.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["book_id", "text", "lexile", "key_stage"])
        for stage in KEY_STAGES:
            for i in range(5000):
                writer.writerow(
                    [f"{stage}-{i // 40}", f"Row {i} of stage {stage} text.", "", stage]
                )

    started = time.perf_counter()
    rows = ingest_csv(path)
    split = balance_and_split(rows, per_class_cap=5000, train_fraction=0.8, seed=7)
    elapsed = time.perf_counter() - started

    assert len(rows) == 20000
    train_counts = Counter(r.key_stage for r in split.train)
    test_counts = Counter(r.key_stage for r in split.test)
    assert train_counts == {s: 4000 for s in KEY_STAGES}
    assert test_counts == {s: 1000 for s in KEY_STAGES}

    again = balance_and_split(rows, per_class_cap=5000, train_fraction=0.8, seed=7)
    assert again.train == split.train and again.test == split.test
    assert elapsed < 10.0, f"pipeline took {elapsed:.2f}s"


# --- criterion 4: gradient check and separable training ---

def _blobs(n_per_class, dim=6, spread=0.25, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.eye(4, dim) * 3.0
    X, y = [], []
    for c in range(4):
        X.append(centers[c] + rng.normal(0, spread, size=(n_per_class, dim)))
        y.extend([c] * n_per_class)
    return np.vstack(X), np.array(y)


@_criterion("ANN gradient check (100 models) and separable training")
def test_ann_gradients_and_training():
    rng = np.random.default_rng(20260814)
    eps = 1e-6
    for _ in range(100):
        input_dim = int(rng.integers(2, 7))
        depth = int(rng.integers(1, 3))
        widths = tuple(int(w) for w in rng.integers(16, 21, size=depth))
        model = init_model(
            MlpTopology(input_dim, widths, 4), seed=int(rng.integers(2**31))
        )
        X = rng.normal(size=(6, input_dim))
        y = rng.integers(0, 4, size=6)
        _, grad_w, grad_b = loss_and_gradients(model, X, y)

        # Sample coordinates; a full sweep over 100 models is needless work.
        for _ in range(10):
            layer = int(rng.integers(len(model.weights)))
            arrays = (model.weights[layer], grad_w[layer])
            if rng.integers(2):
                arrays = (model.biases[layer], grad_b[layer])
            params, grads = arrays
            index = np.unravel_index(int(rng.integers(params.size)), params.shape)
            original = params[index]
            params[index] = original + eps
            up = cross_entropy_loss(model, X, y)
            params[index] = original - eps
            down = cross_entropy_loss(model, X, y)
            params[index] = original
            numeric = (up - down) / (2 * eps)
            analytic = grads[index]
            rel = abs(analytic - numeric) / max(1e-8, abs(analytic) + abs(numeric))
            assert rel < 1e-4, (widths, index, analytic, numeric)

    X_train, y_train = _blobs(60, seed=1)
    X_val, y_val = _blobs(20, seed=2)
    X_test, y_test = _blobs(25, seed=3)
    started = time.perf_counter()
    model, history = train(
        init_model(MlpTopology(6, (32,), 4), seed=0),
        X_train, y_train, X_val, y_val,
        TrainConfig(learning_rate=0.05, patience=20, max_epochs=200, seed=0),
    )
    elapsed = time.perf_counter() - started
    assert history.best_epoch <= 200
    assert evaluate(model, X_test, y_test).f1 >= 0.95
    assert elapsed < 60.0


# --- criterion 5: fusion exceeds unimodal ceilings; zero-embedding parity ---

def _complementary_task(n_per_class, seed, feat_dim=6, emb_dim=8, noise=0.3):
    """Labels are (embedding bit, feature bit) pairs, so either modality
    alone resolves only one bit and caps at half accuracy."""
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(4), n_per_class)
    rng.shuffle(labels)
    X = rng.normal(0.0, noise, size=(len(labels), feat_dim))
    X[:, 0] += 3.0 * (labels & 1)
    E = rng.normal(0.0, noise, size=(len(labels), emb_dim))
    E[:, 0] += 3.0 * (labels >> 1)
    return X, E, labels


@_criterion("fusion beats unimodal ceilings by 0.1; zero-embedding parity")
def test_fusion_complementarity():
    X_train, E_train, y_train = _complementary_task(60, seed=40)
    X_val, E_val, y_val = _complementary_task(20, seed=41)
    X_test, E_test, y_test = _complementary_task(25, seed=42)
    cfg = TrainConfig(learning_rate=0.05, patience=20, max_epochs=150, seed=0)

    feat_model, _ = train(
        init_model(MlpTopology(X_train.shape[1], (32,), 4), seed=1),
        X_train, y_train, X_val, y_val, cfg,
    )
    emb_model, _ = train(
        init_model(MlpTopology(E_train.shape[1], (32,), 4), seed=1),
        E_train, y_train, E_val, y_val, cfg,
    )
    f1_features = evaluate(feat_model, X_test, y_test).f1
    f1_embeddings = evaluate(emb_model, E_test, y_test).f1

    fused, _ = train_fused(
        from_linguistic(
            init_model(MlpTopology(X_train.shape[1], (32,), 4), seed=1),
            E_train.shape[1],
        ),
        X_train, E_train, y_train, X_val, E_val, y_val, cfg,
    )
    preds = np.argmax(forward_fused(fused, X_test, E_test), axis=1)
    f1_fused = macro_f1(y_test, preds)
    assert f1_fused >= max(f1_features, f1_embeddings) + 0.1

    lifted = from_linguistic(feat_model, E_train.shape[1])
    zeros = np.zeros((len(X_test), E_train.shape[1]))
    lifted_preds = np.argmax(forward_fused(lifted, X_test, zeros), axis=1)
    assert np.array_equal(lifted_preds, predict(feat_model, X_test))


# --- criterion 6: difficulty scoring fixtures and distribution totals ---

def _result(stage, confidence, probabilities=None, cid="c0"):
    if probabilities is None:
        rest = (1.0 - confidence) / 3.0
        probabilities = tuple(
            confidence if s == stage else rest for s in KEY_STAGES
        )
    return ChunkResult(
        chunk_id=cid,
        key_stage=stage,
        confidence=confidence,
        probabilities=tuple(probabilities),
        text="x",
        span=(0, 1),
    )


@_criterion("difficulty score fixtures; distribution sums to 1 (1,000 sets)")
def test_difficulty_and_distribution():
    assert overall_score(
        [_result("KS2", 0.9), _result("KS4", 0.1)]
    ) == pytest.approx(2.2, abs=1e-12)
    assert overall_score(
        [_result("KS2", 0.5), _result("KS4", 0.5)]
    ) == pytest.approx(3.0, abs=1e-12)
    assert overall_score([_result("KS3", 0.37)]) == pytest.approx(3.0, abs=1e-12)

    assert chunk_difficulty((0.25, 0.25, 0.25, 0.25)) == pytest.approx(3.5, abs=1e-12)
    assert chunk_difficulty((0.0, 0.0, 0.0, 1.0)) == pytest.approx(5.0, abs=1e-12)
    assert chunk_difficulty((0.1, 0.2, 0.3, 0.4)) == pytest.approx(4.0, abs=1e-12)

    rng = np.random.default_rng(99)
    for _ in range(1000):
        size = int(rng.integers(1, 50))
        results = [
            _result(KEY_STAGES[int(k)], 0.7, cid=f"c{i}")
            for i, k in enumerate(rng.integers(0, 4, size=size))
        ]
        shares = distribution(results)
        assert set(shares) == set(KEY_STAGES)
        assert sum(shares.values()) == pytest.approx(1.0, abs=1e-12)


# --- criterion 7: Pareto front oracle and paired t on published rows ---

FUSED_PUBLISHED = (
    ModelResult("ELECTRA + ANN", 0.997, 0.997, 0.997, 0.996, 108907499, 0.018),
    ModelResult("ERNIE + ANN", 0.995, 0.995, 0.995, 0.994, 109499627, 0.018),
    ModelResult("XLNet + ANN", 0.992, 0.992, 0.992, 0.992, 116734187, 0.025),
    ModelResult("RoBERTa + ANN", 0.987, 0.988, 0.987, 0.987, 124661483, 0.019),
    ModelResult("DistilBERT + ANN", 0.987, 0.987, 0.987, 0.987, 66378731, 0.011),
    ModelResult("Longformer + ANN", 0.939, 0.951, 0.939, 0.939, 148675307, 0.040),
    ModelResult("BERT + ANN", 0.905, 0.905, 0.905, 0.905, 109498091, 0.018),
    ModelResult("ALBERT + ANN", 0.741, 0.862, 0.741, 0.797, 11699435, 0.010),
)
UNIMODAL_PUBLISHED = (
    ModelResult("BERT", 0.750, 0.751, 0.750, 0.750, 109485316, 0.010),
    ModelResult("DistilBERT", 0.744, 0.744, 0.744, 0.744, 66956548, 0.006),
    ModelResult("Longformer", 0.741, 0.741, 0.741, 0.740, 148662532, 0.036),
    ModelResult("XLNet", 0.742, 0.740, 0.742, 0.740, 117312004, 0.022),
    ModelResult("ERNIE", 0.735, 0.740, 0.735, 0.736, 109486852, 0.011),
    ModelResult("RoBERTa", 0.731, 0.731, 0.731, 0.731, 124648708, 0.010),
    ModelResult("ELECTRA", 0.714, 0.713, 0.714, 0.713, 109485316, 0.011),
    ModelResult("ALBERT", 0.675, 0.685, 0.675, 0.678, 11686660, 0.009),
)


def _brute_force_front(rows):
    f1 = np.array([r.f1 for r in rows])
    times = np.array([r.inference_time_s for r in rows])
    kept = []
    for i, row in enumerate(rows):
        dominated = np.any(
            (f1 >= f1[i]) & (times <= times[i]) & ((f1 > f1[i]) | (times < times[i]))
        )
        if not dominated:
            kept.append(row)
    return kept


@_criterion("Pareto front matches brute force; published rows reproduce t=9.45")
def test_evalstats_acceptance():
    rng = np.random.default_rng(2024)
    for case in range(500):
        size = int(rng.integers(1, 61))
        if case % 2:
            f1s = rng.choice(np.linspace(0.1, 0.9, 5), size=size)
            times = rng.choice((0.01, 0.02, 0.03), size=size)
        else:
            f1s = rng.uniform(0.0, 1.0, size=size)
            times = rng.uniform(0.001, 0.1, size=size)
        rows = [
            ModelResult(f"m{i}", 0.5, 0.5, 0.5, float(f), 10, float(t))
            for i, (f, t) in enumerate(zip(f1s, times))
        ]
        assert list(pareto_front(rows)) == _brute_force_front(rows), case

    front = pareto_front(list(FUSED_PUBLISHED + UNIMODAL_PUBLISHED))
    assert {r.name for r in front} == {
        "DistilBERT", "ALBERT + ANN", "DistilBERT + ANN", "ELECTRA + ANN"
    }

    result = paired_t_test(
        [r.accuracy for r in FUSED_PUBLISHED],
        [r.accuracy for r in UNIMODAL_PUBLISHED],
    )
    assert abs(result.t_statistic - 9.45) < 0.05


# --- criterion 8: curriculum detectors on a 30-sentence hand count ---

CURRICULUM_SENTENCES = [
    "The dog ran.",
    "I ran and he hid.",
    '"Hello," she said.',
    "Although tired, he ran.",
    "Her eyes were as deep as the ocean.",
    "Peter Piper picked a peck of pickled peppers.",
    "However, the plan was not only bold but also persuasive.",
    "He ran, and although he was tired, he won the race.",
    "The wind whispered through the trees.",
    "Old Marley whispered while the bells rang.",
    "In summary, the evidence is therefore both valid and effective.",
    "Supposedly calm, yet he wept — his story was flawed…",
    '"Then we shall see," she said; the clock struck three, and everyone laughed.',
    "If the goblin market sings, it suggests a deeper magic.",
    "Nevertheless, repetition, repetition, repetition makes the point, and the reader nods.",
    "The boat drifted home.",
    "She sang and they danced.",
    "Meanwhile, the fox crept near the barn door.",
    '"Stop it," he shouted, and the crowd laughed.',
    "Because the rain fell, the match was postponed.",
    "At dusk Vera gazed at the harbor.",
    "However, the verdict was flawed; the judges, nevertheless, sang its praises.",
    "In conclusion, the theory is both rigorous and coherent.",
    "Thus the critics argued that the finale was effective, even powerful.",
    "It follows, accordingly, that the argument is not only elegant but also persuasive.",
    "Her smile was like sunshine in the morning.",
    "Wait — the lanterns flickered and the hall fell dark…",
    "The committee judged the proposal inadequate, yet its rivals called it remarkable.",
    "Although the trial dragged on, the jury stayed, and the verdict finally came.",
    "Supposedly objective, the review was apparently biased: its praise, ironically, rang hollow.",
]

CURRICULUM_EXPECTED = {
    "ks2": {
        "simple_sentences": 21,
        "compound_sentences": 9,
        "basic_punctuation": 59,
        "dialogue": 3,
        "narrative_indicators": 3,
    },
    "ks3": {
        "complex_sentences": 6,
        "advanced_punctuation": 3,
        "summarizing_indicators": 2,
        "implied_meaning": 2,
        "similes": 2,
        "alliteration": 2,
    },
    "ks4": {
        "compound_complex_sentences": 2,
        "sophisticated_punctuation": 4,
        "evaluative_language": 6,
        "repetition": 1,
        "personification": 2,
        "tone_shifts": 6,
    },
    "ks5": {
        "advanced_inference": 4,
        "critical_analysis": 8,
        "irony": 4,
        "rhetorical_devices": 2,
    },
}


@_criterion("curriculum detectors: 30-sentence hand counts; chunk additivity")
def test_curriculum_detectors():
    lexicon = load_curriculum_lexicon()
    text = " ".join(CURRICULUM_SENTENCES)
    seg = segment_text(text)
    assert seg.sentence_count == 30
    got = count_curriculum_features(seg, tag_pos(seg), lexicon)
    assert got.ks2 == CURRICULUM_EXPECTED["ks2"]
    assert got.ks3 == CURRICULUM_EXPECTED["ks3"]
    assert got.ks4 == CURRICULUM_EXPECTED["ks4"]
    assert got.ks5 == CURRICULUM_EXPECTED["ks5"]

    rng = np.random.default_rng(7)
    for _ in range(100):
        size = int(rng.integers(3, 13))
        picks = rng.integers(0, len(CURRICULUM_SENTENCES), size=size)
        document = " ".join(CURRICULUM_SENTENCES[i] for i in picks)
        whole_seg = segment_text(document)
        whole = count_curriculum_features(
            whole_seg, tag_pos(whole_seg), lexicon
        ).as_flat_dict()
        total = Counter()
        for chunk in document_chunks(document, token_budget=40):
            assert not chunk.oversized
            part = count_curriculum_features(
                chunk.segmented, tag_pos(chunk.segmented), lexicon
            )
            total.update(part.as_flat_dict())
        assert {k: total.get(k, 0) for k in whole} == whole


# --- criterion 9: golden service response and concurrency ---

@_criterion("service: golden /classify byte-stable; 50 concurrent agree")
def test_service_golden_and_concurrency():
    config = EngineConfig(model_path=str(FIXTURES / "service_model.json"))
    client = TestClient(create_app(config))
    demo_text = client.get("/demo/christmas-carol").json()["text"]

    response = client.post("/classify", json={"text": demo_text})
    assert response.status_code == 200
    body = response.json()
    timing = body.pop("timing_ms")
    assert isinstance(timing, float) and timing >= 0.0
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":"))
    golden = (FIXTURES / "classify_golden.json").read_text(encoding="utf-8")
    assert canonical == golden

    payload = {"text": demo_text, "token_budget": 60}

    def call(_):
        out = client.post("/classify", json=payload).json()
        out.pop("timing_ms")
        return out

    with ThreadPoolExecutor(max_workers=50) as pool:
        bodies = list(pool.map(call, range(50)))
    assert all(b == bodies[0] for b in bodies)
