"""Fusion tests: ingestion, training equivalence, modality complementarity."""

from __future__ import annotations

import json

import numpy as np
import pytest

from keystage.ann import (
    MlpTopology,
    TrainConfig,
    evaluate,
    init_model,
    macro_f1,
    predict,
    train,
)
from keystage.errors import DimensionError, ResourceError, ValidationError
from keystage.fusion import (
    ChunkPrediction,
    EmbeddingRecord,
    FusedModel,
    embedding_matrix,
    forward_fused,
    from_linguistic,
    fused_cross_entropy,
    fused_loss_and_gradients,
    load_embeddings,
    load_fused_model,
    predict_chunk,
    save_fused_model,
    train_fused,
)


def _record_line(chunk_id, vector, attention=None, logits=None, model="stub", dim=None):
    return json.dumps(
        {
            "chunk_id": chunk_id,
            "vector": vector,
            "attention": attention,
            "logits": logits,
            "model": model,
            "dim": len(vector) if dim is None else dim,
        }
    )


def _write_jsonl(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _blobs(n_per_class, dim=6, spread=0.25, seed=0):
    rng = np.random.default_rng(seed)
    centers = np.eye(4, dim) * 3.0
    X, y = [], []
    for c in range(4):
        X.append(centers[c] + rng.normal(0, spread, size=(n_per_class, dim)))
        y.extend([c] * n_per_class)
    return np.vstack(X), np.array(y)


def _complementary_task(n_per_class, seed, feat_dim=6, emb_dim=8, noise=0.3):
    """Labels are (embedding bit, feature bit) pairs: either modality alone
    resolves only one bit."""
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(4), n_per_class)
    rng.shuffle(labels)
    bit_e = labels >> 1
    bit_f = labels & 1
    X = rng.normal(0.0, noise, size=(len(labels), feat_dim))
    X[:, 0] += 3.0 * bit_f
    E = rng.normal(0.0, noise, size=(len(labels), emb_dim))
    E[:, 0] += 3.0 * bit_e
    return X, E, labels


class TestLoadEmbeddings:
    def test_three_records(self, tmp_path):
        path = _write_jsonl(
            tmp_path / "emb.jsonl",
            [
                _record_line(f"{i:05d}-aaaaaaaaaa", [0.1 * i] * 768)
                for i in range(3)
            ],
        )
        records = load_embeddings(path)
        assert len(records) == 3
        rec = records["00001-aaaaaaaaaa"]
        assert rec.dim == 768
        assert rec.vector.shape == (768,)
        assert rec.vector[0] == pytest.approx(0.1)
        assert rec.attention is None and rec.logits is None

    def test_vectors_are_read_only(self, tmp_path):
        path = _write_jsonl(tmp_path / "emb.jsonl", [_record_line("c1", [1.0, 2.0])])
        rec = load_embeddings(path)["c1"]
        with pytest.raises(ValueError):
            rec.vector[0] = 5.0

    def test_mixed_dims_rejected(self, tmp_path):
        path = _write_jsonl(
            tmp_path / "emb.jsonl",
            [_record_line("c1", [0.0] * 768), _record_line("c2", [0.0] * 512)],
        )
        with pytest.raises(DimensionError, match="line 2"):
            load_embeddings(path)

    def test_duplicate_chunk_id_rejected(self, tmp_path):
        path = _write_jsonl(
            tmp_path / "emb.jsonl",
            [_record_line("c1", [0.0, 1.0]), _record_line("c1", [2.0, 3.0])],
        )
        with pytest.raises(ValidationError, match="duplicate"):
            load_embeddings(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ResourceError):
            load_embeddings(tmp_path / "nope.jsonl")

    def test_declared_dim_must_match_vector(self, tmp_path):
        path = _write_jsonl(tmp_path / "emb.jsonl", [_record_line("c1", [0.0, 1.0], dim=3)])
        with pytest.raises(DimensionError):
            load_embeddings(path)

    def test_negative_attention_weight_rejected(self, tmp_path):
        att = [{"token": "cat", "start": 0, "end": 3, "weight": -0.1}]
        path = _write_jsonl(tmp_path / "emb.jsonl", [_record_line("c1", [0.0], attention=att)])
        with pytest.raises(ValidationError, match="non-negative"):
            load_embeddings(path)

    def test_attention_parsed(self, tmp_path):
        att = [
            {"token": "the", "start": 0, "end": 3, "weight": 0.5},
            {"token": "cat", "start": 4, "end": 7, "weight": 1.25},
        ]
        path = _write_jsonl(tmp_path / "emb.jsonl", [_record_line("c1", [0.0], attention=att)])
        rec = load_embeddings(path)["c1"]
        assert rec.attention[1].token == "cat"
        assert rec.attention[1].start == 4
        assert rec.attention[1].weight == pytest.approx(1.25)

    def test_logits_length_enforced(self, tmp_path):
        path = _write_jsonl(
            tmp_path / "emb.jsonl", [_record_line("c1", [0.0], logits=[0.1, 0.2, 0.3])]
        )
        with pytest.raises(ValidationError, match="logits"):
            load_embeddings(path)

    def test_logits_parsed(self, tmp_path):
        path = _write_jsonl(
            tmp_path / "emb.jsonl", [_record_line("c1", [0.0], logits=[0.1, 0.2, 0.3, 0.4])]
        )
        assert load_embeddings(path)["c1"].logits == (0.1, 0.2, 0.3, 0.4)

    def test_invalid_json_reports_line(self, tmp_path):
        path = _write_jsonl(tmp_path / "emb.jsonl", [_record_line("c1", [0.0]), "{broken"])
        with pytest.raises(ValidationError, match="line 2"):
            load_embeddings(path)

    def test_blank_lines_tolerated(self, tmp_path):
        path = tmp_path / "emb.jsonl"
        path.write_text(_record_line("c1", [0.0]) + "\n\n", encoding="utf-8")
        assert len(load_embeddings(path)) == 1

    def test_non_finite_vector_rejected(self, tmp_path):
        path = _write_jsonl(tmp_path / "emb.jsonl", ['{"chunk_id": "c1", "vector": [NaN], "model": "m", "dim": 1}'])
        with pytest.raises(ValidationError):
            load_embeddings(path)


class TestEmbeddingMatrix:
    def _records(self):
        def rec(cid, vec):
            v = np.asarray(vec, dtype=np.float64)
            v.setflags(write=False)
            return EmbeddingRecord(cid, v, None, None, "stub", len(vec))

        return {"a": rec("a", [1.0, 2.0]), "b": rec("b", [3.0, 4.0])}

    def test_stacks_in_order(self):
        M = embedding_matrix(["b", "a"], self._records())
        assert M.tolist() == [[3.0, 4.0], [1.0, 2.0]]

    def test_missing_ids_reported(self):
        with pytest.raises(ValidationError, match="missing embeddings.*c"):
            embedding_matrix(["a", "c"], self._records())


class TestFromLinguistic:
    def test_initial_predictions_match_unimodal(self):
        X_train, y_train = _blobs(30, seed=0)
        X_val, y_val = _blobs(10, seed=1)
        model, _ = train(
            init_model(MlpTopology(6, (16,)), seed=3),
            X_train, y_train, X_val, y_val,
            TrainConfig(learning_rate=0.05, max_epochs=20, seed=0),
        )
        fused = from_linguistic(model, embedding_dim=5)
        E = np.random.default_rng(0).normal(size=(len(X_val), 5))
        from keystage.ann import forward
        assert forward_fused(fused, X_val, E) == pytest.approx(forward(model, X_val), abs=0)

    def test_head_shape(self):
        fused = from_linguistic(init_model(MlpTopology(6, (16, 32)), seed=0), 7)
        assert fused.head_weights.shape == (7 + 32, 4)
        assert not fused.head_weights[:7].any()

    def test_invalid_dim(self):
        with pytest.raises(ValidationError):
            from_linguistic(init_model(MlpTopology(6, (16,)), seed=0), 0)

    def test_head_shape_invariant_enforced(self):
        fused = from_linguistic(init_model(MlpTopology(6, (16,)), seed=0), 4)
        with pytest.raises(DimensionError):
            FusedModel(
                branch_topology=fused.branch_topology,
                embedding_dim=4,
                branch_weights=fused.branch_weights,
                branch_biases=fused.branch_biases,
                head_weights=np.zeros((12, 4)),
                head_bias=fused.head_bias,
                feature_mean=fused.feature_mean,
                feature_std=fused.feature_std,
                embedding_mean=fused.embedding_mean,
                embedding_std=fused.embedding_std,
            )


class TestZeroEmbeddingEquivalence:
    def test_training_is_bit_identical_to_unimodal(self):
        X_train, y_train = _blobs(40, seed=10)
        X_val, y_val = _blobs(15, seed=11)
        X_test, _ = _blobs(25, seed=12)
        cfg = TrainConfig(learning_rate=0.05, patience=8, max_epochs=40, seed=2)
        topo = MlpTopology(6, (24,))
        emb_dim = 8

        unimodal, hist_u = train(init_model(topo, seed=5), X_train, y_train, X_val, y_val, cfg)
        fused, hist_f = train_fused(
            from_linguistic(init_model(topo, seed=5), emb_dim),
            X_train, np.zeros((len(X_train), emb_dim)), y_train,
            X_val, np.zeros((len(X_val), emb_dim)), y_val,
            cfg,
        )

        assert hist_f == hist_u
        for bw, uw in zip(fused.branch_weights, unimodal.weights[:-1]):
            assert np.array_equal(bw, uw)
        for bb, ub in zip(fused.branch_biases, unimodal.biases[:-1]):
            assert np.array_equal(bb, ub)
        assert np.array_equal(fused.head_weights[emb_dim:], unimodal.weights[-1])
        assert np.array_equal(fused.head_bias, unimodal.biases[-1])
        assert not fused.head_weights[:emb_dim].any()

        probs_f = forward_fused(fused, X_test, np.zeros((len(X_test), emb_dim)))
        agreement = np.mean(np.argmax(probs_f, axis=1) == predict(unimodal, X_test))
        assert agreement == 1.0

    def test_fallback_prediction_matches_unimodal(self):
        X_train, y_train = _blobs(30, seed=13)
        X_val, y_val = _blobs(10, seed=14)
        cfg = TrainConfig(learning_rate=0.05, max_epochs=20, seed=0)
        topo = MlpTopology(6, (16,))
        unimodal, _ = train(init_model(topo, seed=7), X_train, y_train, X_val, y_val, cfg)
        fused, _ = train_fused(
            from_linguistic(init_model(topo, seed=7), 4),
            X_train, np.zeros((len(X_train), 4)), y_train,
            X_val, np.zeros((len(X_val), 4)), y_val,
            cfg,
        )
        for x in X_val[:10]:
            pred = predict_chunk(fused, x, None, linguistics_only=True)
            assert pred.linguistics_only is True
            assert pred.key_stage == fused.label_order[predict(unimodal, x)]


class TestComplementaryTask:
    def test_fusion_beats_both_unimodal_ceilings(self):
        X_train, E_train, y_train = _complementary_task(60, seed=20)
        X_val, E_val, y_val = _complementary_task(20, seed=21)
        X_test, E_test, y_test = _complementary_task(25, seed=22)
        cfg = TrainConfig(learning_rate=0.05, patience=20, max_epochs=150, seed=0)

        feat_model, _ = train(
            init_model(MlpTopology(X_train.shape[1], (32,)), seed=1),
            X_train, y_train, X_val, y_val, cfg,
        )
        emb_model, _ = train(
            init_model(MlpTopology(E_train.shape[1], (32,)), seed=1),
            E_train, y_train, E_val, y_val, cfg,
        )
        f1_feat = evaluate(feat_model, X_test, y_test).f1
        f1_emb = evaluate(emb_model, E_test, y_test).f1

        # Brute force over every deterministic bit -> label map: one bit can
        # never exceed 0.5 accuracy on the four balanced classes.
        for bits in (y_test & 1, y_test >> 1):
            best = max(
                np.mean(np.where(bits == 0, a, b) == y_test)
                for a in range(4)
                for b in range(4)
            )
            assert best == pytest.approx(0.5)
        assert f1_feat <= 0.6
        assert f1_emb <= 0.6

        fused, _ = train_fused(
            from_linguistic(init_model(MlpTopology(X_train.shape[1], (32,)), seed=1),
                            E_train.shape[1]),
            X_train, E_train, y_train, X_val, E_val, y_val, cfg,
        )
        preds = np.argmax(forward_fused(fused, X_test, E_test), axis=1)
        f1_fused = macro_f1(y_test, preds)
        assert f1_fused >= max(f1_feat, f1_emb) + 0.1


class TestTrainFused:
    def test_embeddings_never_mutated(self, tmp_path):
        X_train, y_train = _blobs(20, seed=30)
        X_val, y_val = _blobs(8, seed=31)
        rng = np.random.default_rng(0)
        lines = [
            _record_line(f"c{i}", rng.normal(size=4).tolist()) for i in range(len(X_train))
        ]
        records = load_embeddings(_write_jsonl(tmp_path / "e.jsonl", lines))
        ids = [f"c{i}" for i in range(len(X_train))]
        E_train = embedding_matrix(ids, records)
        before = {cid: records[cid].vector.copy() for cid in ids}

        train_fused(
            from_linguistic(init_model(MlpTopology(6, (16,)), seed=0), 4),
            X_train, E_train, y_train,
            X_val, rng.normal(size=(len(X_val), 4)), y_val,
            TrainConfig(learning_rate=0.05, max_epochs=15, seed=0),
        )
        for cid in ids:
            assert np.array_equal(records[cid].vector, before[cid])

    def test_frozen_branch_flag(self):
        X_train, y_train = _blobs(20, seed=32)
        X_val, y_val = _blobs(8, seed=33)
        E_train = np.random.default_rng(1).normal(size=(len(X_train), 4))
        E_val = np.random.default_rng(2).normal(size=(len(X_val), 4))
        start = from_linguistic(init_model(MlpTopology(6, (16,)), seed=3), 4)
        fused, _ = train_fused(
            start, X_train, E_train, y_train, X_val, E_val, y_val,
            TrainConfig(learning_rate=0.05, max_epochs=10, seed=0),
            train_branch=False,
        )
        for w0, w1 in zip(start.branch_weights, fused.branch_weights):
            assert np.array_equal(w0, w1)
        assert not np.array_equal(start.head_weights, fused.head_weights)

    def test_length_mismatch_rejected(self):
        X_train, y_train = _blobs(5, seed=0)
        X_val, y_val = _blobs(2, seed=1)
        fused = from_linguistic(init_model(MlpTopology(6, (16,)), seed=0), 4)
        with pytest.raises(ValidationError, match="length"):
            train_fused(
                fused, X_train, np.zeros((3, 4)), y_train,
                X_val, np.zeros((8, 4)), y_val, TrainConfig(),
            )


class TestFusedGradients:
    def test_analytic_matches_finite_differences(self):
        eps = 1e-5
        rng = np.random.default_rng(7)
        for trial in range(30):
            depth = 1 + trial % 2
            topo = MlpTopology(int(rng.integers(2, 5)), tuple([16] * depth))
            emb_dim = int(rng.integers(2, 5))
            fused = from_linguistic(init_model(topo, seed=trial), emb_dim)
            # a non-zero embedding block so its gradient path is exercised
            fused.head_weights[:emb_dim] = rng.normal(
                scale=0.3, size=(emb_dim, 4)
            )
            fused.feature_mean = rng.normal(size=topo.input_dim)
            fused.feature_std = np.abs(rng.normal(size=topo.input_dim)) + 0.5
            fused.embedding_mean = rng.normal(size=emb_dim)
            fused.embedding_std = np.abs(rng.normal(size=emb_dim)) + 0.5
            X = rng.normal(size=(6, topo.input_dim))
            E = rng.normal(size=(6, emb_dim))
            y = rng.integers(0, 4, size=6)
            _, gw, gb, gh, ghb = fused_loss_and_gradients(fused, X, E, y)

            analytic, numeric = [], []

            def central(read, write):
                orig = read()
                write(orig + eps)
                up = fused_cross_entropy(fused, X, E, y)
                write(orig - eps)
                down = fused_cross_entropy(fused, X, E, y)
                write(orig)
                return (up - down) / (2 * eps)

            for layer, W in enumerate(fused.branch_weights):
                for idx in np.ndindex(W.shape):
                    numeric.append(central(lambda: W[idx], lambda v: W.__setitem__(idx, v)))
                    analytic.append(gw[layer][idx])
                b = fused.branch_biases[layer]
                for i in range(b.shape[0]):
                    numeric.append(central(lambda: b[i], lambda v: b.__setitem__(i, v)))
                    analytic.append(gb[layer][i])
            H = fused.head_weights
            for idx in np.ndindex(H.shape):
                numeric.append(central(lambda: H[idx], lambda v: H.__setitem__(idx, v)))
                analytic.append(gh[idx])
            hb = fused.head_bias
            for i in range(hb.shape[0]):
                numeric.append(central(lambda: hb[i], lambda v: hb.__setitem__(i, v)))
                analytic.append(ghb[i])

            a = np.array(analytic)
            n = np.array(numeric)
            rel = np.linalg.norm(a - n) / (np.linalg.norm(a) + np.linalg.norm(n) + 1e-12)
            assert rel < 1e-4, f"trial {trial}: relative error {rel}"


class TestPredictChunk:
    def _uniform_fused(self):
        fused = from_linguistic(init_model(MlpTopology(4, (16,)), seed=0), 3)
        for w in fused.branch_weights:
            w[:] = 0.0
        fused.head_weights[:] = 0.0
        fused.head_bias[:] = 0.0
        return fused

    def test_zero_head_uniform_ties_to_ks2(self):
        pred = predict_chunk(self._uniform_fused(), np.zeros(4), np.zeros(3))
        assert pred.key_stage == "KS2"
        assert pred.confidence == pytest.approx(0.25)
        assert pred.probabilities == pytest.approx([0.25] * 4)
        assert pred.linguistics_only is False

    def test_matches_matrix_oracle(self):
        rng = np.random.default_rng(5)
        fused = from_linguistic(init_model(MlpTopology(3, (16,)), seed=4), 2)
        fused.head_weights[:2] = rng.normal(size=(2, 4))
        x = rng.normal(size=3)
        e = rng.normal(size=2)
        z = (x - fused.feature_mean) / fused.feature_std
        h = np.maximum(z @ fused.branch_weights[0] + fused.branch_biases[0], 0.0)
        logits = (
            h @ fused.head_weights[2:]
            + fused.head_bias
            + e @ fused.head_weights[:2]
        )
        exp = np.exp(logits - logits.max())
        expected = exp / exp.sum()
        pred = predict_chunk(fused, x, e)
        assert pred.probabilities == pytest.approx(expected, abs=1e-12)
        assert pred.confidence == pytest.approx(expected.max(), abs=1e-12)

    def test_accepts_embedding_record(self):
        fused = self._uniform_fused()
        vec = np.zeros(3)
        vec.setflags(write=False)
        rec = EmbeddingRecord("c1", vec, None, None, "stub", 3)
        assert predict_chunk(fused, np.zeros(4), rec).key_stage == "KS2"

    def test_missing_embedding_fails_without_flag(self):
        with pytest.raises(ValidationError, match="linguistics-only"):
            predict_chunk(self._uniform_fused(), np.zeros(4), None)

    def test_dim_mismatch(self):
        fused = self._uniform_fused()
        with pytest.raises(DimensionError):
            predict_chunk(fused, np.zeros(4), np.zeros(5))
        with pytest.raises(DimensionError):
            predict_chunk(fused, np.zeros(9), np.zeros(3))

    def test_probabilities_normalized(self):
        rng = np.random.default_rng(3)
        fused = from_linguistic(init_model(MlpTopology(5, (16,)), seed=2), 4)
        fused.head_weights[:4] = rng.normal(size=(4, 4))
        for _ in range(20):
            pred = predict_chunk(fused, rng.normal(size=5), rng.normal(size=4))
            assert sum(pred.probabilities) == pytest.approx(1.0, abs=1e-9)
            assert all(p >= 0 for p in pred.probabilities)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        X_train, y_train = _blobs(20, seed=40)
        X_val, y_val = _blobs(8, seed=41)
        E_train = np.random.default_rng(0).normal(size=(len(X_train), 5))
        E_val = np.random.default_rng(1).normal(size=(len(X_val), 5))
        fused, _ = train_fused(
            from_linguistic(init_model(MlpTopology(6, (16,)), seed=0), 5),
            X_train, E_train, y_train, X_val, E_val, y_val,
            TrainConfig(learning_rate=0.05, max_epochs=10, seed=0),
        )
        path = tmp_path / "fused.json"
        save_fused_model(fused, path)
        loaded = load_fused_model(path)
        assert loaded.branch_topology == fused.branch_topology
        assert loaded.embedding_dim == 5
        X = np.random.default_rng(2).normal(size=(4, 6))
        E = np.random.default_rng(3).normal(size=(4, 5))
        assert forward_fused(loaded, X, E) == pytest.approx(
            forward_fused(fused, X, E), abs=0
        )

    def test_kind_mismatch(self, tmp_path):
        from keystage.ann import save_model
        model = init_model(MlpTopology(4, (16,)), seed=0)
        path = tmp_path / "m.json"
        save_model(model, path)
        with pytest.raises(ValidationError, match="kind"):
            load_fused_model(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ResourceError):
            load_fused_model(tmp_path / "none.json")

    def test_tampered_head_shape(self, tmp_path):
        fused = from_linguistic(init_model(MlpTopology(4, (16,)), seed=0), 3)
        path = tmp_path / "fused.json"
        save_fused_model(fused, path)
        doc = json.loads(path.read_text())
        doc["head_weights"] = [[0.0] * 4] * 5
        path.write_text(json.dumps(doc))
        with pytest.raises(DimensionError):
            load_fused_model(path)
