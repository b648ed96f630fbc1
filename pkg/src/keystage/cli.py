"""Command-line entry point for every pipeline stage.

Conventions shared by all subcommands:

* exit 0 on success, 2 on usage errors, 1 on runtime errors;
* progress lines go to stderr, machine output to stdout only;
* nothing is written outside paths named on the command line;
* artifact-writing subcommands (dataset, train, search, fuse) print a JSON
  summary on stdout, and read-only subcommands (features, eval, analyze,
  compare) print a human rendering unless --json asks for the full document.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .ann import (
    EvalMetrics,
    MlpTopology,
    SearchSpace,
    TrainConfig,
    confusion_matrix,
    evaluate,
    init_model,
    random_search,
    retrain_topology,
    save_model,
    train,
    _macro_prf,
)
from .config import load_config
from .dataset import balance_and_split, emit_csv, ingest_csv
from .errors import EngineError, ResourceError, ValidationError
from .evalstats import ModelResult, paired_metric_tests, pareto_front, read_results_csv
from .features import FEATURE_COUNT, extract_features, feature_schema_document
from .fusion import (
    FusedModel,
    forward_fused,
    from_linguistic,
    load_embeddings,
    save_fused_model,
    train_fused,
)
from .lexicons import Resources, default_resources
from .pipeline import (
    analysis_to_dict,
    analyze_text,
    document_chunks,
    load_any_model,
    write_chunks_jsonl,
)
from .service import create_app
from .stages import KEY_STAGES
from .textseg import segment_text

_QUIET = False


def _progress(message: str) -> None:
    # print() reads sys.stderr at call time, so redirection in tests works.
    if not _QUIET:
        print(message, file=sys.stderr)


def _emit(payload: dict) -> None:
    print(json.dumps(payload, indent=2))


class _UsageError(Exception):
    """Flag combination argparse cannot express; reported as usage (exit 2)."""


def _read_text_file(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise ResourceError(f"text file not found: {p}")
    try:
        return p.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{p} is not valid UTF-8: {exc}") from None


@dataclass(frozen=True)
class ChunkRow:
    """One row of a labeled chunk manifest (chunk_id,text,key_stage)."""

    chunk_id: str
    text: str
    key_stage: str


_CHUNK_COLUMNS = ("chunk_id", "text", "key_stage")


def _read_chunk_rows(path: str) -> list[ChunkRow]:
    p = Path(path)
    if not p.is_file():
        raise ResourceError(f"chunk manifest not found: {p}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{p} is empty")
        missing = [c for c in _CHUNK_COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ValidationError(f"{p} missing columns: {', '.join(missing)}")
        rows: list[ChunkRow] = []
        seen: set[str] = set()
        problems: list[str] = []
        for record in reader:
            chunk_id = (record["chunk_id"] or "").strip()
            text = record["text"] or ""
            stage = (record["key_stage"] or "").strip()
            line = reader.line_num
            if not chunk_id:
                problems.append(f"line {line}: empty chunk_id")
            elif chunk_id in seen:
                problems.append(f"line {line}: duplicate chunk_id {chunk_id}")
            elif not text.strip():
                problems.append(f"line {line}: empty text")
            elif stage not in KEY_STAGES:
                problems.append(f"line {line}: unknown key stage {stage!r}")
            else:
                seen.add(chunk_id)
                rows.append(ChunkRow(chunk_id, text, stage))
    if problems:
        raise ValidationError(f"{p}: " + "; ".join(problems))
    if not rows:
        raise ValidationError(f"{p} contains no data rows")
    return rows


def _stratified_split(rows: list, val_fraction: float, seed: int) -> tuple[list, list]:
    """Shuffle and split per class so both sides keep every stage."""
    if not 0.0 < val_fraction < 1.0:
        raise ValidationError(f"val fraction must be in (0, 1), got {val_fraction}")
    rng = np.random.default_rng(seed)
    train_rows: list = []
    val_rows: list = []
    for stage in KEY_STAGES:
        pool = [r for r in rows if r.key_stage == stage]
        if len(pool) < 2:
            raise ValidationError(
                f"stage {stage} has {len(pool)} rows; a split needs at least 2"
            )
        order = rng.permutation(len(pool))
        n_val = min(max(1, int(round(len(pool) * val_fraction))), len(pool) - 1)
        val_rows.extend(pool[i] for i in order[:n_val])
        train_rows.extend(pool[i] for i in order[n_val:])
    return train_rows, val_rows


def _feature_matrix(texts: Sequence[str], resources: Resources) -> np.ndarray:
    vectors = []
    for i, text in enumerate(texts):
        vectors.append(extract_features(segment_text(text), resources).values)
        if (i + 1) % 500 == 0:
            _progress(f"features: {i + 1}/{len(texts)} rows")
    return np.array(vectors, dtype=np.float64)


def _labels(rows: Sequence) -> np.ndarray:
    return np.array([KEY_STAGES.index(r.key_stage) for r in rows], dtype=np.int64)


def _train_config(args: argparse.Namespace) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.learning_rate,
        patience=args.patience,
        max_epochs=args.max_epochs,
        batch_size=args.batch_size,
        seed=args.seed,
        momentum=args.momentum,
    )


def _prepare_corpus(args: argparse.Namespace) -> tuple[np.ndarray, ...]:
    """Ingest, split, and featurize a labeled corpus CSV for training."""
    rows = ingest_csv(args.data)
    _progress(f"loaded {len(rows)} rows from {args.data}")
    train_rows, val_rows = _stratified_split(rows, args.val_frac, args.seed)
    resources = default_resources()
    X_train = _feature_matrix([r.text for r in train_rows], resources)
    X_val = _feature_matrix([r.text for r in val_rows], resources)
    return X_train, _labels(train_rows), X_val, _labels(val_rows)


def _hidden_layers(value: str) -> tuple[int, ...]:
    try:
        widths = tuple(int(part) for part in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad layer list {value!r}") from None
    if not widths or any(w < 1 for w in widths):
        raise argparse.ArgumentTypeError("layer widths must be positive integers")
    return widths


def cmd_features(args: argparse.Namespace) -> int:
    if args.schema:
        _emit(feature_schema_document())
        return 0
    vector = extract_features(
        segment_text(_read_text_file(args.text_file)), default_resources()
    )
    if args.json:
        _emit(
            {
                "schema_version": vector.schema_version,
                "features": dict(zip(vector.schema, vector.values)),
            }
        )
    else:
        width = max(len(name) for name in vector.schema)
        for name, value in zip(vector.schema, vector.values):
            print(f"{name:<{width}}  {value:.6g}")
    return 0


def cmd_dataset(args: argparse.Namespace) -> int:
    rows = ingest_csv(args.input)
    _progress(f"loaded {len(rows)} rows from {args.input}")
    split = balance_and_split(
        rows, args.cap, args.train_frac, args.seed, group_by_book=args.group_by_book
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    train_path = out_dir / "train.csv"
    test_path = out_dir / "test.csv"
    emit_csv(list(split.train), train_path)
    emit_csv(list(split.test), test_path)

    def per_class(rows):
        counts = Counter(r.key_stage for r in rows)
        return {stage: counts.get(stage, 0) for stage in KEY_STAGES}

    _emit(
        {
            "train": str(train_path),
            "test": str(test_path),
            "train_rows": len(split.train),
            "test_rows": len(split.test),
            "per_class_train": per_class(split.train),
            "per_class_test": per_class(split.test),
            "per_class_cap": split.per_class_cap,
            "train_fraction": split.train_fraction,
            "seed": split.seed,
        }
    )
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    X_train, y_train, X_val, y_val = _prepare_corpus(args)
    topology = MlpTopology(FEATURE_COUNT, args.hidden, len(KEY_STAGES))
    model = init_model(topology, seed=args.seed)
    _progress(f"training {args.hidden} on {len(X_train)} rows")
    trained, history = train(model, X_train, y_train, X_val, y_val, _train_config(args))
    save_model(trained, args.out)
    metrics = evaluate(trained, X_val, y_val)
    _emit(
        {
            "out": str(args.out),
            "hidden_layers": list(args.hidden),
            "parameters": metrics.parameter_count,
            "best_epoch": history.best_epoch,
            "best_val_f1": history.best_val_f1,
            "val_accuracy": metrics.accuracy,
            "train_rows": len(X_train),
            "val_rows": len(X_val),
        }
    )
    return 0


def _trial_dict(trial) -> dict:
    return {
        "trial": trial.trial,
        "hidden_layers": list(trial.topology.hidden_layers),
        "val_f1": trial.val_f1,
        "parameters": trial.parameter_count,
        "inference_time_s": trial.inference_time_s,
        "best_epoch": trial.best_epoch,
        "error": trial.error,
    }


def cmd_search(args: argparse.Namespace) -> int:
    X_train, y_train, X_val, y_val = _prepare_corpus(args)
    space = SearchSpace(
        depth_range=(args.depth_min, args.depth_max),
        width_range=(args.width_min, args.width_max),
    )
    config = _train_config(args)
    _progress(f"searching {args.trials} topologies")
    trials = random_search(
        space, args.trials, X_train, y_train, X_val, y_val, config, seed=args.seed
    )
    best = next((t for t in trials if t.error is None), None)
    if best is None:
        raise ValidationError("every search trial failed")
    model, _ = retrain_topology(
        best.topology, best.trial, X_train, y_train, X_val, y_val, config, args.seed
    )
    save_model(model, args.out)
    _emit(
        {
            "out": str(args.out),
            "best": _trial_dict(best),
            "trials": [_trial_dict(t) for t in trials],
        }
    )
    return 0


def _join_embeddings(rows: list[ChunkRow], path: str) -> tuple[dict, np.ndarray]:
    records = load_embeddings(path)
    missing = [r.chunk_id for r in rows if r.chunk_id not in records]
    if missing:
        shown = ", ".join(missing[:5])
        raise ValidationError(
            f"{len(missing)} chunks have no embedding record: {shown}"
        )
    matrix = np.array([records[r.chunk_id].vector for r in rows], dtype=np.float64)
    return records, matrix


def cmd_fuse(args: argparse.Namespace) -> int:
    base = load_any_model(args.model)
    if isinstance(base, FusedModel):
        raise ValidationError(f"{args.model} is already a fused model")
    if bool(args.data) != bool(args.embeddings):
        raise _UsageError("--data and --embeddings must be given together")

    if not args.data:
        if args.embedding_dim is None:
            raise _UsageError("either --embedding-dim or --data with --embeddings")
        fused = from_linguistic(base, args.embedding_dim)
        save_fused_model(fused, args.out)
        _emit({"out": str(args.out), "mode": "lift", "embedding_dim": args.embedding_dim})
        return 0

    if args.embedding_dim is not None:
        raise _UsageError("--embedding-dim conflicts with --embeddings")
    rows = _read_chunk_rows(args.data)
    records, _ = _join_embeddings(rows, args.embeddings)
    dim = next(iter(records.values())).dim
    train_rows, val_rows = _stratified_split(rows, args.val_frac, args.seed)
    resources = default_resources()
    X_train = _feature_matrix([r.text for r in train_rows], resources)
    X_val = _feature_matrix([r.text for r in val_rows], resources)
    E_train = np.array([records[r.chunk_id].vector for r in train_rows])
    E_val = np.array([records[r.chunk_id].vector for r in val_rows])
    fused = from_linguistic(base, dim)
    _progress(f"fusing with {dim}-dim embeddings on {len(train_rows)} rows")
    trained, history = train_fused(
        fused,
        X_train,
        E_train,
        _labels(train_rows),
        X_val,
        E_val,
        _labels(val_rows),
        _train_config(args),
        train_branch=not args.freeze_branch,
    )
    save_fused_model(trained, args.out)
    _emit(
        {
            "out": str(args.out),
            "mode": "train",
            "embedding_dim": dim,
            "best_epoch": history.best_epoch,
            "best_val_f1": history.best_val_f1,
            "train_rows": len(train_rows),
            "val_rows": len(val_rows),
        }
    )
    return 0


def _fused_parameter_count(fused: FusedModel) -> int:
    branch = sum(
        w.size + b.size for w, b in zip(fused.branch_weights, fused.branch_biases)
    )
    return int(branch + fused.head_weights.size + fused.head_bias.size)


def _evaluate_fused(fused: FusedModel, X: np.ndarray, E: np.ndarray, y: np.ndarray) -> EvalMetrics:
    """Mirror the unimodal evaluate() contract for a fused model."""
    if len(X) == 0:
        raise ValidationError("evaluation set is empty")
    t0 = time.perf_counter()
    probabilities = forward_fused(fused, X, E)
    elapsed = time.perf_counter() - t0
    preds = np.argmax(probabilities, axis=1)
    k = fused.branch_topology.output_classes
    cm = confusion_matrix(y, preds, k)
    precision, recall, f1 = _macro_prf(cm)
    supports = cm.sum(axis=1, keepdims=True).astype(np.float64)
    safe = np.where(supports == 0, 1.0, supports)
    return EvalMetrics(
        accuracy=float((preds == y).mean()),
        precision=precision,
        recall=recall,
        f1=f1,
        inference_time_s=elapsed / len(X),
        parameter_count=_fused_parameter_count(fused),
        confusion=tuple(tuple(int(v) for v in row) for row in cm),
        confusion_normalized=tuple(tuple(float(v) for v in row) for row in cm / safe),
    )


def cmd_eval(args: argparse.Namespace) -> int:
    model = load_any_model(args.model)
    resources = default_resources()
    if isinstance(model, FusedModel):
        if not args.embeddings:
            raise _UsageError("a fused model needs --embeddings and a chunk manifest")
        rows = _read_chunk_rows(args.data)
        _, E = _join_embeddings(rows, args.embeddings)
        X = _feature_matrix([r.text for r in rows], resources)
        metrics = _evaluate_fused(model, X, E, _labels(rows))
    else:
        if args.embeddings:
            raise _UsageError("--embeddings applies only to fused models")
        rows = ingest_csv(args.data)
        X = _feature_matrix([r.text for r in rows], resources)
        metrics = evaluate(model, X, _labels(rows))

    labels = list(model.label_order)
    if args.json:
        _emit(
            {
                "labels": labels,
                "rows": len(rows),
                "accuracy": metrics.accuracy,
                "precision": metrics.precision,
                "recall": metrics.recall,
                "f1": metrics.f1,
                "inference_time_s": metrics.inference_time_s,
                "parameters": metrics.parameter_count,
                "confusion": [list(row) for row in metrics.confusion],
                "confusion_normalized": [
                    list(row) for row in metrics.confusion_normalized
                ],
            }
        )
    else:
        print(f"rows       {len(rows)}")
        print(f"accuracy   {metrics.accuracy:.4f}")
        print(f"precision  {metrics.precision:.4f}")
        print(f"recall     {metrics.recall:.4f}")
        print(f"f1         {metrics.f1:.4f}")
        print(f"time/row   {metrics.inference_time_s:.6f}s")
        print(f"parameters {metrics.parameter_count}")
        print("confusion (rows = truth " + " ".join(labels) + "):")
        for label, row in zip(labels, metrics.confusion):
            print(f"  {label}  " + " ".join(f"{v:6d}" for v in row))
    return 0


def _render_report(payload: dict) -> None:
    report = payload["report"]
    age = report["reading_age"]
    print(f"overall score   {report['overall_score']:.2f}")
    print(f"reading age     {age['text']} ({age['stage']})")
    shares = "  ".join(
        f"{stage} {report['distribution'][stage] * 100:.0f}%" for stage in KEY_STAGES
    )
    print(f"distribution    {shares}")
    chunks = payload["chunks"]
    flagged = sum(1 for c in chunks if c["linguistics_only"])
    print(f"chunks          {len(chunks)} ({flagged} linguistics-only)")
    hard = report["most_complex"]
    easy = report["least_complex"]
    print(f"most complex    {hard['chunk_id']} ({hard['key_stage']}, {hard['confidence']:.2f})")
    print(f"least complex   {easy['chunk_id']} ({easy['key_stage']}, {easy['confidence']:.2f})")
    words = ", ".join(f"{w} ({v:.3f})" for w, v in report["top_vocabulary"][:5])
    print(f"top vocabulary  {words} [{report['vocabulary_mode']}]")
    for stage in ("ks2", "ks3", "ks4", "ks5"):
        counts = report["curriculum"][stage]
        total = sum(counts.values())
        print(f"curriculum {stage} {total} hits")


def cmd_analyze(args: argparse.Namespace) -> int:
    text = _read_text_file(args.text_file)
    model = load_any_model(args.model)
    embeddings = load_embeddings(args.embeddings) if args.embeddings else None
    outcome = analyze_text(
        text,
        model,
        embeddings=embeddings,
        token_budget=args.token_budget,
        linguistics_only=args.linguistics_only,
    )
    if args.emit_chunks:
        chunks = document_chunks(text, token_budget=args.token_budget)
        write_chunks_jsonl(chunks, args.emit_chunks)
        _progress(f"wrote {len(chunks)} chunks to {args.emit_chunks}")
    payload = analysis_to_dict(outcome)
    if args.json:
        _emit(payload)
    else:
        _render_report(payload)
    return 0


def _result_dict(result: ModelResult) -> dict:
    return {
        "name": result.name,
        "accuracy": result.accuracy,
        "precision": result.precision,
        "recall": result.recall,
        "f1": result.f1,
        "parameters": result.parameters,
        "inference_time_s": result.inference_time_s,
    }


def _paired_groups(rows: list[ModelResult]) -> tuple[list[ModelResult], list[ModelResult]]:
    """Fused entries carry "+" in their name; rank each group by F1."""
    fused = sorted((r for r in rows if "+" in r.name), key=lambda r: -r.f1)
    unimodal = sorted((r for r in rows if "+" not in r.name), key=lambda r: -r.f1)
    return fused, unimodal


def cmd_compare(args: argparse.Namespace) -> int:
    rows = read_results_csv(args.results)
    front = pareto_front(rows)
    fused, unimodal = _paired_groups(rows)
    tests = None
    if len(fused) == len(unimodal) and len(fused) >= 2:
        tests = paired_metric_tests(fused, unimodal)
    else:
        _progress(
            f"paired tests skipped: {len(fused)} fused vs {len(unimodal)} unimodal rows"
        )
    if args.json:
        _emit(
            {
                "pareto_front": [_result_dict(r) for r in front],
                "fused_ranked": [r.name for r in fused],
                "unimodal_ranked": [r.name for r in unimodal],
                "paired_tests": None
                if tests is None
                else {
                    metric: {"t": r.t_statistic, "p": r.p_value} for metric, r in tests
                },
            }
        )
        return 0
    print("pareto front (max f1, min inference time):")
    for r in front:
        print(f"  {r.name:<24} f1={r.f1:.3f}  time={r.inference_time_s:.3f}s")
    if tests is not None:
        print(f"paired fused-vs-unimodal t-tests (n={len(fused)} per group):")
        print(f"  {'metric':<18} {'t':>9}  p")
        for metric, result in tests:
            print(f"  {metric:<18} {result.t_statistic:9.4f}  {result.p_value:.3g}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    if args.model:
        config = replace(config, model_path=args.model)
    if args.embeddings:
        config = replace(config, embeddings_path=args.embeddings)
    if args.static_dir:
        config = replace(config, static_dir=args.static_dir)
    if args.host:
        config = replace(config, host=args.host)
    if args.port is not None:
        config = replace(config, port=args.port)
    app = create_app(config)
    _progress(f"serving on {config.host}:{config.port}")
    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def _add_training_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--val-frac", type=float, default=0.2, help="validation share")
    parser.add_argument("--seed", type=int, default=0, help="reproducibility seed")
    parser.add_argument("--learning-rate", type=float, default=0.001)
    parser.add_argument("--batch-size", type=int, default=32)
    parser.add_argument("--max-epochs", type=int, default=200)
    parser.add_argument("--patience", type=int, default=15)
    parser.add_argument("--momentum", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keystage",
        description="Key Stage text difficulty pipeline",
    )
    parser.add_argument(
        "--quiet", action="store_true", help="suppress progress lines on stderr"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    p = sub.add_parser("features", help="extract the linguistic feature vector")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--text-file", help="UTF-8 text to featurize")
    source.add_argument(
        "--schema", action="store_true", help="print the feature schema instead"
    )
    p.add_argument("--json", action="store_true", help="machine output")
    p.set_defaults(handler=cmd_features)

    p = sub.add_parser("dataset", help="corpus preparation")
    actions = p.add_subparsers(dest="action", required=True, metavar="action")
    p = actions.add_parser("split", help="balance classes and split train/test")
    p.add_argument("--input", required=True, help="labeled corpus CSV")
    p.add_argument("--out-dir", required=True, help="directory for train.csv/test.csv")
    p.add_argument("--cap", type=int, required=True, help="rows kept per class")
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--group-by-book", action="store_true", help="keep each book on one side"
    )
    p.set_defaults(handler=cmd_dataset)

    p = sub.add_parser("train", help="train a classifier on a labeled corpus")
    p.add_argument("--data", required=True, help="labeled corpus CSV")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument(
        "--hidden", type=_hidden_layers, default=(64,), help="widths, e.g. 64,32"
    )
    _add_training_options(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("search", help="random topology search")
    p.add_argument("--data", required=True, help="labeled corpus CSV")
    p.add_argument("--out", required=True, help="best model file to write")
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--depth-min", type=int, default=1)
    p.add_argument("--depth-max", type=int, default=5)
    p.add_argument("--width-min", type=int, default=16)
    p.add_argument("--width-max", type=int, default=256)
    _add_training_options(p)
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("fuse", help="lift a classifier into the fused architecture")
    p.add_argument("--model", required=True, help="trained unimodal model")
    p.add_argument("--out", required=True, help="fused model file to write")
    p.add_argument(
        "--embedding-dim", type=int, help="lift without training (zeroed head)"
    )
    p.add_argument("--data", help="labeled chunk manifest CSV for head training")
    p.add_argument("--embeddings", help="embedding records JSONL")
    p.add_argument(
        "--freeze-branch", action="store_true", help="train the head only"
    )
    _add_training_options(p)
    p.set_defaults(handler=cmd_fuse)

    p = sub.add_parser("eval", help="score a model on labeled data")
    p.add_argument("--model", required=True)
    p.add_argument(
        "--data",
        required=True,
        help="corpus CSV (unimodal) or chunk manifest CSV (fused)",
    )
    p.add_argument("--embeddings", help="embedding records JSONL (fused only)")
    p.add_argument("--json", action="store_true", help="machine output")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("analyze", help="full difficulty report for one text")
    p.add_argument("--text-file", required=True, help="UTF-8 document")
    p.add_argument("--model", required=True, help="unimodal or fused model file")
    p.add_argument("--embeddings", help="embedding records JSONL")
    p.add_argument("--token-budget", type=int, default=512)
    p.add_argument(
        "--linguistics-only",
        action="store_true",
        help="ignore embeddings even when available",
    )
    p.add_argument(
        "--emit-chunks", help="also write the chunk JSONL used for embedding jobs"
    )
    p.add_argument("--json", action="store_true", help="full report JSON on stdout")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("compare", help="Pareto front and paired t-tests")
    p.add_argument("--results", required=True, help="benchmark results CSV")
    p.add_argument("--json", action="store_true", help="machine output")
    p.set_defaults(handler=cmd_compare)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--model", help="override the model path")
    p.add_argument("--embeddings", help="override the embeddings path")
    p.add_argument("--static-dir", help="serve web client files from this directory")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(handler=cmd_serve)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    global _QUIET
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage to stderr
        return int(exc.code or 0)
    _QUIET = args.quiet
    try:
        return args.handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
