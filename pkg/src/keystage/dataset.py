"""Dataset ingestion, Lexile mapping, class balancing, and seeded splits.

The chunk-level corpus is a UTF-8 CSV with RFC-4180 quoting and columns
``book_id,text,lexile,key_stage``. Lexile scores map to Key Stages on the
fixed intervals below; rows carry the nominal label, and when a Lexile
score is present the two must agree.

Sampling and splitting use numpy's default generator (PCG64) seeded
explicitly, so identical inputs and seeds reproduce identical splits on
any platform. The split is stratified per class: each class is sampled
down to the cap without replacement, then cut at round(cap * fraction)
(half rounds up) into train/test. By default rows split independently of
their source book, matching a plain row-level split; ``group_by_book``
instead assigns whole books to one side, which keeps leakage out but can
miss the exact per-class counts at book boundaries.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ResourceError, ValidationError
from .stages import KEY_STAGES

_COLUMNS = ("book_id", "text", "lexile", "key_stage")
_MAX_REPORTED_ERRORS = 20


@dataclass(frozen=True)
class LabeledChunk:
    """One labelled text chunk from the corpus."""

    book_id: str
    text: str
    lexile: int | None
    key_stage: str


@dataclass(frozen=True)
class SplitDataset:
    train: tuple[LabeledChunk, ...]
    test: tuple[LabeledChunk, ...]
    seed: int
    per_class_cap: int
    train_fraction: float


def map_lexile(score: int) -> str:
    """Key Stage for a positive Lexile score.

    Intervals: below 400 KS1, 400-800 KS2, 801-1000 KS3, 1001-1200 KS4,
    above 1200 KS5. Boundaries belong to the stage whose printed range
    names them (800 is KS2, 1200 is KS4), making the intervals a partition.
    KS1 is a valid mapping result but not a classifier label; ingestion
    rejects KS1 rows.
    """
    if score <= 0:
        raise ValidationError(f"lexile score must be positive, got {score}")
    if score < 400:
        return "KS1"
    if score <= 800:
        return "KS2"
    if score <= 1000:
        return "KS3"
    if score <= 1200:
        return "KS4"
    return "KS5"


def ingest_csv(path: str | Path) -> list[LabeledChunk]:
    """Read and validate the corpus CSV.

    Extra columns are ignored. All malformed rows are collected and
    reported together with their line numbers (up to a cap) so one pass
    surfaces every problem.
    """
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"dataset CSV not found at {path}")
    rows: list[LabeledChunk] = []
    problems: list[str] = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValidationError(f"{path} is empty")
        missing = [c for c in _COLUMNS if c not in reader.fieldnames]
        if missing:
            raise ValidationError(f"{path} is missing columns: {', '.join(missing)}")
        for record in reader:
            line = reader.line_num
            text = (record.get("text") or "").strip()
            stage = (record.get("key_stage") or "").strip()
            lexile_raw = (record.get("lexile") or "").strip()
            if not text:
                problems.append(f"line {line}: empty text")
                continue
            if stage not in KEY_STAGES:
                problems.append(
                    f"line {line}: key_stage {stage!r} outside {{{', '.join(KEY_STAGES)}}}"
                )
                continue
            lexile: int | None = None
            if lexile_raw:
                try:
                    lexile = int(lexile_raw)
                except ValueError:
                    problems.append(f"line {line}: lexile {lexile_raw!r} is not an integer")
                    continue
                try:
                    mapped = map_lexile(lexile)
                except ValidationError:
                    problems.append(f"line {line}: lexile {lexile} is not positive")
                    continue
                if mapped != stage:
                    problems.append(
                        f"line {line}: lexile {lexile} maps to {mapped}, row says {stage}"
                    )
                    continue
            rows.append(
                LabeledChunk(
                    book_id=(record.get("book_id") or "").strip(),
                    text=text,
                    lexile=lexile,
                    key_stage=stage,
                )
            )
    if problems:
        shown = problems[:_MAX_REPORTED_ERRORS]
        more = len(problems) - len(shown)
        suffix = f" (+{more} more)" if more else ""
        raise ValidationError("; ".join(shown) + suffix)
    if not rows:
        raise ValidationError(f"{path} contains no data rows")
    return rows


def emit_csv(rows: list[LabeledChunk], path: str | Path) -> None:
    """Write rows back out in the published column order."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COLUMNS)
        for row in rows:
            writer.writerow(
                [row.book_id, row.text, "" if row.lexile is None else row.lexile, row.key_stage]
            )


def balance_and_split(
    rows: list[LabeledChunk],
    per_class_cap: int,
    train_fraction: float,
    seed: int,
    group_by_book: bool = False,
) -> SplitDataset:
    """Sample each class down to the cap and split train/test by the seed."""
    if per_class_cap < 1:
        raise ValidationError(f"per_class_cap must be positive, got {per_class_cap}")
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    by_stage: dict[str, list[LabeledChunk]] = {s: [] for s in KEY_STAGES}
    for row in rows:
        by_stage[row.key_stage].append(row)
    short = {s: len(v) for s, v in by_stage.items() if len(v) < per_class_cap}
    if short:
        detail = ", ".join(f"{s} has {n}" for s, n in sorted(short.items()))
        raise ValidationError(
            f"insufficient rows for per-class cap {per_class_cap}: {detail}"
        )

    rng = np.random.default_rng(seed)
    n_train = int(math.floor(per_class_cap * train_fraction + 0.5))
    train: list[LabeledChunk] = []
    test: list[LabeledChunk] = []
    for stage in KEY_STAGES:
        pool = by_stage[stage]
        chosen_idx = rng.choice(len(pool), size=per_class_cap, replace=False)
        chosen = [pool[i] for i in chosen_idx]
        if group_by_book:
            class_train, class_test = _split_whole_books(chosen, n_train)
        else:
            class_train, class_test = chosen[:n_train], chosen[n_train:]
        train.extend(class_train)
        test.extend(class_test)
    return SplitDataset(
        train=tuple(train),
        test=tuple(test),
        seed=seed,
        per_class_cap=per_class_cap,
        train_fraction=train_fraction,
    )


def _split_whole_books(
    chosen: list[LabeledChunk], n_train: int
) -> tuple[list[LabeledChunk], list[LabeledChunk]]:
    """Assign entire books to train until the train target is reached.

    Books are taken in sampled first-occurrence order, so the result is a
    pure function of the sampled sequence. Per-class counts follow book
    boundaries and may deviate from the exact target.
    """
    by_book: dict[str, list[LabeledChunk]] = {}
    for row in chosen:
        by_book.setdefault(row.book_id, []).append(row)
    train: list[LabeledChunk] = []
    test: list[LabeledChunk] = []
    for book_rows in by_book.values():
        if len(train) < n_train:
            train.extend(book_rows)
        else:
            test.extend(book_rows)
    return train, test
