"""Aggregates per-chunk classifications into the educator-facing report.

Inputs are chunk-level class distributions; outputs are the stage
distribution, the confidence-weighted overall score with its reading-age
recommendation, a per-chunk difficulty series, key vocabulary, curriculum
feature counts, and the most and least complex excerpts.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import AbstractSet, Mapping, Sequence

from .curriculum import CurriculumFeatureCounts
from .errors import ValidationError
from .fusion import EmbeddingRecord
from .stages import KEY_STAGES, STAGE_AGE_RANGES, stage_value
from .textseg import tokenize

REPORT_VERSION = "1"

VOCABULARY_ATTENTION = "attention"
VOCABULARY_FALLBACK = "fallback"


@dataclass(frozen=True)
class ChunkResult:
    """One chunk's classification plus the text span it covers."""

    chunk_id: str
    key_stage: str
    confidence: float
    probabilities: tuple[float, ...]
    text: str
    span: tuple[int, int]
    linguistics_only: bool = False


@dataclass(frozen=True)
class ReadingAge:
    stage: str
    age_low: int
    age_high: int
    text: str


@dataclass(frozen=True)
class AnalysisReport:
    distribution: dict[str, float]
    overall_score: float
    reading_age: ReadingAge
    difficulty_series: tuple[tuple[int, float], ...]
    top_vocabulary: tuple[tuple[str, float], ...]
    vocabulary_mode: str
    curriculum: CurriculumFeatureCounts
    most_complex: ChunkResult
    least_complex: ChunkResult


def distribution(results: Sequence[ChunkResult]) -> dict[str, float]:
    """Fraction of chunks classified at each stage; all four keys present."""
    if not results:
        raise ValidationError("distribution needs at least one chunk result")
    counts = dict.fromkeys(KEY_STAGES, 0)
    for r in results:
        if r.key_stage not in counts:
            raise ValidationError(f"unknown key stage {r.key_stage!r}")
        counts[r.key_stage] += 1
    total = len(results)
    return {stage: counts[stage] / total for stage in KEY_STAGES}


def overall_score(results: Sequence[ChunkResult]) -> float:
    """Confidence-weighted mean stage value: sum(KS_j * C_j) / sum(C_j)."""
    if not results:
        raise ValidationError("overall score needs at least one chunk result")
    weight = sum(r.confidence for r in results)
    if weight <= 0.0:
        raise ValidationError("confidences sum to zero")
    return sum(stage_value(r.key_stage) * r.confidence for r in results) / weight


def chunk_difficulty(probabilities: Sequence[float]) -> float:
    """Expected stage value over KS2..KS5 under the chunk's distribution."""
    if len(probabilities) != len(KEY_STAGES):
        raise ValidationError(
            f"expected {len(KEY_STAGES)} probabilities, got {len(probabilities)}"
        )
    if any(p < 0 for p in probabilities) or not math.isclose(
        sum(probabilities), 1.0, abs_tol=1e-6
    ):
        raise ValidationError("probabilities must be non-negative and sum to 1")
    return sum(
        stage_value(stage) * p for stage, p in zip(KEY_STAGES, probabilities)
    )


def difficulty_series(results: Sequence[ChunkResult]) -> tuple[tuple[int, float], ...]:
    """(chunk index, expected stage value) in document order."""
    return tuple(
        (index, chunk_difficulty(r.probabilities)) for index, r in enumerate(results)
    )


def _normalize_piece(token: str) -> str:
    return token.removeprefix("##").removeprefix("▁").casefold()


def top_vocabulary(
    results: Sequence[ChunkResult],
    vocabulary: AbstractSet[str],
    embeddings: Mapping[str, EmbeddingRecord] | None = None,
    k: int = 10,
) -> tuple[tuple[tuple[str, float], ...], str]:
    """Up to k vocabulary words ranked by importance, plus the mode used.

    With attention available for every chunk, a word's importance is the mean
    aggregated attention weight over its occurrences. Otherwise importance
    falls back to confidence-weighted term frequency and the mode string says
    so. Ties sort alphabetically; matching is case-insensitive against the
    supplied word set.
    """
    if k < 1:
        raise ValidationError("k must be at least 1")
    use_attention = embeddings is not None and all(
        r.chunk_id in embeddings and embeddings[r.chunk_id].attention is not None
        for r in results
    )
    if use_attention and results:
        weights: dict[str, list[float]] = defaultdict(list)
        for r in results:
            for span in embeddings[r.chunk_id].attention:
                word = _normalize_piece(span.token)
                if word in vocabulary:
                    weights[word].append(span.weight)
        scored = {word: sum(ws) / len(ws) for word, ws in weights.items()}
        mode = VOCABULARY_ATTENTION
    else:
        totals: dict[str, float] = defaultdict(float)
        for r in results:
            for tok in tokenize(r.text):
                if not tok.is_word:
                    continue
                word = tok.surface.casefold()
                if word in vocabulary:
                    totals[word] += r.confidence
        scored = dict(totals)
        mode = VOCABULARY_FALLBACK
    ranked = sorted(scored.items(), key=lambda item: (-item[1], item[0]))
    return tuple(ranked[:k]), mode


def extreme_excerpts(results: Sequence[ChunkResult]) -> tuple[ChunkResult, ChunkResult]:
    """(most complex, least complex): highest stage at highest confidence and
    lowest stage at highest confidence; ties keep the first occurrence."""
    if not results:
        raise ValidationError("extreme excerpts need at least one chunk result")
    most = least = results[0]
    for r in results[1:]:
        if (stage_value(r.key_stage), r.confidence) > (
            stage_value(most.key_stage),
            most.confidence,
        ):
            most = r
        if (-stage_value(r.key_stage), r.confidence) > (
            -stage_value(least.key_stage),
            least.confidence,
        ):
            least = r
    return most, least


def reading_age(score: float) -> ReadingAge:
    """Nearest stage by round-half-up, with its fixed age range."""
    if not 2.0 <= score <= 5.0:
        raise ValidationError(f"overall score {score} outside [2, 5]")
    value = int(math.floor(score + 0.5))
    stage = f"KS{value}"
    low, high = STAGE_AGE_RANGES[stage]
    return ReadingAge(stage=stage, age_low=low, age_high=high, text=f"ages {low}-{high}")


def assemble_report(
    results: Sequence[ChunkResult],
    curriculum_counts: CurriculumFeatureCounts,
    vocabulary: AbstractSet[str],
    embeddings: Mapping[str, EmbeddingRecord] | None = None,
    k: int = 10,
) -> AnalysisReport:
    score = overall_score(results)
    vocab, mode = top_vocabulary(results, vocabulary, embeddings, k)
    most, least = extreme_excerpts(results)
    return AnalysisReport(
        distribution=distribution(results),
        overall_score=score,
        reading_age=reading_age(score),
        difficulty_series=difficulty_series(results),
        top_vocabulary=vocab,
        vocabulary_mode=mode,
        curriculum=curriculum_counts,
        most_complex=most,
        least_complex=least,
    )


def chunk_result_to_dict(r: ChunkResult) -> dict:
    return {
        "chunk_id": r.chunk_id,
        "key_stage": r.key_stage,
        "confidence": r.confidence,
        "probabilities": list(r.probabilities),
        "text": r.text,
        "span": list(r.span),
        "linguistics_only": r.linguistics_only,
    }


def report_to_dict(report: AnalysisReport) -> dict:
    """JSON-ready dictionary in the versioned report schema."""
    return {
        "report_version": REPORT_VERSION,
        "distribution": dict(report.distribution),
        "overall_score": report.overall_score,
        "reading_age": {
            "stage": report.reading_age.stage,
            "age_low": report.reading_age.age_low,
            "age_high": report.reading_age.age_high,
            "text": report.reading_age.text,
        },
        "difficulty_series": [[i, v] for i, v in report.difficulty_series],
        "top_vocabulary": [[w, v] for w, v in report.top_vocabulary],
        "vocabulary_mode": report.vocabulary_mode,
        "curriculum": {
            "ks2": dict(report.curriculum.ks2),
            "ks3": dict(report.curriculum.ks3),
            "ks4": dict(report.curriculum.ks4),
            "ks5": dict(report.curriculum.ks5),
        },
        "most_complex": chunk_result_to_dict(report.most_complex),
        "least_complex": chunk_result_to_dict(report.least_complex),
    }


def report_schema_document() -> dict:
    """JSON Schema for the document produced by report_to_dict."""
    stage_properties = {stage: {"type": "number"} for stage in KEY_STAGES}
    chunk_schema = {
        "type": "object",
        "properties": {
            "chunk_id": {"type": "string"},
            "key_stage": {"type": "string", "enum": list(KEY_STAGES)},
            "confidence": {"type": "number", "minimum": 0, "maximum": 1},
            "probabilities": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": len(KEY_STAGES),
                "maxItems": len(KEY_STAGES),
            },
            "text": {"type": "string"},
            "span": {
                "type": "array",
                "items": {"type": "integer"},
                "minItems": 2,
                "maxItems": 2,
            },
            "linguistics_only": {"type": "boolean"},
        },
        "required": [
            "chunk_id",
            "key_stage",
            "confidence",
            "probabilities",
            "text",
            "span",
            "linguistics_only",
        ],
    }
    counts_schema = {
        "type": "object",
        "additionalProperties": {"type": "integer", "minimum": 0},
    }
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "Key Stage analysis report",
        "type": "object",
        "properties": {
            "report_version": {"type": "string", "const": REPORT_VERSION},
            "distribution": {
                "type": "object",
                "properties": stage_properties,
                "required": list(KEY_STAGES),
            },
            "overall_score": {"type": "number", "minimum": 2, "maximum": 5},
            "reading_age": {
                "type": "object",
                "properties": {
                    "stage": {"type": "string", "enum": list(KEY_STAGES)},
                    "age_low": {"type": "integer"},
                    "age_high": {"type": "integer"},
                    "text": {"type": "string"},
                },
                "required": ["stage", "age_low", "age_high", "text"],
            },
            "difficulty_series": {
                "type": "array",
                "items": {
                    "type": "array",
                    "prefixItems": [{"type": "integer"}, {"type": "number"}],
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
            "top_vocabulary": {
                "type": "array",
                "maxItems": 10,
                "items": {
                    "type": "array",
                    "prefixItems": [{"type": "string"}, {"type": "number"}],
                    "minItems": 2,
                    "maxItems": 2,
                },
            },
            "vocabulary_mode": {
                "type": "string",
                "enum": [VOCABULARY_ATTENTION, VOCABULARY_FALLBACK],
            },
            "curriculum": {
                "type": "object",
                "properties": {
                    "ks2": counts_schema,
                    "ks3": counts_schema,
                    "ks4": counts_schema,
                    "ks5": counts_schema,
                },
                "required": ["ks2", "ks3", "ks4", "ks5"],
            },
            "most_complex": chunk_schema,
            "least_complex": chunk_schema,
        },
        "required": [
            "report_version",
            "distribution",
            "overall_score",
            "reading_age",
            "difficulty_series",
            "top_vocabulary",
            "vocabulary_mode",
            "curriculum",
            "most_complex",
            "least_complex",
        ],
    }
