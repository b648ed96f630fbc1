"""End-to-end orchestration from raw text to the educator report.

Glues the stages together: sentence-aligned chunking, linguistic feature
extraction, per-chunk classification through a unimodal network or a
fused model, whole-document curriculum counting, and report assembly.
Chunk identifiers are content-addressed (position plus a text digest) so
externally computed embeddings can be joined back deterministically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .ann import MlpModel, forward, load_model
from .config import EngineConfig
from .curriculum import (
    CurriculumLexicon,
    count_curriculum_features,
    load_curriculum_lexicon,
)
from .errors import DegenerateInputError, ResourceError, ValidationError
from .features import FEATURE_SCHEMA_VERSION, extract_features
from .fusion import (
    EmbeddingRecord,
    FusedModel,
    load_embeddings,
    load_fused_model,
    predict_chunk,
)
from .lexicons import Resources, default_resources, tag_pos
from .report import (
    AnalysisReport,
    ChunkResult,
    assemble_report,
    chunk_result_to_dict,
    report_to_dict,
)
from .stages import KEY_STAGES
from .textseg import SegmentedText, chunk_document, segment_text

__all__ = [
    "AnalysisOutcome",
    "DocumentChunk",
    "analysis_to_dict",
    "analyze_text",
    "chunk_identifier",
    "classify_chunks",
    "document_chunks",
    "load_any_model",
    "load_engine_artifacts",
    "write_chunks_jsonl",
]


def chunk_identifier(index: int, text: str) -> str:
    """Stable chunk id: zero-padded position plus a digest of the text."""
    digest = hashlib.sha1(text.encode("utf-8")).hexdigest()[:10]
    return f"{index:05d}-{digest}"


@dataclass(frozen=True)
class DocumentChunk:
    """One classified unit of the document, with its source geometry."""

    chunk_id: str
    text: str
    span: tuple[int, int]
    token_count: int
    oversized: bool
    # Kept so feature extraction does not re-tokenize the slice.
    segmented: SegmentedText


def document_chunks(text: str, token_budget: int = 512) -> tuple[DocumentChunk, ...]:
    """Chunk a document and assign content-addressed identifiers."""
    if token_budget < 1:
        raise ValidationError(f"token_budget must be positive, got {token_budget}")
    chunks = chunk_document(text, token_budget)
    if not chunks:
        raise DegenerateInputError("text contains no tokens to analyze")
    out = []
    for chunk in chunks:
        lo, hi = chunk.segmented.source_span
        piece = text[lo:hi]
        out.append(
            DocumentChunk(
                chunk_id=chunk_identifier(chunk.index, piece),
                text=piece,
                span=(lo, hi),
                token_count=chunk.token_count,
                oversized=chunk.oversized,
                segmented=chunk.segmented,
            )
        )
    return tuple(out)


def write_chunks_jsonl(chunks: Sequence[DocumentChunk], path: str | Path) -> None:
    """Emit chunk id + text records, the input contract of the embedder."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for chunk in chunks:
            fh.write(
                json.dumps(
                    {
                        "chunk_id": chunk.chunk_id,
                        "text": chunk.text,
                        "span": list(chunk.span),
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_any_model(path: str | Path) -> MlpModel | FusedModel:
    """Load a model file, dispatching on its embedded kind marker."""
    path = Path(path)
    if not path.is_file():
        raise ResourceError(f"model file not found at {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model file {path} is not valid JSON: {exc}") from exc
    kind = doc.get("kind")
    if kind == "mlp":
        return load_model(path)
    if kind == "fused":
        return load_fused_model(path)
    raise ValidationError(f"unknown model kind {kind!r} in {path}")


def _chunk_vector(chunk: DocumentChunk, resources: Resources) -> np.ndarray:
    return np.asarray(
        extract_features(chunk.segmented, resources).values, dtype=np.float64
    )


def classify_chunks(
    model: MlpModel | FusedModel,
    chunks: Sequence[DocumentChunk],
    resources: Resources,
    embeddings: Mapping[str, EmbeddingRecord] | None = None,
    linguistics_only: bool = False,
    allow_fallback: bool = True,
) -> tuple[ChunkResult, ...]:
    """Classify every chunk into a Key Stage.

    With a fused model, each chunk's embedding is looked up by id;
    missing embeddings fall back to the linguistic branch alone (flagged
    per chunk) unless allow_fallback is off, in which case they raise.
    linguistics_only forces the fallback for every chunk. Unimodal
    models never set the flag: nothing was skipped.
    """
    results = []
    for chunk in chunks:
        vector = _chunk_vector(chunk, resources)
        if isinstance(model, FusedModel):
            record = None
            if not linguistics_only and embeddings is not None:
                record = embeddings.get(chunk.chunk_id)
            flag = linguistics_only or (record is None and allow_fallback)
            prediction = predict_chunk(model, vector, record, linguistics_only=flag)
            stage = prediction.key_stage
            confidence = prediction.confidence
            probabilities = prediction.probabilities
            flagged = prediction.linguistics_only
        else:
            probabilities = tuple(float(p) for p in forward(model, vector))
            index = int(np.argmax(probabilities))
            stage = KEY_STAGES[index]
            confidence = probabilities[index]
            flagged = False
        results.append(
            ChunkResult(
                chunk_id=chunk.chunk_id,
                key_stage=stage,
                confidence=confidence,
                probabilities=probabilities,
                text=chunk.text,
                span=chunk.span,
                linguistics_only=flagged,
            )
        )
    return tuple(results)


@dataclass(frozen=True)
class AnalysisOutcome:
    """Full result of one analysis: the report plus every chunk verdict."""

    report: AnalysisReport
    chunks: tuple[ChunkResult, ...]


def analyze_text(
    text: str,
    model: MlpModel | FusedModel,
    resources: Resources | None = None,
    curriculum_lexicon: CurriculumLexicon | None = None,
    embeddings: Mapping[str, EmbeddingRecord] | None = None,
    token_budget: int = 512,
    vocabulary: frozenset[str] | None = None,
    linguistics_only: bool = False,
    allow_fallback: bool = True,
) -> AnalysisOutcome:
    """Run the whole pipeline over one document.

    Curriculum counting runs over the full document, not per chunk, so
    detectors that need sentence context never see chunk seams. The
    vocabulary for the key-word ranking defaults to the bundled common
    and academic word lists.
    """
    if resources is None:
        resources = default_resources()
    if curriculum_lexicon is None:
        curriculum_lexicon = load_curriculum_lexicon()
    chunks = document_chunks(text, token_budget)
    results = classify_chunks(
        model,
        chunks,
        resources,
        embeddings=embeddings,
        linguistics_only=linguistics_only,
        allow_fallback=allow_fallback,
    )
    seg = segment_text(text)
    counts = count_curriculum_features(
        seg, tag_pos(seg), curriculum_lexicon, resources.gazetteers
    )
    if vocabulary is None:
        vocabulary = frozenset(
            resources.common_words.entries | resources.academic_words.entries
        )
    report = assemble_report(results, counts, vocabulary, embeddings)
    return AnalysisOutcome(report=report, chunks=results)


def analysis_to_dict(outcome: AnalysisOutcome) -> dict:
    """JSON-ready body: versions, the report, and per-chunk predictions."""
    return {
        "engine_version": __version__,
        "feature_schema_version": FEATURE_SCHEMA_VERSION,
        "report": report_to_dict(outcome.report),
        "chunks": [chunk_result_to_dict(result) for result in outcome.chunks],
    }


def load_engine_artifacts(
    config: EngineConfig,
) -> tuple[MlpModel | FusedModel | None, dict[str, EmbeddingRecord] | None]:
    """Load the model and optional embeddings a config points at."""
    model = None
    embeddings = None
    if config.model_path is not None:
        model = load_any_model(config.model_path)
    if config.embeddings_path is not None:
        embeddings = load_embeddings(config.embeddings_path)
    return model, embeddings
