"""Frozen-transformer embedding extraction over engine chunk files.

Reads the engine's chunk JSON-Lines (chunk_id, text), runs a pretrained
encoder in eval mode with gradients disabled, and writes one embedding
record per chunk in the JSON-Lines format the engine's fusion loader
ingests: chunk_id, vector, attention, logits, model, dim.

The attention field reduces the model's attention tensors to one weight
per surface word: mean over layers and heads of the attention each
sub-word receives, summed over query positions, then summed over the
sub-words of a word. Sub-words map back to surface spans through the
fast tokenizer's offset mapping, grouped by its word ids, so the engine
can rank vocabulary without knowing the model's tokenization.

Logits require a sequence-classification head with one label per key
stage. Checkpoints without such a head get one initialized under a
fixed torch seed, so re-runs stay identical, but those logits carry no
trained signal and downstream use defaults to the pooled vector.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

N_STAGES = 4
_HEAD_SEED = 0


class EmbedderError(Exception):
    """Base for extraction failures reported without a traceback."""


class InputError(EmbedderError):
    """Malformed chunk file or unusable job parameters."""


@dataclass(frozen=True)
class ChunkEntry:
    chunk_id: str
    text: str


@dataclass(frozen=True)
class ExtractJob:
    model: str
    input_path: str
    output_path: str
    attention: bool = False
    logits: bool = False
    batch_size: int = 8

    def __post_init__(self):
        if self.batch_size < 1:
            raise InputError(f"batch size must be positive, got {self.batch_size}")


@dataclass(frozen=True)
class ExtractSummary:
    records: int
    dim: int
    model: str
    truncated: tuple[str, ...]


def read_chunks(path: str | Path) -> list[ChunkEntry]:
    """Parse an engine chunk file; ids must be unique and texts non-empty."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"chunk file not found at {path}")
    entries: list[ChunkEntry] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise InputError(f"line {line_no}: invalid JSON: {exc}") from exc
            if not isinstance(doc, dict):
                raise InputError(f"line {line_no}: chunk must be a JSON object")
            chunk_id = doc.get("chunk_id")
            text = doc.get("text")
            if not isinstance(chunk_id, str) or not chunk_id:
                raise InputError(f"line {line_no}: chunk_id must be a non-empty string")
            if not isinstance(text, str) or not text.strip():
                raise InputError(f"line {line_no}: text must be a non-empty string")
            if chunk_id in seen:
                raise InputError(f"line {line_no}: duplicate chunk_id {chunk_id!r}")
            seen.add(chunk_id)
            entries.append(ChunkEntry(chunk_id=chunk_id, text=text))
    if not entries:
        raise InputError(f"chunk file {path} contains no chunks")
    return entries


def aggregate_attention(layers: np.ndarray) -> np.ndarray:
    """Reduce (layers, heads, query, key) attention to one weight per token.

    Returns, for each key position j, the mean over layers and heads of
    the attention j receives, summed over query positions. Pass tensors
    already sliced to real (non-padding) positions on both axes.
    """
    layers = np.asarray(layers, dtype=np.float64)
    if layers.ndim != 4 or layers.shape[2] != layers.shape[3]:
        raise InputError(f"attention stack has shape {layers.shape}, "
                         "expected (layers, heads, seq, seq)")
    return layers.mean(axis=(0, 1)).sum(axis=0)


def _merge_subwords(
    received: np.ndarray,
    word_ids: Sequence[int | None],
    offsets: Sequence[tuple[int, int]],
    text: str,
) -> list[dict]:
    """Sum sub-word weights into surface-word spans, in appearance order.

    Special tokens carry no word id and are dropped; every kept span is
    reconstructed from the offset mapping so token == text[start:end].
    """
    spans: list[dict] = []
    by_word: dict[int, dict] = {}
    for position, word_id in enumerate(word_ids):
        if word_id is None:
            continue
        start, end = int(offsets[position][0]), int(offsets[position][1])
        if end <= start:
            continue
        entry = by_word.get(word_id)
        if entry is None:
            entry = {"start": start, "end": end, "weight": 0.0}
            by_word[word_id] = entry
            spans.append(entry)
        else:
            entry["start"] = min(entry["start"], start)
            entry["end"] = max(entry["end"], end)
        entry["weight"] += float(received[position])
    for entry in spans:
        entry["token"] = text[entry["start"]:entry["end"]]
    return [
        {"token": e["token"], "start": e["start"], "end": e["end"],
         "weight": e["weight"]}
        for e in spans
    ]


def _context_limit(model, tokenizer) -> int | None:
    """Usable max sequence length, or None when nothing sane is declared."""
    declared = getattr(model.config, "max_position_embeddings", None)
    if isinstance(declared, int) and 0 < declared < 1_000_000:
        return declared
    declared = getattr(tokenizer, "model_max_length", None)
    if isinstance(declared, int) and 0 < declared < 1_000_000:
        return declared
    return None


def _load(job: ExtractJob):
    # Imported here so --help and input validation stay fast.
    import torch
    from transformers import AutoModel, AutoModelForSequenceClassification, AutoTokenizer
    from transformers.utils import logging as hf_logging

    # The extractor owns all progress reporting; library bars and notices
    # would otherwise leak onto stderr even under --quiet.
    hf_logging.disable_progress_bar()
    hf_logging.set_verbosity_error()

    tokenizer = AutoTokenizer.from_pretrained(job.model)
    if not getattr(tokenizer, "is_fast", False):
        raise InputError(
            f"model {job.model!r} has no fast tokenizer; offset mapping "
            "for attention alignment requires one"
        )
    kwargs = {}
    if job.attention:
        # sdpa/flash kernels cannot return attention matrices
        kwargs["attn_implementation"] = "eager"
    if job.logits:
        torch.manual_seed(_HEAD_SEED)
        model = AutoModelForSequenceClassification.from_pretrained(
            job.model, num_labels=N_STAGES, **kwargs
        )
    else:
        model = AutoModel.from_pretrained(job.model, **kwargs)
    model.eval()
    model.requires_grad_(False)
    return tokenizer, model


def extract(job: ExtractJob, progress=None) -> ExtractSummary:
    """Run the full job and write the output file; returns a summary.

    progress, when given, is called with one status string per event.
    """
    import torch

    def note(message: str) -> None:
        if progress is not None:
            progress(message)

    chunks = read_chunks(job.input_path)
    tokenizer, model = _load(job)
    dim = int(model.config.hidden_size)
    limit = _context_limit(model, tokenizer)
    note(f"loaded {job.model} (hidden size {dim}, context {limit or 'unbounded'})")

    truncated: list[str] = []
    records: list[dict] = []
    for lo in range(0, len(chunks), job.batch_size):
        batch = chunks[lo:lo + job.batch_size]
        texts = [c.text for c in batch]
        enc = tokenizer(
            texts,
            return_tensors="pt",
            padding=True,
            truncation=limit is not None,
            max_length=limit,
            return_offsets_mapping=job.attention,
        )
        offsets = enc.pop("offset_mapping", None)
        with torch.no_grad():
            out = model(
                **enc,
                output_attentions=job.attention,
                output_hidden_states=job.logits,
            )
        hidden = out.hidden_states[-1] if job.logits else out.last_hidden_state
        mask = enc["attention_mask"]
        for i, chunk in enumerate(batch):
            n = int(mask[i].sum())
            if limit is not None and n == limit:
                plain = tokenizer(chunk.text, return_tensors=None)
                if len(plain["input_ids"]) > limit:
                    truncated.append(chunk.chunk_id)
            vector = hidden[i, :n].mean(dim=0).double().numpy()
            record = {
                "chunk_id": chunk.chunk_id,
                "vector": vector.tolist(),
                "attention": None,
                "logits": None,
                "model": job.model,
                "dim": dim,
            }
            if job.attention:
                stack = np.stack(
                    [layer[i, :, :n, :n].double().numpy() for layer in out.attentions]
                )
                received = aggregate_attention(stack)
                record["attention"] = _merge_subwords(
                    received, enc.word_ids(i)[:n], offsets[i][:n], chunk.text
                )
            if job.logits:
                record["logits"] = [float(v) for v in out.logits[i]]
            records.append(record)
        note(f"embedded {min(lo + job.batch_size, len(chunks))}/{len(chunks)} chunks")

    out_path = Path(job.output_path)
    with out_path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    for chunk_id in truncated:
        note(f"warning: chunk {chunk_id!r} exceeded the model context and was truncated")
    note(f"wrote {len(records)} records to {out_path}")
    return ExtractSummary(
        records=len(records), dim=dim, model=job.model, truncated=tuple(truncated)
    )
