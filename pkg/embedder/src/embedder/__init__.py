"""Offline embedding extraction from frozen pretrained transformers."""

from .extract import (
    ChunkEntry,
    ExtractJob,
    ExtractSummary,
    aggregate_attention,
    extract,
    read_chunks,
)

__all__ = [
    "ChunkEntry",
    "ExtractJob",
    "ExtractSummary",
    "aggregate_attention",
    "extract",
    "read_chunks",
]
