"""Key Stage classification engine for English literary text.

Segments documents into sentence-aligned chunks, extracts an 80-dimensional
linguistic feature vector per chunk, classifies each chunk into UK Key
Stages KS2..KS5 with a small feed-forward network (optionally fused with
transformer embeddings), and aggregates chunk predictions into a document
report with curriculum-alignment evidence.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    DegenerateInputError,
    DimensionError,
    EngineError,
    ResourceError,
    ValidationError,
)
from .stages import ALL_STAGES, KEY_STAGES, STAGE_AGE_RANGES, stage_index, stage_value

__all__ = [
    "__version__",
    "EngineError",
    "ValidationError",
    "ResourceError",
    "DegenerateInputError",
    "DimensionError",
    "ALL_STAGES",
    "KEY_STAGES",
    "STAGE_AGE_RANGES",
    "stage_value",
    "stage_index",
]
