"""UK Key Stage label set and helpers.

The engine classifies text into KS2..KS5. KS1 exists only as the output of
the Lexile mapping for very easy material; it is not a training label.
"""

from __future__ import annotations

from .errors import ValidationError

ALL_STAGES: tuple[str, ...] = ("KS1", "KS2", "KS3", "KS4", "KS5")

# Classifier label order. Index in this tuple is the class index everywhere.
KEY_STAGES: tuple[str, ...] = ("KS2", "KS3", "KS4", "KS5")

# Typical pupil age span per classifiable stage, inclusive years.
STAGE_AGE_RANGES: dict[str, tuple[int, int]] = {
    "KS2": (7, 11),
    "KS3": (11, 14),
    "KS4": (14, 16),
    "KS5": (16, 18),
}


def stage_value(stage: str) -> int:
    """Numeric value of a stage label: 'KS3' -> 3."""
    if stage not in ALL_STAGES:
        raise ValidationError(f"unknown key stage label: {stage!r}")
    return int(stage[2:])


def stage_index(stage: str) -> int:
    """Class index of a classifiable stage within KEY_STAGES."""
    try:
        return KEY_STAGES.index(stage)
    except ValueError:
        raise ValidationError(
            f"stage {stage!r} is not a classifier label; expected one of {KEY_STAGES}"
        ) from None
