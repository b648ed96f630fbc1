"""Exception hierarchy shared by every module in the package.

All engine errors derive from EngineError so callers can catch one type at
the boundary (CLI, HTTP service) and map it to an exit code or status.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(EngineError):
    """Input data violates a documented precondition or format."""


class ResourceError(EngineError):
    """A required file, directory, or bundled resource is missing or unreadable."""


class DegenerateInputError(ValidationError):
    """Text too small or empty for the requested statistic to be defined."""


class DimensionError(ValidationError):
    """Array shapes disagree with a model's declared dimensions."""
