"""Exception taxonomy shared across the engine.

Every error the engine raises on purpose derives from :class:`TracemapError`,
so callers (CLI, HTTP layer) can map failures to exit codes / status codes
without string matching.
"""

from __future__ import annotations


class TracemapError(Exception):
    """Base class for all engine errors."""

    #: short machine-readable code, stable across releases
    code = "Internal"


class MalformedExport(TracemapError):
    """An export file is not parseable; carries the offending record index."""

    code = "MalformedExport"

    def __init__(self, message: str, record_index: int | None = None):
        super().__init__(message)
        self.record_index = record_index


class UnsupportedFormat(TracemapError):
    """Export is in a format we deliberately do not parse (e.g. HTML Takeout)."""

    code = "UnsupportedFormat"


class ProviderUnavailable(TracemapError):
    """A remote provider could not be reached after retries, or refused auth."""

    code = "ProviderUnavailable"


class DimensionMismatch(TracemapError):
    """Vectors of inconsistent dimension were mixed in one operation."""

    code = "DimensionMismatch"


class EmptyText(TracemapError):
    """Text had no tokens left after normalization; nothing to embed."""

    code = "EmptyText"


class DegenerateGraph(TracemapError):
    """A neighbor graph cannot be built (fewer than two points)."""

    code = "DegenerateGraph"


class EmptyModel(TracemapError):
    """transform() was called on a reducer with no training data."""

    code = "EmptyModel"


class MissingPosition(TracemapError):
    """A topic member references an event with no layout position."""

    code = "MissingPosition"


class ProviderMismatch(TracemapError):
    """Two datasets were built with different embedding providers or dims."""

    code = "ProviderMismatch"


class ConfigError(TracemapError):
    """Configuration file is invalid (unknown keys, bad types)."""

    code = "ConfigError"


class UnknownDataset(TracemapError):
    code = "UnknownDataset"


class UnknownPoint(TracemapError):
    code = "UnknownPoint"


class UnknownJob(TracemapError):
    code = "UnknownJob"


class BadBBox(TracemapError):
    code = "BadBBox"


class BadWindow(TracemapError):
    code = "BadWindow"


class BadRequest(TracemapError):
    """A request body or query parameter is malformed (non-bbox, non-window)."""

    code = "BadRequest"


class FormatVersionError(TracemapError):
    """A persisted artifact declares a format version we do not understand."""

    code = "FormatVersionError"


class BuildError(TracemapError):
    """Pipeline failure with stage attribution (which stage, which record)."""

    code = "BuildError"

    def __init__(self, stage: str, message: str, record_index: int | None = None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.detail = message
        self.record_index = record_index
