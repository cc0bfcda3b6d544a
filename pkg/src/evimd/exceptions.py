"""Error types raised across the toolkit.

Everything derives from ValueError (or OSError for file problems) so callers
that don't care about the fine distinction can catch the builtin types.
"""


class EvimdError(ValueError):
    """Base class for toolkit-specific errors."""


class BoundsError(EvimdError):
    """An event coordinate falls outside the declared sensor geometry."""


class OrderingError(EvimdError):
    """Timestamps regress where a non-decreasing stream is required."""


class FormatError(EvimdError):
    """A file does not match the expected container layout."""


class TruncatedFileError(OSError):
    """A binary stream ends mid-record."""


class InsufficientDataError(EvimdError):
    """Too few samples to perform the requested estimate."""


class DegenerateFitError(EvimdError):
    """A regression problem is rank deficient (e.g. all timestamps equal)."""


class CoverageError(EvimdError):
    """A stream queries outside the time range covered by its reference."""


class ConfigError(EvimdError):
    """A configuration value violates its documented constraints."""


class StageError(EvimdError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage, cause):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
