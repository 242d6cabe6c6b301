"""Exception hierarchy shared by every sknaflow module.

Every error carries the operation that raised it (``"module.operation"``)
so the CLI can emit a single structured message.
"""


class SknaflowError(Exception):
    """Base class for all sknaflow errors.

    Parameters
    ----------
    operation : str
        Dotted origin of the failure, e.g. ``"ingest.load_recording"``.
    detail : str
        Human-readable description naming the offending input.
    """

    def __init__(self, operation: str, detail: str):
        self.operation = operation
        self.detail = detail
        super().__init__(f"{operation}: {detail}")


class ParseError(SknaflowError):
    """A file could not be parsed (malformed header, bad row)."""


class FormatError(SknaflowError):
    """File parsed but violates a structural requirement."""


class DataError(SknaflowError):
    """Sample data is invalid (NaN, Inf, empty channel)."""


class SchemaError(SknaflowError):
    """Tabular rows do not share a single key set."""


class ValidationError(SknaflowError):
    """Annotations or config values violate an invariant."""


class UnsupportedRatioError(SknaflowError):
    """Resampling ratio cannot be expressed with a small denominator."""


class FilterDesignError(SknaflowError):
    """Requested filter order is too small for the transition band."""


class SignalLengthError(SknaflowError):
    """Signal is too short for the requested operation."""


class ParameterError(SknaflowError):
    """An operation parameter is out of its valid range."""


class DegenerateSignalError(SknaflowError):
    """Signal has zero variance where variance is required."""


class DegenerateRocError(SknaflowError):
    """ROC analysis requested with an empty score class."""


class InsufficientDataError(SknaflowError):
    """Too few complete rows or columns for a reliability estimate."""


class WindowError(SknaflowError):
    """A segment is shorter than its analysis window."""


class ConfigError(SknaflowError):
    """Run configuration is invalid or references missing files."""


class SynthSpecError(SknaflowError):
    """Synthetic-recording spec is inconsistent (e.g. overlapping bursts)."""
