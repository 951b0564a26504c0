"""Exception types shared across the pipeline."""


class BenchError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(BenchError):
    """An operation received an empty record list or value vector."""


class MissingDataError(BenchError):
    """A matrix or record still contains missing values where none are allowed."""


class MalformedFrame(BenchError):
    """A sensor payload does not match its documented byte layout."""

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class RangeError(BenchError):
    """A decoded channel value lies outside its physical range."""

    def __init__(self, channel, value, low, high):
        super().__init__(f"channel {channel!r} value {value} outside [{low}, {high}]")
        self.channel = channel
        self.value = value


class SourceUnavailable(BenchError):
    """A data source (network endpoint or fixture file) could not be read."""


class DiscardedRecord(BenchError):
    """A behavior event had no associated data from any source and was dropped."""


class InsufficientNeighbors(BenchError):
    """A column has fewer observed rows than the requested neighbor count."""

    def __init__(self, column, observed, k):
        super().__init__(f"column {column!r} has {observed} observed rows, need k={k}")
        self.column = column


class InvalidK(BenchError):
    """Neighbor count must be a positive integer."""


class DegenerateAgreement(BenchError):
    """Chance agreement is 1 with imperfect observed agreement; kappa undefined."""


class InvalidLabels(BenchError):
    """A label vector is constant or otherwise unusable for fitting."""


class NumericError(BenchError):
    """Non-finite values reached a numeric routine."""


class SchemaError(BenchError):
    """Rows do not match the column signature a model was trained on."""


class EmptySelection(BenchError):
    """Feature selection would retain zero columns."""


class StratificationError(BenchError):
    """A class has too few rows for a stratified split."""


class FoldError(BenchError):
    """Fold count exceeds the row count or the smallest class count."""


class DegenerateAnova(BenchError):
    """Zero between-group and zero within-group variance; F undefined."""


class UnbalancedDesign(BenchError):
    """Factorial analysis requires equal replicate counts per cell."""


class DegenerateEffect(BenchError):
    """Effect and error sums of squares are both zero; eta squared undefined."""


class ConfigError(BenchError):
    """A run configuration failed validation."""


class PartialGrid(BenchError):
    """The experiment grid completed with failed cells; results are partial."""
