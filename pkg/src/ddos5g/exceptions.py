"""
Exception hierarchy for the ddos5g package.

Every error raised on purpose by the library derives from ``Ddos5gError`` so
callers (and the CLI) can tell pipeline failures apart from programming bugs.
Input-validation errors are also ``ValueError`` and lookup errors are also
``KeyError``, so generic handlers keep working.
"""

from typing import Iterable, Optional


class Ddos5gError(Exception):
    """Base class for all ddos5g errors."""


# --- table / ingest -------------------------------------------------------


class UnknownColumnError(Ddos5gError, KeyError):
    """A requested column does not exist in the table."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"Unknown column: {name!r}")

    def __str__(self) -> str:
        return str(self.args[0])


class MissingColumnError(UnknownColumnError):
    """A column required by an operation (e.g. stratification) is absent."""


class MissingLabelColumnError(UnknownColumnError):
    """The label column is absent from a table or CSV header."""


class LengthMismatchError(Ddos5gError, ValueError):
    """Two sequences that must be aligned have different lengths."""


class MissingHeaderError(Ddos5gError, ValueError):
    """A CSV file has no header row."""


class SchemaMismatchError(Ddos5gError, ValueError):
    """Tables to be merged do not share the same column sequence."""

    def __init__(self, differing: Iterable[str]):
        self.differing = sorted(set(differing))
        super().__init__(
            "Column sequences differ; mismatched columns: " + ", ".join(self.differing)
        )


class DuplicateColumnError(Ddos5gError, ValueError):
    """A column name appears more than once."""


# --- generation / augmentation ----------------------------------------------


class UnknownLabelProfileError(Ddos5gError, KeyError):
    """A label requested for generation has no ClassProfile."""

    def __str__(self) -> str:
        return str(self.args[0])


class NonPositiveLatencyError(Ddos5gError, ValueError):
    """Latency values must be strictly positive."""


# --- preprocessing / balancing / selection -----------------------------------


class EmptyColumnError(Ddos5gError, ValueError):
    """An operation needs at least one value."""


class EmptyClassError(Ddos5gError, ValueError):
    """A class that must be represented has no rows."""


class NonFiniteFeatureError(Ddos5gError, ValueError):
    """Features contain NaN or infinite values where finite ones are required."""


class NonFiniteInputError(NonFiniteFeatureError):
    """Model or scoring input contains NaN or infinite values."""


class DimensionMismatchError(Ddos5gError, ValueError):
    """Vectors of different dimension were combined."""


class KTooLargeError(Ddos5gError, ValueError):
    """More features were requested than are available."""


class CountTooLargeError(KTooLargeError):
    """RFE was asked to keep more features than it was given."""


# --- models ---------------------------------------------------------------


class UnfittedModelError(Ddos5gError, RuntimeError):
    """A model or tree was used before being fitted."""


class SingleClassError(Ddos5gError, ValueError):
    """Training labels contain fewer than two classes."""


class DegenerateHyperparameterError(Ddos5gError, ValueError):
    """A hyperparameter is outside its valid range."""


class FeatureMismatchError(Ddos5gError, ValueError):
    """Prediction input columns differ from the training projection."""


# --- report -----------------------------------------------------------------


class CodeOutOfRangeError(Ddos5gError, ValueError):
    """A class code is outside ``0..k-1``."""


class EmptyMatrixError(Ddos5gError, ValueError):
    """A confusion matrix with zero total count cannot be scored."""


class EmptyManifestError(Ddos5gError, ValueError):
    """A manifest without any model results cannot be emitted."""


# --- pipeline ---------------------------------------------------------------


class ConfigError(Ddos5gError, ValueError):
    """Invalid pipeline configuration; ``field`` is the dotted path at fault."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class StageError(Ddos5gError):
    """A pipeline stage failed; wraps the original error."""

    def __init__(self, stage: str, cause: Optional[BaseException] = None):
        self.stage = stage
        self.cause = cause
        detail = f": {cause}" if cause is not None else ""
        super().__init__(f"stage '{stage}' failed{detail}")
