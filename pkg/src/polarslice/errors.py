"""Semantic exception hierarchy.

Public functions never raise bare ValueError/RuntimeError; every failure mode
a caller may want to catch has its own class rooted at PolarSliceError.
"""


class PolarSliceError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PolarSliceError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class NonFiniteError(PolarSliceError, ArithmeticError):
    """A quantity that must be finite evaluated to nan/inf."""


class OriginError(DomainError):
    """The origin was passed to an operation whose density has a pole there."""


class OutOfSupportError(DomainError):
    """A point outside the target's support was used as a chain state."""


class EmptySliceError(PolarSliceError):
    """The threshold is at or above the supremum of the slice factor."""


class RejectionBudgetError(PolarSliceError, RuntimeError):
    """Rejection sampling exceeded its proposal budget."""


class DegeneratePairError(PolarSliceError, ValueError):
    """A coupling ratio was requested for a pair with x == y."""


class UnsupportedFamilyError(PolarSliceError, TypeError):
    """The operation is not defined for this target family."""


class NotAvailableError(PolarSliceError):
    """The requested quantity has no implemented form for this family."""


class NotInLambdaKError(PolarSliceError):
    """A level-set function failed the concavity-class membership check."""


class HypothesisError(PolarSliceError, ValueError):
    """A formula was requested outside the hypotheses under which it holds."""


class SeriesTooShortError(PolarSliceError, ValueError):
    """The series is too short for the requested estimator."""


class DegenerateSeriesError(PolarSliceError):
    """The series has zero variance; autocorrelations are undefined."""


class ConfigError(PolarSliceError):
    """An experiment configuration is missing keys or has invalid values."""
