"""Exception hierarchy shared by all qcorr modules."""

from __future__ import annotations


class QCorrError(Exception):
    """Base class for every error raised by qcorr."""


class FormatError(QCorrError, ValueError):
    """A state, channel or config document does not follow the file layout."""


class DimensionError(QCorrError, ValueError):
    """Shapes or declared subsystem dimensions do not fit together."""


class StateValidationError(QCorrError, ValueError):
    """A matrix failed one or more density-matrix invariants.

    ``violations`` holds the :class:`qcorr.qstate.Violation` records that
    triggered the error.
    """

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class ChannelValidationError(QCorrError, ValueError):
    """A Kraus set is not trace preserving within tolerance."""


class CompletePositivityError(ChannelValidationError):
    """A channel construction produced a Choi matrix with a negative eigenvalue."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class NumericalConsistencyError(QCorrError, ArithmeticError):
    """Two independent evaluations of the same quantity disagree."""


class SingularityError(QCorrError, ArithmeticError):
    """An inverse was requested on a subspace where it does not exist."""


class UnsupportedInstanceError(QCorrError, ValueError):
    """The inputs are valid states but the requested check is undefined for them."""


class OptimizationFailure(QCorrError, RuntimeError):
    """The measurement optimizer returned a value outside its admissible range."""
