"""
Exception hierarchy for orthoseries.

Precondition violations derive from ValueError, numerical breakdowns from
ArithmeticError, so callers can catch either the project base class or the
builtin family.
"""

from typing import Optional


class OrthoSeriesError(Exception):
    """Base class for all orthoseries errors."""


class DomainError(OrthoSeriesError, ValueError):
    """An argument lies outside the domain of the operation."""


class DescriptorError(DomainError):
    """A weight or function descriptor string could not be parsed."""


class DegreeRangeError(DomainError):
    """A requested degree is outside the range of a built table."""


class BVConstructionError(DomainError):
    """Breakpoints or pieces of a bounded-variation function are inconsistent."""


class NumericError(OrthoSeriesError, ArithmeticError):
    """A numerical procedure failed to deliver a trustworthy result."""


class SolverError(NumericError):
    """Root bracketing or an eigen-solver did not converge."""


class PrecisionExhaustedError(NumericError):
    """
    A recurrence step lost positivity (B[k]^2 <= 0) in binary64.
    """

    def __init__(self, degree: int, message: Optional[str] = None):
        self.degree = degree
        super().__init__(message or f"precision exhausted at degree {degree}: "
                                    f"recurrence coefficient lost positivity")
