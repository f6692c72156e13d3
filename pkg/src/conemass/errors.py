"""Exception types shared across the package."""


class ConemassError(Exception):
    """Base class for all package errors."""


class HypothesisViolation(ConemassError, ValueError):
    """An input violates a mathematical hypothesis of the formula being evaluated.

    Examples are a critical weight handed to a Green operator or a negative
    Yamabe invariant handed to the boundary condition checker. The CLI maps
    this class to exit code 2.
    """


class UnsupportedError(ConemassError, ValueError):
    """The request is outside what the implementation supports (e.g. a dimension cap)."""


class NumericalError(ConemassError, ArithmeticError):
    """A numerical procedure produced a non-finite value or failed to converge."""


class DivergentIntegralError(NumericalError):
    """An integral that must be finite diverges; the offending exponent is attached."""

    def __init__(self, message: str, exponent: float | None = None):
        super().__init__(message)
        self.exponent = exponent
