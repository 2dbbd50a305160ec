"""Exception hierarchy.

Every error carries a ``details`` mapping with the offending values so the
command-line front end can echo them as JSON.
"""


class LatticeHarmError(Exception):
    """Base class for all library errors."""

    exit_code = 2

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_json(self):
        return {"error": type(self).__name__, "message": str(self), "details": self.details}


class ValidationError(LatticeHarmError, ValueError):
    """Input violates a precondition (exit code 2)."""


class NumericalError(LatticeHarmError, ArithmeticError):
    """A numerical tolerance or stability check failed (exit code 3)."""

    exit_code = 3


class SingularBasis(ValidationError):
    pass


class IllConditioned(ValidationError):
    pass


class RadiusTooLarge(ValidationError):
    pass


class NyquistViolation(ValidationError):
    pass


class LatticeMismatch(ValidationError):
    pass


class InsufficientSupport(ValidationError):
    pass


class DegenerateFit(ValidationError):
    pass


class ZeroSeries(ValidationError):
    pass


class NotModerate(ValidationError):
    pass


class TailTooLarge(NumericalError):
    pass


class BackwardBlowup(NumericalError):
    pass


class ToleranceFailure(NumericalError):
    """A verification identity did not hold to the requested tolerance."""
