"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli_app.EXIT_CODES).
"""


class SdnError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SdnError, ValueError):
    """An argument or data structure violates a documented precondition."""


class FormatError(SdnError, ValueError):
    """A file does not conform to its expected on-disk format."""


class DegenerateDataError(ValidationError):
    """Training data admits no valid shape parameters (e.g. coincident
    points with opposite labels)."""


class ConvergenceError(SdnError, RuntimeError):
    """The dual optimizer stopped making progress before reaching the
    requested KKT tolerance.  Carries the final violation magnitude."""

    def __init__(self, message: str, violation: float):
        super().__init__(message)
        self.violation = violation


class EmptySkeletonError(ValidationError):
    """A skeleton threshold removed every similarity domain."""
