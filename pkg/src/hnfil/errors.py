"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: invalid input -> 2, resource bound -> 3.
Failed mathematical checks are reported as values, never raised.
"""


class HNError(Exception):
    """Base class for all library errors."""


class InvalidInputError(HNError, ValueError):
    """Input violates a documented precondition or schema."""

    def __init__(self, message, pointer=None):
        super().__init__(message)
        self.pointer = pointer

    def __str__(self):
        msg = super().__str__()
        return f"{self.pointer}: {msg}" if self.pointer else msg


class DomainError(InvalidInputError):
    """Evaluation outside the domain of a polygon."""


class UndefinedSlopeError(HNError, ArithmeticError):
    """Slope of the zero object requested."""


class ResourceBoundError(HNError):
    """A configured size bound (enumeration, bit size, horizon) was hit."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
