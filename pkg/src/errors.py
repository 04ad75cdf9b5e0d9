"""
Exception hierarchy for the meshing kernel.

Input errors map to CLI exit code 1, invariant violations to exit code 2.
"""

from typing import Optional


class PolymeshError(Exception):
    """Base class for every error raised by the kernel."""

    exit_code = 1


class ParseError(PolymeshError):
    """Malformed input file.

    Args:
        message: What went wrong
        location: Line number (text formats) or byte offset (binary STL)
    """

    def __init__(self, message: str, location: Optional[str] = None):
        self.message = message
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class UnsupportedFormat(PolymeshError):
    """File extension or --format value not recognized."""


class EmptyInput(PolymeshError):
    """No usable triangle left after conditioning."""


class DegenerateInput(PolymeshError):
    """Input points span no volume (coplanar, collinear, or too few)."""


class InvariantViolation(PolymeshError):
    """A structural invariant of the pipeline does not hold."""

    exit_code = 2


class InternalWalkStall(InvariantViolation):
    """The constraint edge walk could not advance."""


class NoWitnessVertex(InvariantViolation):
    """No input vertex is off the plane of a boundary constraint."""
