"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: configuration problems exit with 2,
out-of-regime requests with 3 and numerical failures with 4.
"""

from __future__ import annotations


class DDBoundError(Exception):
    """Base class for library errors."""


class ConfigError(DDBoundError, ValueError):
    """Invalid user input or configuration."""

    def __init__(self, message: str, pointer: str = ""):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}" if pointer else message)


class ValidityError(DDBoundError, ValueError):
    """A quantity lies outside the regime where a bound or expansion holds.

    ``margin`` is the signed distance to the regime boundary when known.
    """

    def __init__(self, message: str, margin: float | None = None):
        self.margin = margin
        super().__init__(message)


class NumericInputError(DDBoundError, ValueError):
    """Non-finite or malformed numeric input."""


class NumericFailure(DDBoundError, ArithmeticError):
    """A numerical procedure failed (no bracket, ill-conditioning, ...)."""


class BranchCutError(NumericFailure):
    """Matrix logarithm requested for a unitary with an eigenvalue near -1."""


class DimensionError(DDBoundError, ValueError):
    """Operands with incompatible dimensions."""


class NotScalableError(ValidityError):
    """Noise strength at or above the accuracy threshold.

    ``side`` names the failing argument: ``"unprotected"`` or ``"protected"``.
    """

    def __init__(self, message: str, side: str):
        self.side = side
        super().__init__(message)


class NotRepresentableError(ConfigError):
    """A schedule cannot be described by +-1 switching functions."""
