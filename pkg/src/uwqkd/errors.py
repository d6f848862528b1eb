"""Exception types shared across the package.

The CLI maps each class onto its own exit status, so library code raises the
most specific type that applies.
"""


class UwqkdError(Exception):
    """Base class for all errors raised by uwqkd."""


class DomainError(UwqkdError, ValueError):
    """An argument lies outside the domain of the model."""


class DegenerateInputError(UwqkdError, ZeroDivisionError):
    """A ratio was requested whose denominator is exactly zero."""


class CompletenessError(UwqkdError, ValueError):
    """A Kraus set fails sum_j K_j^dagger K_j = I within tolerance."""


class InvalidStateError(UwqkdError, ValueError):
    """A matrix is not a valid two-qubit density matrix."""


class NoCrossingError(UwqkdError):
    """The QBER never reaches the requested threshold inside the search bracket."""

    def __init__(self, message: str, bracket: tuple[float, float] | None = None):
        super().__init__(message)
        self.bracket = bracket


class NoiseWarning(UserWarning):
    """Per-pulse noise probability is not small (y0 >= 1)."""
