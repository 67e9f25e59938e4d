"""Exception taxonomy and process exit codes shared across the package."""

# Stable CLI exit-code contract.
EXIT_OK = 0
EXIT_IO = 2
EXIT_INVALID_INPUT = 3
EXIT_NUMERICAL = 4


class SpreadwaveError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SpreadwaveError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class NoSolutionError(DomainError):
    """The requested inversion has no solution (e.g. spread below its minimum)."""


class InsufficientDataError(SpreadwaveError):
    """A statistical operation received fewer samples than it needs."""


class InputFormatError(SpreadwaveError):
    """A data file or config is malformed, has wrong columns, or fails validation."""


class FitConvergenceError(SpreadwaveError):
    """A fit failed to converge; carries the best-so-far result for diagnostics."""

    def __init__(self, message: str, best_so_far=None):
        super().__init__(message)
        self.best_so_far = best_so_far
