"""Exception hierarchy shared by all estimators and the harness."""


class EvidenceError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(EvidenceError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateDataError(InvalidInputError):
    """The data cannot support the requested computation (e.g. zero variance)."""


class GuardError(EvidenceError):
    """A brute-force or factorial-cost computation was refused as too large."""


class DegenerateEstimateError(EvidenceError):
    """A Monte Carlo quantity collapsed to zero or infinity."""


class InsufficientOccupancyError(DegenerateEstimateError):
    """The reference partition was not visited often enough by the chain."""


class ConvergenceError(EvidenceError):
    """An iterative scheme failed to converge.

    ``trace`` carries whatever history the caller found useful
    (iterates, temperatures, endpoint estimates).
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace if trace is not None else []


class DegeneracyError(ConvergenceError):
    """Particle system collapsed (effective sample size below 2)."""


class BracketError(ConvergenceError):
    """Root bracketing failed for the reverse logistic regression objective."""


class DatasetError(EvidenceError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigError(EvidenceError, ValueError):
    """A run configuration failed validation."""
