"""Exception taxonomy shared across modules.

The CLI maps DomainError and friends to exit code 1; anything argparse
rejects is exit code 2. The service maps them to 4xx statuses.
"""


class QsurfError(Exception):
    """Base class for all package errors."""


class DomainError(QsurfError):
    """An argument is outside its mathematical domain (alpha, level, ...)."""


class ConfigurationError(QsurfError):
    """Unsupported or inconsistent configuration (grid scheme, memory cap)."""


class ParseError(QsurfError):
    """A dataset or config file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class CapabilityError(QsurfError):
    """The model has no analytic oracle for the requested quantity."""


class EstimationError(QsurfError):
    """A data-driven estimate degenerated (ties, too-small bandwidth)."""


class NoAdmissibleBandError(DomainError):
    """No band of the requested width fits inside the admissible range."""


class NumericalError(QsurfError):
    """A numerical routine failed beyond its tolerance (factorization)."""
