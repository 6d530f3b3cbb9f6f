"""Exception types shared across the package."""


class HadamardRhoError(Exception):
    """Base class for all package errors."""


class DomainError(HadamardRhoError, ValueError):
    """An argument lies outside the domain of the operation."""


class ValidationError(HadamardRhoError, ValueError):
    """A matrix failed an orthogonality check."""


class PreconditionError(HadamardRhoError, ValueError):
    """An input violates a documented precondition."""


class ResourceError(HadamardRhoError, RuntimeError):
    """The request exceeds the configured memory or evaluation budget."""


class BoundViolation(HadamardRhoError, ArithmeticError):
    """A computed value broke an estimate that is supposed to hold."""


class CheckpointError(HadamardRhoError, OSError):
    """A search checkpoint could not be loaded or does not match the run."""


class FormatError(HadamardRhoError, ValueError):
    """Malformed matrix, lambda, or report text."""


class WitnessMismatch(HadamardRhoError, ArithmeticError):
    """A search witness did not re-evaluate to the reported objective."""
