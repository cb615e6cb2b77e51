import json

from loguru import logger
from pydantic import ValidationError


class LabError(Exception):
    """Base class of all errors raised by the laboratory."""


class InvalidParameterError(LabError, ValueError):
    """An argument is outside the range an operation accepts."""


class DomainError(InvalidParameterError):
    """A point lies outside the domain where an operation is defined."""


class PreconditionError(InvalidParameterError):
    """A sample set violates the precondition of a check."""


class DegenerateParameterError(InvalidParameterError):
    """The parameter makes the requested quantity degenerate (λ = 0 for c_λ)."""


class OutsideDomainError(LabError):
    """The Neumann series of the resolvent diverges."""


class SpectrumHitError(LabError):
    """The restricted resolvent system is singular: 1/λ is an eigenvalue."""


class DependentBasisError(LabError):
    """The generators of a subspace are numerically dependent."""


class InvarianceError(LabError):
    """The span of the generators is not invariant under L."""


class NotInSubspaceError(LabError):
    """A function is not a member of the subspace it is used with."""


class UndefinedRatioError(LabError, ValueError):
    """A relative quantity was requested for the zero function."""


class ToleranceError(LabError):
    """A post-condition residual exceeded its declared budget."""


class DescriptorError(LabError):
    """A JSON descriptor could not be turned into a domain object."""


class CheckFailed(LabError):
    """A requested check did not pass."""

    def __init__(self, names: list[str]) -> None:
        self.names = names
        super().__init__(f"Failed checks: {', '.join(names)}")


def input_error_handler(exc: Exception) -> int:
    """Handle unreadable or invalid input."""
    if isinstance(exc, ValidationError):
        details = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        logger.error(f"Invalid descriptor: {details}")
    elif isinstance(exc, json.JSONDecodeError):
        logger.error(f"Malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}")
    elif isinstance(exc, FileNotFoundError):
        logger.error(f"Input file not found: {exc.filename}")
    else:
        logger.error(f"Invalid input: {exc}")
    return 2


def check_failed_handler(exc: CheckFailed) -> int:
    """Handle checks that ran but did not pass."""
    logger.error(str(exc))
    return 1


def lab_error_handler(exc: LabError) -> int:
    """Handle numerical errors raised while running a command."""
    logger.error(f"{type(exc).__name__}: {exc}")
    return 1


def internal_error_handler(exc: Exception) -> int:
    """Handle unexpected errors."""
    logger.opt(exception=exc).error("Oops! Something went seriously wrong.")
    return 1
