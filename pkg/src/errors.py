"""
Error Hierarchy Module

Typed exceptions raised across the load-stability library. Each class
inherits the matching builtin (ValueError or RuntimeError) so callers that
already catch builtins keep working, and carries the category / exit code the
command-line frontend reports.
"""

from typing import Optional


class LoadStabError(Exception):
    """Base class for every error raised by this package.

    Attributes:
        category (str): One of 'usage', 'data' or 'numeric'
        exit_code (int): Process exit status used by the CLI
    """

    category = "data"
    exit_code = 2


class ParameterError(LoadStabError, ValueError):
    """A parameter is missing, non-finite or outside its allowed range."""

    category = "usage"
    exit_code = 1


class UsageError(ParameterError):
    """Command-line or config-file misuse.

    Args:
        key (str): Offending config key or flag name
        constraint (str): Human-readable constraint that was violated

    Examples:
        >>> err = UsageError("P", "P ∈ [0,1]", "got 1.5")
        >>> str(err)
        'P: P ∈ [0,1] (got 1.5)'
    """

    def __init__(self, key: str, constraint: str, detail: Optional[str] = None):
        self.key = key
        self.constraint = constraint
        message = f"{key}: {constraint}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class ShapeError(LoadStabError, ValueError):
    """Matrix or vector dimensions do not fit the operation."""


class DataError(LoadStabError, ValueError):
    """Input data is malformed: non-finite entries, empty spectra, bad files."""


class DomainError(LoadStabError, ValueError):
    """Inputs are well-formed but outside the mathematical domain of the operation."""


class NumericError(LoadStabError, RuntimeError):
    """A numerical procedure failed to produce a trustworthy result."""

    category = "numeric"
    exit_code = 3


class RootNotFoundError(NumericError):
    """No root of the self-dynamics was found inside the bracket."""


class DivergenceError(NumericError):
    """The integrated state left the region where the vector field is defined.

    Args:
        message (str): Description of the failure
        t (float): Simulation time at which the failure was detected
    """

    def __init__(self, message: str, t: float):
        self.t = t
        super().__init__(f"{message} at t={t:.6g}")


class SingularityError(DivergenceError):
    """A capacity reached the singular set c_j <= tolerance of the capacity system."""


class EstimationError(NumericError):
    """A fitted quantity (e.g. a contraction rate) cannot be estimated from the data."""
