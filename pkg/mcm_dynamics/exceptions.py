"""
Exception hierarchy.

Every error carries a human-readable ``detail`` and the process ``exit_code``
the command line reports for it, so commands map failures in one place.
"""

from typing import Any, Optional


class MCMError(Exception):
    """Base class for all package errors."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


# I/O and parse failures (exit 1)

class DataIOError(MCMError):
    """A file could not be read or written."""


class DataParseError(MCMError):
    """A cell of an input file could not be parsed."""

    def __init__(self, detail: str, row: Optional[int] = None, column: Optional[str] = None):
        super().__init__(detail)
        self.row = row
        self.column = column


class LPFormatError(DataParseError):
    """Malformed plain-text LP file."""


class InternalInvariantError(MCMError):
    """A condition that cannot fail for valid inputs failed anyway."""


# Invalid input (exit 2)

class InvalidInputError(MCMError):
    exit_code = 2


class DimensionMismatchError(InvalidInputError):
    """Vector or matrix shapes do not agree."""


class LayoutMismatchError(DimensionMismatchError):
    """A solution vector does not match the classifier variable layout."""


class InvalidDatasetError(InvalidInputError):
    """Dataset unusable for training (single class, NaN features, too few rows)."""


class LabelError(InvalidDatasetError):
    """Labels outside {-1, +1}."""


class InvalidParameterError(InvalidInputError):
    """A numeric parameter is outside its admissible range."""


class ProblemTooLargeError(InvalidInputError):
    """Instance exceeds what an exhaustive method is allowed to handle."""


class UndefinedResultError(InvalidInputError):
    """A derived metric is undefined for the given inputs."""


class SolverError(InvalidInputError):
    """The LP has no optimal solution."""


class InfeasibleError(SolverError):
    """No point satisfies the constraints; ``row`` is the most violated one."""

    def __init__(self, detail: str, row: Optional[int] = None, violation: float = 0.0):
        super().__init__(detail)
        self.row = row
        self.violation = violation


class UnboundedError(SolverError):
    """Objective improves without limit along ``ray``."""

    def __init__(self, detail: str, ray: Any = None):
        super().__init__(detail)
        self.ray = ray


# Non-convergence (exit 3)

class DivergenceError(MCMError):
    """The integrated state became non-finite."""

    exit_code = 3

    def __init__(self, detail: str, last_state: Any = None, t: float = 0.0):
        super().__init__(detail)
        self.last_state = last_state
        self.t = t


NON_CONVERGENCE_EXIT_CODE = 3

# The backend value disagrees with the GLOP cross-check
CROSS_CHECK_MISMATCH_EXIT_CODE = 4
