"""Exception types shared across the package."""


class QlabError(Exception):
    """Base class for all package errors."""


class GridMismatchError(QlabError):
    """Two grid functions live on different grids."""


class NyquistError(QlabError):
    """Requested frequency content does not fit on the grid."""


class BackendError(QlabError):
    """Operator backend cannot represent the requested fields."""


class ConvergenceError(QlabError):
    """Iterative solve did not reach the requested tolerance.

    Carries the residuals observed at the iteration cap so callers can
    report them.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class WindowOverflowError(QlabError):
    """Spectral window holds more eigenvalues than the caller allowed."""

    def __init__(self, message, estimated_count=None):
        super().__init__(message)
        self.estimated_count = estimated_count


class NormalizationError(QlabError):
    """Metric/potential pair violates a normalization condition."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CoverageError(QlabError):
    """Greedy ball cover left part of the unit ball uncovered."""
