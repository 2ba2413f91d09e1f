"""Exception types raised by the solver and analysis routines."""


class DgscError(Exception):
    """Base class for all package errors."""


class ConvergenceError(DgscError):
    """An iterative root-finder failed to converge."""


class PoleError(DgscError):
    """A rational function was evaluated at (or too near) a pole of g."""


class SolverAbort(DgscError):
    """Time integration produced a non-finite state."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ProjectionError(DgscError):
    """A per-cell projection system could not be solved."""
