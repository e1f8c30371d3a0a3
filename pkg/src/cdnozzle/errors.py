"""Exception hierarchy shared across the solver.

Exit-code mapping used by the CLI: ConfigError -> 2, ClosureError and
ExitRangeError -> 3, IterationError -> 4, ConsistencyError -> 5.
"""


class SolverError(Exception):
    """Base class for all solver failures."""


class ConfigError(SolverError):
    """Invalid configuration or physically inadmissible problem data."""


class ClosureError(SolverError):
    """No subsonic density root (sonic crossing or data too far from background)."""

    def __init__(self, message, sonic_residual=None):
        super().__init__(message)
        self.sonic_residual = sonic_residual


class ExitRangeError(SolverError):
    """Stream-function value at the exit left the span of the exit-angle data."""


class IterationError(SolverError):
    """Fixed-point or outer iteration failed to converge."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class ConsistencyError(SolverError):
    """Internal consistency check failed (assembly, residual, geometry mismatch)."""
