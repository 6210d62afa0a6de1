"""Exception hierarchy shared across the package.

Validation errors cover bad inputs and violated preconditions; numeric
errors cover iterative procedures that failed to converge. The CLI maps
these to distinct exit codes.
"""


class RedBlueError(Exception):
    pass


class SpecError(RedBlueError, ValueError):
    """Invalid input: bad parameters, malformed specs, violated preconditions."""


class PreconditionError(SpecError):
    """An operation's stated precondition does not hold for this input."""


class NumericError(RedBlueError, RuntimeError):
    """A numerical procedure failed (non-convergence, singularity, overflow)."""


class RootFindingError(NumericError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class NewtonError(NumericError):
    pass


class ConvergenceError(NumericError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BranchLostError(NumericError):
    """A tracked solution branch disappeared during parameter continuation."""


class SimulationError(RedBlueError, RuntimeError):
    """Internal inconsistency detected while growing a graph."""
