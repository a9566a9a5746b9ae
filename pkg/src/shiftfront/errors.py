"""Exception types shared across the solvers."""


class SolverError(RuntimeError):
    """A numerical solve failed (non-convergence, breakdown, bracket failure)."""


class ConvergenceError(SolverError):
    def __init__(self, message: str, residual: float = float("nan"), iterations: int = 0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class TrivialBranchError(SolverError):
    """The positive branch was sought but the iteration collapsed onto zero."""


class PreconditionError(ValueError):
    """Inputs are outside the hypotheses of the operation."""
