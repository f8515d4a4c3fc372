"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition (shape, Hermiticity, normalization...)."""


class CapacityError(InvalidInputError):
    """Requested block or system is larger than the supported size."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    Attributes
    ----------
    residual : float
        Best residual norm reached before giving up.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
