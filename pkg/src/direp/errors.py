"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ConvergenceError(ArithmeticError):
    """An iterative or adaptive procedure failed to meet its tolerance.

    Attributes
    ----------
    estimate : float or None
        Best value reached before giving up, when one exists.
    error : float or None
        Error estimate attached to ``estimate``.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class PartitionError(ValueError):
    """Index groups that do not form a partition of the categories."""


class ModeUndefinedError(ValueError):
    """The Dirichlet has no interior mode (some concentration <= 1)."""
