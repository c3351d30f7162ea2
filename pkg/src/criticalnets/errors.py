"""Exception hierarchy shared by all modules."""


class CriticalNetsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CriticalNetsError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(CriticalNetsError, ArithmeticError):
    """An iteration failed to converge within its budget.

    ``last`` holds the final iterates so callers can inspect how far off
    the iteration was.
    """

    def __init__(self, message, last=()):
        super().__init__(message)
        self.last = tuple(last)


class DivergenceError(ConvergenceError):
    """An iterated quantity grew past its ceiling (e.g. q for ReLU above criticality)."""


class PreconditionError(CriticalNetsError, ValueError):
    """The requested quantity does not exist for these inputs."""
