"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ConvergenceError(RuntimeError):
    """An iteration hit its cap before meeting the stopping rule.

    ``history`` holds the residual sequence observed so far; ``last`` is its
    final entry (``nan`` when no step completed).
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)
        self.last = self.history[-1] if self.history else float("nan")


class PrecisionError(ArithmeticError):
    """A finite-resolution construction could not be resolved."""
