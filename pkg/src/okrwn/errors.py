"""Exception hierarchy shared by every okrwn module."""


class OkrwnError(Exception):
    """Base class; the CLI maps it to exit code 1."""


class ExtRealError(OkrwnError, ArithmeticError):
    """Mixed-sign infinities met in an addition."""


class GridError(OkrwnError, ValueError):
    pass


class InvariantError(OkrwnError, ValueError):
    """A domain object violates one of its declared invariants."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class DegenerateBodyError(OkrwnError, ValueError):
    pass


class DivergenceError(OkrwnError, ArithmeticError):
    """An integral is infinite (e.g. the shift sits on the gradient-image boundary)."""


class QuadratureError(OkrwnError, ArithmeticError):
    pass


class UnsupportedError(OkrwnError, NotImplementedError):
    pass


class ConditioningWarning(UserWarning):
    """Condition number above the guard; results are degraded, not regularized."""
