"""Exception types raised by the package."""


class PtsError(Exception):
    """Base class for all package errors."""


class InputSizeError(PtsError, ValueError):
    """An array argument has the wrong length or shape."""


class DegenerateInputError(PtsError, ValueError):
    """The input has no power (all-zero signal)."""


class ConfigurationError(PtsError, ValueError):
    """Invalid parameter combination."""


class BudgetError(PtsError):
    """Exhaustive search would exceed the candidate budget."""


class PreconditionError(PtsError, ValueError):
    """An argument violates a documented precondition."""


class LambdaSolverError(PtsError, RuntimeError):
    """The temperature equation could not be solved."""
