"""Exception and warning types shared across the package."""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class DomainError(ValueError):
    """The request is well formed but has no meaningful answer.

    Raised, for example, when asking for the exponent at a rate at or above
    the ergodic capacity.
    """


class NumericalError(ArithmeticError):
    """A numerical procedure failed to reach its accuracy target.

    Parameters
    ----------
    message : str
        Human readable description.
    condition : float, optional
        Condition estimate or achieved tolerance, when one is available.
    """

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class IllConditionedWarning(RuntimeWarning):
    """A determinant was evaluated on a badly conditioned matrix."""
