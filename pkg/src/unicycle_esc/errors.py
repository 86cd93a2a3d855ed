"""Exception types shared across the package."""


class RejectedInputError(ValueError):
    """An argument violates an operation's precondition."""


class UnsupportedOracleError(NotImplementedError):
    """The field has no analytic gradient."""


class ConfigError(ValueError):
    """A scenario configuration is missing a key or violates a constraint."""


class FilterNumericalError(ArithmeticError):
    """The estimator hit a non-positive innovation variance."""


class DivergenceError(RuntimeError):
    """The closed loop left the finite workspace.

    The last trajectory record written before the failure is kept on
    ``last_record`` for diagnostics.
    """

    def __init__(self, message, last_record=None):
        super().__init__(message)
        self.last_record = last_record
