"""Exception hierarchy. Everything raised on purpose derives from ExplainMixError."""


class ExplainMixError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ExplainMixError, ValueError):
    """A value is outside the domain of a model parameter or operation."""


class InfeasibleConstraintError(ParameterError):
    """The mean constraint cannot be satisfied: c - (1-a)*mu <= 0."""


class DegenerateModelError(ParameterError):
    """The requested quantity does not exist for this parameter boundary (e.g. a=0)."""


class ValidationError(ExplainMixError, ValueError):
    """Malformed input data (CSV records, JSON documents)."""


class EmptyInputError(ValidationError):
    """An operation that needs at least one record received none."""


class InfeasibleError(ExplainMixError):
    """A fit or clustering problem has no feasible solution for the given input."""


class DegreesOfFreedomError(ExplainMixError, ValueError):
    """Too few histogram bins left to compute a residual standard error."""


class InsufficientDataError(ExplainMixError, ValueError):
    """Not enough data points survive filtering to compute the statistic."""


class CalibrationError(ExplainMixError):
    """Correlation calibration could not reach the target.

    Carries the achievable range so callers can adjust the target.
    """

    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class ConfigError(ExplainMixError, ValueError):
    """A cohort configuration is unsatisfiable or inconsistent."""


class UnknownIdError(ExplainMixError, KeyError):
    """A user or item id does not exist in the cohort."""
