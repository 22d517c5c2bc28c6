"""Exception hierarchy shared by all modules."""


class RandFlightError(Exception):
    """Base class for package errors."""


class InvalidParameterError(RandFlightError, ValueError):
    pass


class InvalidDimensionError(InvalidParameterError):
    pass


class UnsupportedModelError(InvalidParameterError):
    pass


class DomainError(RandFlightError, ValueError):
    """Argument outside the support where a quantity is defined."""


class InsufficientSamplesError(RandFlightError):
    """A Monte Carlo estimate observed no events where a positive count is required."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class InfeasibleExperimentError(RandFlightError):
    """Predicted event probability is too small for plain Monte Carlo."""

    def __init__(self, message, suggested_t_max=None):
        super().__init__(message)
        self.suggested_t_max = suggested_t_max
