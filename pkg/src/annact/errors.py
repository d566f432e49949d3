"""Exception types shared across the library."""


class AnnactError(Exception):
    """Base class for library errors."""


class NonConvergentError(AnnactError):
    """A quadrature, Birkhoff average or Newton refinement failed to reach
    the requested tolerance within its budget.

    Carries the best estimate and the last observed increment so callers can
    decide whether to degrade gracefully.
    """

    def __init__(self, message, value=None, increment=None):
        super().__init__(message)
        self.value = value
        self.increment = increment


class DegenerateGapError(AnnactError):
    """The action gap is zero (or not positive), so no period threshold exists."""


class ConfigError(AnnactError):
    """Invalid experiment configuration (schema violation or bad field value)."""
