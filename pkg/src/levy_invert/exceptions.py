"""Exception types raised by the toolkit."""


class LevyError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(LevyError, ValueError):
    """Invalid input: malformed spec, out-of-range parameter, bad measure."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
        self.msg = message


class DivergenceError(LevyError):
    """An integral that was required to be finite diverges."""


class QuadratureError(LevyError):
    """Adaptive quadrature did not reach the requested tolerance.

    Attributes
    ----------
    estimate : float or complex
        Best estimate at the point of giving up.
    error : float
        Error estimate actually achieved.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(f"{message} (estimate={estimate!r}, achieved error={error!r})")
        self.estimate = estimate
        self.error = error


class MomentClassError(ValidationError):
    """The measure is not in the required moment class; names the divergent integral."""


class UnsupportedError(LevyError):
    """The requested combination is valid mathematically but not supported."""
