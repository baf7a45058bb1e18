"""Exception hierarchy shared by all confellip modules."""


class ConfEllipError(Exception):
    """Base class for every error raised by the package."""


class NumericalError(ConfEllipError):
    """Failure of a numerical routine (CLI exit code 3)."""


class NotPositiveDefinite(NumericalError):
    """A matrix expected to be SPD failed to factorize.

    Within the conformal layer this almost always means the ridge
    parameter is too small for the sample at hand.
    """


class NoConvergence(NumericalError):
    pass


class NoRoot(NumericalError):
    pass


class DomainError(ConfEllipError, ValueError):
    """An argument lies outside the domain of a function."""


class UnsupportedSmoothness(DomainError):
    pass


class AlphaTooSmall(DomainError):
    """Raised when ``alpha <= 1/(n+1)``; no finite conformal threshold exists."""


class UndefinedMetric(ConfEllipError):
    pass


class DimensionMismatch(ConfEllipError, ValueError):
    pass


class UnsupportedDistribution(ConfEllipError, ValueError):
    pass


class ConfigError(ConfEllipError, ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""
