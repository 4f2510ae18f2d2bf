class BCCError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(BCCError, ValueError):
    """Invalid run configuration (K > N, bad burn-in, guard violations...)."""


class DataError(BCCError, ValueError):
    """Malformed or unusable input data."""


class DegenerateDistributionError(BCCError, ArithmeticError):
    """A conditional distribution has zero total mass."""
