"""Exception taxonomy shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration: bad dimensions, sizes, or parameter ranges."""


class DataError(ValueError):
    """Invalid data: empty candidate sets, missing annotations, label range."""


class FormatError(ValueError):
    """Malformed file: wrong magic, truncation, missing columns."""


class NumericError(FloatingPointError):
    """Non-finite values where finite ones are required."""


class RequestError(ValueError):
    """A request that cannot be served, e.g. querying more samples than exist."""
