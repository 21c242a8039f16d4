"""Exception types shared across the package."""


class StreamLofError(Exception):
    """Base class for all streamlof errors."""


class InputError(StreamLofError, ValueError):
    """Rejected input: wrong shape, non-finite values, malformed files."""


class ConfigError(StreamLofError, ValueError):
    """Invalid configuration value or schema violation."""


class InsufficientPointsError(StreamLofError, ValueError):
    """Too few training points for the requested neighbourhood size."""


class InvalidStateError(StreamLofError, RuntimeError):
    """Operation not legal in the pipeline's current phase."""
