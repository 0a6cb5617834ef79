"""Exception types shared across the package."""


class UavnetError(Exception):
    """Base class for all package-specific errors."""


class GeometryError(UavnetError):
    """Specular-reflection geometry has no valid solution (e.g. endpoint
    beyond the radio horizon, or zero ground separation)."""


class DomainError(UavnetError):
    """An argument is outside the mathematical domain of the operation."""


class QuadratureError(UavnetError):
    """Numeric integration could not meet its tolerance within the
    configured evaluation budget."""


class UnsupportedFading(UavnetError):
    """The requested fading model has no analytic form for this operation."""


class EmptyRealization(UavnetError):
    """A point-process draw produced zero points."""


class DegenerateDistance(UavnetError):
    """A sampled point coincides with the receiver (zero distance)."""


class SequenceError(UavnetError):
    """Packet sequence numbers are not strictly increasing."""


class ConfigError(UavnetError):
    """Experiment configuration is invalid or out of allowed range."""


class IoError(UavnetError):
    """File could not be read or written."""


class EmptyResult(UavnetError):
    """No rows were produced, nothing to write."""
