"""Exception hierarchy shared by all modules."""


class NormforgeError(Exception):
    """Base class for all errors raised by normforge."""


class DimensionMismatchError(NormforgeError, ValueError):
    pass


class CapExceededError(NormforgeError):
    """Vertex enumeration requested above the configured dimension cap."""


class InvalidNormError(NormforgeError, ValueError):
    """A boundary does not define a norm (rank deficit, dominated element, ...)."""


class LevelingError(NormforgeError, ValueError):
    pass
