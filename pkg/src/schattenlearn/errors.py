"""Exception types raised by schattenlearn."""


class SchattenError(Exception):
    """Base class for all library errors."""


class InvalidInputError(SchattenError, ValueError):
    pass


class ShapeError(SchattenError, ValueError):
    pass


class UnsupportedOrderError(SchattenError, ValueError):
    """Raised for norm orders below 1 (quasi-norms are not supported)."""


class ConvergenceError(SchattenError, RuntimeError):
    pass


class ConfigError(SchattenError, ValueError):
    pass
