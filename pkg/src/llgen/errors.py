"""Exception types shared across the package."""


class LLGenError(Exception):
    """Base class for all package errors."""


class ConfigError(LLGenError):
    """Invalid model specification or run configuration."""


class WrongQ(ConfigError):
    pass


class BadParams(ConfigError):
    pass


class DimensionMismatch(LLGenError, ValueError):
    pass


class ResourceGuard(LLGenError):
    """A size guard refused to build an object that would not fit the budget."""


class TooLarge(ResourceGuard):
    pass


class DimensionGuard(ResourceGuard):
    pass


class LightConeClipped(ConfigError):
    pass


class NumericalError(LLGenError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class InsufficientTail(NumericalError):
    pass


class QuadratureFailure(NumericalError):
    pass


class NotSymmetric(NumericalError):
    pass
