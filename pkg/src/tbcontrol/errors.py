"""Exception types shared across the package."""


class TbControlError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(TbControlError):
    """An argument violates a documented precondition."""


class ConfigError(TbControlError):
    """A configuration file or override string could not be interpreted."""


class DivergenceError(TbControlError):
    """An integration produced a non-finite value.

    The failing grid step is recorded so callers can locate the blow-up.
    """

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class NumericalError(TbControlError):
    """A numerical routine failed to produce a usable result."""
