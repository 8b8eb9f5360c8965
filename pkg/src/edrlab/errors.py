"""Exception hierarchy shared by every module."""


class EdrLabError(Exception):
    """Base class for all edrlab errors."""


class InputError(EdrLabError, ValueError):
    """A caller supplied an argument outside the documented domain."""


class DimensionError(InputError):
    """Operand shapes are incompatible."""


class PreconditionError(InputError):
    """A numerical precondition (Hermiticity, positivity, ...) does not hold.

    ``residual`` carries the measured violation when one is available.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConfigError(EdrLabError, ValueError):
    """Invalid sweep configuration or unknown name."""


class NumericalInvariantError(EdrLabError, ArithmeticError):
    """An internal numerical consistency check failed."""


class OutputError(EdrLabError, OSError):
    """A result table could not be written."""
