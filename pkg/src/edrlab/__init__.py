"""Simulation of generalized qubit measurements and error-disturbance relations."""

from edrlab.errors import (
    ConfigError,
    DimensionError,
    EdrLabError,
    InputError,
    NumericalInvariantError,
    OutputError,
    PreconditionError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "EdrLabError",
    "InputError",
    "NumericalInvariantError",
    "OutputError",
    "PreconditionError",
    "__version__",
]
