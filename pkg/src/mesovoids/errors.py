"""Exception hierarchy.

The CLI maps each family onto a process exit code, so new error types
should subclass one of the three bases below.
"""

from __future__ import annotations


class InputError(ValueError):
    """Invalid parameters, geometry or file contents (exit code 2)."""


class ParameterError(InputError):
    """Lamé parameters or other scalar inputs outside their admissible domain."""


class GeometryError(InputError):
    """Points or voids in an inadmissible position."""


class SingularityError(GeometryError):
    """A kernel was evaluated at coincident points."""


class GateError(ValueError):
    """The smallness constraint eps < c*d (or a capacity limit) is violated (exit code 3)."""


class CapacityError(GateError):
    """Random placement could not fit the requested number of voids."""


class NumericalError(ArithmeticError):
    """A linear solve or iteration failed (exit code 4)."""


class ConvergenceError(NumericalError):
    """An iterative method did not reach its tolerance."""
