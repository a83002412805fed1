"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CoposetError(Exception):
    """Base class for every error raised by the package."""


class InputError(CoposetError, ValueError):
    """Malformed input: wrong shape, non-finite entries, bad parameters."""


class PremiseError(CoposetError, ValueError):
    """A mathematical precondition of an operation does not hold."""


class NumericalAlarm(CoposetError, ArithmeticError):
    """A result landed inside a tolerance band where no decision is safe."""


class ConvergenceError(NumericalAlarm):
    """An iterative routine hit its iteration cap."""
