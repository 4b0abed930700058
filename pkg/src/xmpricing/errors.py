"""Semantic exception hierarchy shared by all modules."""


class XmpError(Exception):
    """Base error for this package."""


class InvalidParameterError(XmpError, ValueError):
    """A constructor or operation parameter violates its contract."""


class InvalidInputError(XmpError, ValueError):
    """Runtime input (data, dimensions, shapes) violates its contract."""


class UndefinedValuationError(XmpError, ArithmeticError):
    """Virtual valuation requested where the noise density vanishes."""


class NoRootError(XmpError, ArithmeticError):
    """Root bracketing exceeded its hard width cap; map is not invertible."""


class SequencingError(XmpError, RuntimeError):
    """Observation fed to a policy out of time order."""
