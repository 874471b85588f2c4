"""Shared exception types.

Every validation failure raises a subclass of :class:`CyclosError` so the CLI
can map them onto its exit-code contract (1 = validation error, 2 = failed
property check).
"""


class CyclosError(ValueError):
    """Base class for all package-specific errors."""


class MalformedChainError(CyclosError):
    """A chain references simplices that do not exist in the complex."""


class ClosureError(CyclosError):
    """An operation requiring a closed chain/loop/path received an open one."""


class UnwrapError(CyclosError):
    """Phase samples too sparse to unwrap unambiguously (gap >= pi)."""


class WindowError(CyclosError):
    """Invalid coincidence window."""


class MonotonicityError(CyclosError):
    """Inputs violate a required nesting/ordering (filtrations, deltas)."""


class FiltrationError(CyclosError):
    """A filtration step appears before one of its faces."""


class FeasibilityError(CyclosError):
    """A path intersects an obstacle interior."""


class SamplingError(CyclosError):
    """Numerical residual too large; input sampled too coarsely."""


class CompositionError(CyclosError):
    """Consecutive moves do not share endpoints."""


class PreconditionError(CyclosError):
    """A documented operation precondition does not hold."""


class ConfigError(CyclosError):
    """Inconsistent network/route/accumulator configuration."""


class TableError(CyclosError):
    """A feature descriptor is missing from the model table."""


class NoPeakError(CyclosError):
    """Accumulator contains no votes; argmax undefined."""


class DivergenceError(CyclosError):
    """Numerical integration left the finite range."""


class InsufficientDataError(CyclosError):
    """Not enough section crossings to analyse a trajectory."""
