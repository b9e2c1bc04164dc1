"""Exception hierarchy for the caplet-pricing library.

Every error raised by this package derives from QouError, so callers can
catch the whole family with one clause.  Validation problems (bad arguments,
bad configs) derive from both QouError and ValueError; numerical failures
carry enough context in their message to locate the offending node, time, or
bound.
"""


class QouError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(QouError, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(ArgumentError):
    """An experiment configuration file is malformed or inconsistent."""


class DomainOverflowError(QouError):
    """A horizon is so large that the coefficient functions overflow."""


class SingularityError(QouError):
    """A closed-form coefficient denominator is numerically zero."""


class DivergenceError(QouError):
    """A numerical ODE solve produced a non-finite state."""


class ConsistencyError(QouError):
    """An internal cross-check failed (imaginary residue, bound violation)."""


class NonPositiveForwardError(QouError):
    """The forward-rate transform argument was non-positive."""


class ContourError(QouError):
    """A transform evaluation was requested off the admissible contour."""


class QuadratureError(QouError):
    """A numerical integration failed to converge or sanity-check."""


class ArbitrageBoundsError(QouError):
    """A price lies outside its static no-arbitrage bounds."""


class ConvergenceError(QouError):
    """An iterative root search exhausted its iteration budget."""


class DegenerateDiffusionError(QouError):
    """The leading-order implied volatility is zero or negative."""
