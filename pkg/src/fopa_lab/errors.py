"""Exception hierarchy for fopa_lab.

Validation problems raise subclasses of :class:`FopaValueError`; numerical
failures (non-converging series, quadrature budget exhausted) raise
subclasses of :class:`FopaNumericalError`.  The CLI maps the former to exit
code 1 and the latter to exit code 2.
"""


class FopaError(Exception):
    """Base class for all fopa_lab errors."""


class FopaValueError(FopaError, ValueError):
    """Invalid input, configuration, or precondition violation."""


class FopaNumericalError(FopaError, ArithmeticError):
    """A numerical procedure failed to reach its target accuracy."""


class OutOfRange(FopaValueError):
    """Query outside the tabulated or physical domain."""


class InvalidProfile(FopaValueError):
    """Raman profile table violates a construction invariant."""


class NonPositiveDetuning(FopaValueError):
    """Operation requires a strictly positive detuning."""


class ZeroInput(FopaValueError):
    """Signal input with zero total power where power is required."""


class DegenerateExtremum(FopaValueError):
    """Optimum is undefined because the discriminating magnitude vanishes."""


class LossyFiberUnsupported(FopaValueError):
    """Squeezing formulas are restricted to lossless fiber."""


class NoConvergence(FopaNumericalError):
    """Series truncation rule did not fire within the term budget."""


class QuadratureFailure(FopaNumericalError):
    """Adaptive quadrature could not meet the tolerance within budget."""


class ParseError(FopaValueError):
    """Config file could not be parsed."""


class ValidationError(FopaValueError):
    """Config parsed but violates an invariant."""
