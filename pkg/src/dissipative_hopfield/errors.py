"""Exception types raised by the package."""


class HopfieldError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameter(HopfieldError, ValueError):
    """A model parameter is outside its physical domain."""


class NonPositiveOmega(InvalidParameter):
    pass


class NegativeCoupling(InvalidParameter):
    pass


class NonFinite(InvalidParameter):
    pass


class UnresolvedFrequency(HopfieldError, ValueError):
    """A sampled profile is too coarse to resolve the requested frequency."""


class PoleAtResonance(HopfieldError, ZeroDivisionError):
    """The lossless permittivity was evaluated exactly on its real pole."""


class DegenerateMode(HopfieldError, ValueError):
    """The k = 0 lower band has zero frequency and no normal-mode basis."""


class ZeroFrequencyMode(HopfieldError, ValueError):
    pass


class QuadratureNotConverged(HopfieldError, RuntimeError):
    """Raised when a cutoff-dependent integral fails the doubling test."""


class DivergentYield(HopfieldError, ArithmeticError):
    """The un-linearized lower-band yield diverges without a k cutoff."""


class StepSizeUnderflow(HopfieldError, RuntimeError):
    pass


class NonFiniteState(HopfieldError, FloatingPointError):
    pass


class UnconvergedKappaGrid(HopfieldError, RuntimeError):
    pass


class CFLViolation(HopfieldError, ValueError):
    pass


class ReflectionDetected(HopfieldError, RuntimeError):
    pass


class NoPeaksFound(HopfieldError, LookupError):
    pass


class SchemaViolation(HopfieldError, ValueError):
    """Config validation failure; ``pointer`` is a JSON pointer to the offending node."""

    def __init__(self, pointer, message):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
        self.message = message
