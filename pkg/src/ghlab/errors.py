"""Exception types shared across the package."""


class GHLabError(Exception):
    """Base class for all package errors."""


class InvalidModelError(GHLabError, ValueError):
    """Spectral model parameters are outside their admissible range."""


class InconsistentKernelError(GHLabError, ValueError):
    """Declared kernel dimension exceeds the number of stored eigenvalues."""


class UnsupportedOrderError(GHLabError, ValueError):
    """Requested derivative order exceeds what the representation supports."""


class InvalidSupportError(GHLabError, ValueError):
    """Cutoff support/plateau intervals are not properly nested."""


class NumericsError(GHLabError, ArithmeticError):
    """A numeric routine hit a non-finite value or failed to converge."""

    def __init__(self, message, abscissa=None):
        super().__init__(message)
        self.abscissa = abscissa


class OverflowDespiteRescalingError(NumericsError):
    """Log-space rescaling could not keep an exponential in range."""

    def __init__(self, message, exponent):
        super().__init__(message)
        self.exponent = exponent


class ResonanceError(GHLabError, ValueError):
    """A mode divisor vanishes, so the periodic solution is not unique."""

    def __init__(self, message, lam=None, frequency=None):
        super().__init__(message)
        self.lam = lam
        self.frequency = frequency


class FieldSolveError(GHLabError, RuntimeError):
    """One or more modes of a field solve failed."""

    def __init__(self, message, failures):
        super().__init__(message)
        # list of (j, exception)
        self.failures = failures


class PrecisionError(GHLabError, ValueError):
    """Working precision is insufficient for the requested certificate."""

    def __init__(self, message, required_digits=None):
        super().__init__(message)
        self.required_digits = required_digits


class VerificationError(GHLabError, RuntimeError):
    """A verification check failed (used by CLI exit-code mapping)."""


class ConfigError(GHLabError, ValueError):
    """Experiment configuration is malformed."""

    def __init__(self, message, pointer=None):
        super().__init__(message)
        self.pointer = pointer
