"""Exception hierarchy shared by all solver layers."""


class CasimirError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CasimirError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class FunctionOverflowError(CasimirError, OverflowError):
    """A special-function value exceeds the double-precision range."""


class BesselOverflowError(FunctionOverflowError):
    """A Bessel value exceeds the double-precision range.

    Kept distinct from :class:`DomainError` so callers can fall back to the
    logarithmic interfaces instead of treating the input as invalid.
    """


class PrecisionLossError(CasimirError, ArithmeticError):
    """Cancellation destroyed more significant digits than allowed."""


class ExtrapolationError(CasimirError, ValueError):
    """A tabulated response function was queried outside its table."""


class UnsupportedFeatureError(CasimirError, NotImplementedError):
    """The requested object or configuration has no implementation."""


class SingularRoundTripError(CasimirError, ArithmeticError):
    """``I - N`` is singular or has a non-positive determinant.

    At finite separation this cannot happen physically, so it points at an
    assembly bug or a badly truncated matrix.
    """


class ConvergenceError(CasimirError, RuntimeError):
    """Quadrature, Matsubara sum or truncation failed to converge.

    Attributes
    ----------
    estimates : tuple of float
        The last estimates obtained before giving up (oldest first).
    """

    def __init__(self, message, estimates=()):
        super().__init__(message)
        self.estimates = tuple(estimates)


class NoisyStencilError(CasimirError, ArithmeticError):
    """Finite-difference signal is below the noise floor of the energy."""
