"""Exception hierarchy shared by every module."""


class SemiHilbertError(Exception):
    """Base class for all errors raised by :mod:`semihilbert`."""


class DimensionMismatch(SemiHilbertError, ValueError):
    pass


class NotSquare(DimensionMismatch):
    pass


class NotHermitian(SemiHilbertError, ValueError):
    pass


class NotPSD(SemiHilbertError, ValueError):
    pass


class ZeroMetric(SemiHilbertError, ValueError):
    pass


class NoConvergence(SemiHilbertError, ArithmeticError):
    pass


class NotAMember(SemiHilbertError, ValueError):
    """T does not map N(A) into N(A), so it has no A^{1/2}-adjoint."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class NotInvertible(SemiHilbertError, ValueError):
    pass


class NotCommuting(SemiHilbertError, ValueError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class MetricMismatch(SemiHilbertError, ValueError):
    pass


class TooLarge(SemiHilbertError, ValueError):
    pass


class CostGuard(TooLarge):
    pass


class Overflow(SemiHilbertError, ArithmeticError):
    pass


class TriangularizationFailed(SemiHilbertError, ArithmeticError):
    pass


class UnknownExample(SemiHilbertError, KeyError):
    pass


class TooSmall(SemiHilbertError, ValueError):
    pass


class ZeroOperatorWarning(UserWarning):
    """Emitted when a reduced minimum modulus is requested for T with zero T-diamond."""
