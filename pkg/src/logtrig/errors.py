"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class LogTrigError(ArithmeticError):
    """Base class for all errors raised by this package."""


class InvalidPrecisionError(LogTrigError, ValueError):
    pass


class NonFiniteInputError(LogTrigError, ValueError):
    pass


class DomainError(LogTrigError, ValueError):
    pass


class InvalidParameterError(LogTrigError, ValueError):
    pass


class NearSingularProductError(LogTrigError):
    """A product factor is too close to zero for the residual contract to hold."""

    def __init__(self, n: int, factor, threshold):
        self.n = n
        self.factor = factor
        self.threshold = threshold
        super().__init__(
            f"factor n={n} has magnitude {float(abs(factor)):.3e} "
            f"below threshold {float(threshold):.3e}"
        )


class NoConvergenceError(LogTrigError):
    """Quadrature hit its level cap; carries the best value seen so far."""

    def __init__(self, value, error_estimate, level: int):
        self.value = value
        self.error_estimate = error_estimate
        self.level = level
        super().__init__(
            f"no convergence after level {level}: value={value} "
            f"estimate={float(error_estimate):.3e}"
        )


class BadIntegrandError(LogTrigError):
    def __init__(self, x, result=None):
        self.x = x
        self.result = result
        super().__init__(f"integrand is not finite at interior point x={x}")


class InvalidSplitError(LogTrigError, ValueError):
    pass
