"""Exception types raised across the package."""


class DomainError(ValueError):
    """Arguments outside the region where an operation is defined."""


class SeriesBudgetExceeded(ArithmeticError):
    """A power series did not converge within its term budget."""

    def __init__(self, message, partial_sum, last_term):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.last_term = last_term


class BesselOverflowError(OverflowError):
    """The value does not fit in a double; use the log-scaled variant."""


class PrecisionLossError(ArithmeticError):
    """Cancellation destroyed more accuracy than the caller tolerates."""

    def __init__(self, message, estimated_rel_error):
        super().__init__(message)
        self.estimated_rel_error = estimated_rel_error


class QuadratureFailure(ArithmeticError):
    """Adaptive integration could not reach the requested tolerance."""

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class CatastrophicSubtraction(ArithmeticError):
    """A difference of two nearly equal terms lost all significance."""

    def __init__(self, message, minuend, subtrahend):
        super().__init__(message)
        self.minuend = minuend
        self.subtrahend = subtrahend


class BudgetExceeded(RuntimeError):
    """A Monte Carlo run would exceed the configured work budget."""
