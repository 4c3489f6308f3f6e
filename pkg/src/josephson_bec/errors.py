"""Exception types shared across the package."""


class CondensateModelError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CondensateModelError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DivergenceError(DomainError):
    """The requested series or integral diverges."""


class ConvergenceError(CondensateModelError, RuntimeError):
    """An iterative scheme exhausted its budget before converging.

    Carries the best available estimate so callers can inspect how far the
    scheme got before giving up.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class CrossCheckError(CondensateModelError, RuntimeError):
    """Two supposedly equivalent evaluation routes disagree beyond tolerance."""


class DegenerateStateError(CondensateModelError):
    """A quantity is undefined in the requested regime (no condensate)."""


class InconsistentMomentsError(CondensateModelError, ValueError):
    """Second moments passed in cannot come from a single valid state."""


class EmptyLatticeError(DomainError):
    """The energy cutoff excludes every nonzero momentum mode."""
