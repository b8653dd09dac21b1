"""Exception types shared across the package."""


class VbPoissonError(Exception):
    """Base class for all package-specific failures."""


class IntegrationError(VbPoissonError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the best partial estimate in ``estimate``.
    """

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class DivergenceError(VbPoissonError):
    """The linear predictor ran away (exp overflow); the fit diverged."""


class NumericalError(VbPoissonError):
    """A linear-algebra or expectation update produced an unusable value."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class TruncationError(VbPoissonError):
    """Predictive enumeration hit its cap before accumulating enough mass."""

    def __init__(self, message, accumulated_mass):
        super().__init__(message)
        self.accumulated_mass = accumulated_mass


class GenerationError(VbPoissonError):
    """Synthetic data generation kept producing degenerate Poisson rates."""


class TuningError(VbPoissonError):
    """MCMC step-size adaptation could not reach a workable acceptance rate."""
