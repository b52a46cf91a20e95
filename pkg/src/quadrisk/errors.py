"""Exception hierarchy shared across the package."""


class QuadriskError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(QuadriskError, ValueError):
    """Invalid user-supplied configuration (bad kernel spec, empty data, ...)."""


class DomainError(QuadriskError, ValueError):
    """A data point lies outside the declared sample space."""


class InfeasibleError(QuadriskError, ValueError):
    """The requested computation is impossible at this sample size."""


class FitFailureError(QuadriskError, RuntimeError):
    """All attempts to fit a model degenerated; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DegenerateKernelError(QuadriskError, ValueError):
    """Kernel matrix is identically zero (or otherwise unusable)."""


class DegenerateDataError(QuadriskError, ValueError):
    """Data carries no usable variation (identical points, constant coordinate)."""


class ScoreUnderflowError(QuadriskError, FloatingPointError):
    """Mixture density underflowed at a point; scores are undefined there."""
