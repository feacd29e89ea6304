"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures (nonconvergence, regime violations, accuracy loss,
blow-up) with 3, and failed validation checks with 1.
"""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class AccuracyError(RuntimeError):
    """A quadrature or interpolation error estimate exceeded its tolerance."""


class RegimeError(RuntimeError):
    """State left the regime where the scheme's a-priori bounds hold.

    Usually means the time horizon is too long for the given data; the
    message says which bound tripped.
    """


class AdmissibilityError(ValueError):
    """A shock lost entropy admissibility (nonpositive strength)."""


class NonconvergenceError(RuntimeError):
    """An iteration hit its cap before meeting tolerance.

    Carries the iteration report so callers can inspect measured ratios.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(ValueError):
    """A scenario configuration failed validation."""
