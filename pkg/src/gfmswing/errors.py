"""Exception types shared across the toolkit."""


class GfmSwingError(Exception):
    """Base class for all toolkit errors."""


class DegenerateCircuit(GfmSwingError):
    """Total series impedance is numerically zero; the loop cannot be solved."""


class InvalidThresholds(GfmSwingError):
    """Current thresholds do not satisfy i_max > i_th > 0."""


class NoConvergence(GfmSwingError):
    """An iterative solve exhausted its budget without meeting tolerance."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class Unreachable(GfmSwingError):
    """Requested current level is never reached over a full swing cycle."""


class AlwaysExceeded(GfmSwingError):
    """Requested current level is exceeded at every power angle."""


class InsufficientHorizon(GfmSwingError):
    """Record does not cover enough post-event time to classify stability."""


class ParseError(GfmSwingError):
    """Scenario file is not valid JSON or is structurally unreadable."""


class ValidationError(GfmSwingError):
    """Scenario content violates an invariant; message lists the violations."""
