"""Typed errors shared across the package."""


class CocycleLabError(Exception):
    """Base class for declared, recoverable errors."""


class NotInvertible(CocycleLabError):
    """Backward iteration requested on a non-invertible system."""


class CapExceeded(CocycleLabError):
    """No return to the target set within the declared cap.

    Signals either non-recurrence at this horizon or a too-small cap;
    the cap is carried so callers can report it.
    """

    def __init__(self, cap: int, message: str | None = None):
        self.cap = cap
        super().__init__(message or f"no return within cap={cap}")


class MissingCheckpoint(CocycleLabError):
    """Identity check requested at a step that is not on the checkpoint grid."""


class MismatchError(CocycleLabError):
    """Two independent computations of the same quantity disagree."""


class NotPositiveDefinite(CocycleLabError):
    """Covariance matrix is not symmetric positive definite."""


class ConfigInvalid(CocycleLabError):
    """Configuration rejected before running; names the offending field."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
