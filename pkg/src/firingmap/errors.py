"""Exception types shared across the package."""


class FiringMapError(Exception):
    """Base class for all errors raised by this package."""


class IllPosedError(FiringMapError):
    """The firing map is not guaranteed to be defined for every start time."""


class NoConvergenceError(FiringMapError):
    """A root finder exhausted its iteration budget (indicates a bug, not math)."""


class NotDifferentiableError(FiringMapError):
    """The firing-map derivative formula is invalid at the requested point."""


class InsufficientDataError(FiringMapError):
    """A sequence is too short for the requested classification."""


class LockedError(FiringMapError):
    """The system appears phase locked; a unique invariant measure is unavailable."""


class RationalRotationError(FiringMapError):
    """Locking was detected where an irrational rotation number is required."""


class CriticalValueError(FiringMapError):
    """A query value coincides with a critical value of the displacement function."""
