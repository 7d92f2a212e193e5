"""Exception hierarchy shared across the package."""


class HazSyncError(Exception):
    """Base class for all package-specific errors."""


class NoCommonMarkers(HazSyncError):
    """Device and reference marker streams share no sequence numbers."""


class InsufficientMarkers(HazSyncError):
    """Fewer than two marker pairs available for a clock fit."""


class DegenerateFit(HazSyncError):
    """Clock fit is ill-posed (all device times equal, or scale <= 0)."""


class MissingModel(HazSyncError):
    """A stream has no clock model to map it onto the reference timeline."""


class OutOfRange(HazSyncError):
    """Interpolation requested outside the sampled time range."""


class PlacementInfeasible(HazSyncError):
    """Hazard placement could not satisfy the separation constraints."""


class InvalidPlan(HazSyncError):
    """Session plan (or plan/profile combination) violates its invariants."""


class NoDetections(HazSyncError):
    """Analytics requested over an empty detection set."""


class InvalidConfig(HazSyncError):
    """Configuration file is missing, unparsable, or fails validation."""


class SessionFormatError(HazSyncError):
    """Session directory is missing files or violates its schema."""
