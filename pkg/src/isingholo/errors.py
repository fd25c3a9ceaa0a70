"""Exception hierarchy shared by every stage of the pipeline."""


class IsingHoloError(Exception):
    """Base class for all package errors."""


class ValidationError(IsingHoloError, ValueError):
    """Input violates an operation's precondition."""


class ContourError(ValidationError):
    """Requested target field is not enclosed by the integration contour."""


class RankDeficiencyError(ValidationError):
    """Regression design matrix does not have full column rank."""


class CapacityError(IsingHoloError):
    """Problem is too large for the configured memory or enumeration budget."""


class ReconstructionError(IsingHoloError):
    """A reconstructed partition-function ratio is unusable (e.g. not positive)."""
