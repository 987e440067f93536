"""Exception types shared across the package."""


class BaroflowError(Exception):
    """Base class for all package errors."""


class DomainError(BaroflowError, ValueError):
    """An input is outside its mathematical domain (e.g. nonpositive density)."""


class GridMismatchError(BaroflowError, ValueError):
    """Fields that must share a grid do not."""


class StepSizeError(BaroflowError, ValueError):
    """Time step violates the CFL bound."""


class ShockError(BaroflowError, RuntimeError):
    """The flow map lost monotonicity; the smooth solution has ended."""


class VacuumError(BaroflowError, ValueError):
    """A density profile would become nonpositive."""


class NormalizationError(BaroflowError, ValueError):
    """Inputs fail a required normalization precondition."""


class InstabilityFlagError(BaroflowError, RuntimeError):
    """A spectral quantity violates the boundedness criterion it was supposed to satisfy."""


class ProjectionResidualError(BaroflowError, ValueError):
    """A field cannot be represented in the truncated eigenbasis to tolerance."""
