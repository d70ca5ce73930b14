"""Exception types shared across the toolkit.

Every raised error names the offending argument or configuration key in its
message so that failures in long batch runs are attributable.
"""


class GafHolesError(Exception):
    """Base class for all toolkit errors."""


class InvalidRadius(GafHolesError):
    """Radius outside the required open/half-open interval."""


class InvalidModel(GafHolesError):
    """Coefficient model is malformed (bad kind, L <= 0, bad explicit sequence)."""


class IndexOutOfRange(GafHolesError):
    """Coefficient index beyond an explicit sequence's length."""


class NoConvergence(GafHolesError):
    """A series scan exceeded its hard term cap before meeting its tolerance."""


class InvalidPoint(GafHolesError):
    """Evaluation point outside the open unit disk."""


class SizeCap(GafHolesError):
    """Requested dense matrix size above the configured cap."""


class NotMonotone(GafHolesError):
    """Operation requires a non-increasing coefficient sequence."""


class EmptySubset(GafHolesError):
    """Principal minor requested for an empty index subset."""


class InvalidIntensity(GafHolesError):
    """Intensity parameter L outside the range an operation supports."""


class IntensityOutOfRange(InvalidIntensity):
    """Intensity parameter outside the regime-specific range."""


class TiltOutOfRange(GafHolesError):
    """A tilt ratio q_n left (0, 1]."""


class RatioOutOfRange(GafHolesError):
    """A coupling ratio |c_n/b_n| left (0, 1]."""


class DomainError(GafHolesError):
    """Scalar function argument outside its domain."""


class ZeroConstantTerm(GafHolesError):
    """Averaging defect requires S(0) != 0."""


class ConfigError(GafHolesError):
    """Unknown or ill-typed configuration key; the message names the key."""


class ComputeBudgetExceeded(GafHolesError):
    """trials x truncation degree above the configured compute budget."""


class PreAsymptotic(UserWarning):
    """Envelope evaluated where log(1/(1-r)) < 1; the curve is a guide only."""
