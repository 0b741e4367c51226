"""Exception classes raised by frenetshape.

Every error derives from :class:`ShapeError` so callers can catch the whole
family at once. The CLI maps each class to its own exit code.
"""


class ShapeError(Exception):
    """Base class for all frenetshape errors."""


class DegenerateCurve(ShapeError):
    """The curve has (numerically) zero length."""


class ZeroSpeed(ShapeError):
    """The curve is not immersed: its speed vanishes somewhere."""


class NotFrenetCurve(ShapeError):
    """The first derivatives of the curve are linearly dependent at a sample."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class LogBranch(ShapeError):
    """A rotation angle is too close to pi for a unique principal logarithm."""


class NonMonotoneWarp(ShapeError):
    """A warping function is not an increasing bijection of [0, 1]."""


class VanishingCurvature(ShapeError):
    """The curvature vector vanishes where the square-root transform needs it."""


class PositivityViolated(ShapeError):
    """A curvature component required to be positive is not."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class AntipodalPoints(ShapeError):
    """Two points of the unit sphere are antipodal; the geodesic is not unique."""


class GridTooCoarse(ShapeError):
    """Too few samples for the dynamic-programming lattice."""


class EstimationError(ShapeError):
    """Base class for failures of the curvature estimators."""


class WindowTooSmall(EstimationError):
    """A local polynomial window holds too few samples for the requested degree."""


class SingularFit(EstimationError):
    """The local polynomial design matrix is rank deficient."""


class RankDeficient(EstimationError):
    """The penalized spline normal equations are singular."""


class DegenerateCovarianceWarning(UserWarning):
    """The optimal rotation is not unique (tied singular values at a sign flip)."""
