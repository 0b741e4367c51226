"""Curve representations: SRVF, (speed, curvatures) and the square-root curvature transform.

Each representation comes with its inverse (curve reconstruction) and the
elementary distances and geodesics on its target space: great circles on
the unit sphere of L^2 for square-root speeds and SRVFs, straight lines for
curvatures and square-root curvatures.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import BSpline

from .errors import AntipodalPoints, NotFrenetCurve, PositivityViolated, VanishingCurvature, ZeroSpeed
from .estimation import FrenetCurvatures, check_admissible
from .geom_core import (
    ZERO_SPEED_TOL,
    ArcLength,
    DiscreteCurve,
    integrate_frenet,
    l2_inner,
    l2_norm,
    uniform_grid,
)

__all__ = [
    "Srvf",
    "ThetaRepr",
    "SrcRepr",
    "GeodesicPath",
    "srvf_transform",
    "srvf_inverse",
    "theta_repr",
    "theta_inverse",
    "src_transform",
    "src_inverse",
    "src_curvatures",
    "sqrt_normalize",
    "psi_distance",
    "psi_geodesic",
    "sphere_distance",
    "sphere_geodesic",
    "curvature_distance",
    "curvature_geodesic",
]

VANISHING_REL_TOL = 1e-6
ANTIPODAL_TOL = 1e-8
# curvatures of unit-length curves below this are a straight segment
STRAIGHT_TOL = 1e-6
SHARED_GRID = 1024


@dataclass(frozen=True)
class Srvf:
    grid: np.ndarray
    q: np.ndarray

    def norm(self):
        return l2_norm(self.q, self.grid)


@dataclass(frozen=True)
class ThetaRepr:
    """Square-root speed on the time grid paired with curvatures of arc length."""

    arc: ArcLength
    theta: FrenetCurvatures

    @property
    def psi(self):
        return self.arc.psi


@dataclass(frozen=True)
class SrcRepr:
    """Square-root speed ``psi`` and square-root curvatures ``c`` on a time grid."""

    grid: np.ndarray
    psi: np.ndarray
    c: np.ndarray

    @property
    def dim(self):
        return self.c.shape[1] + 1


@dataclass
class GeodesicPath:
    """Snapshots of a geodesic at the requested times.

    ``curvatures[k]`` is the curvature function carried by the representation
    at ``taus[k]`` (None for the SRVF method, whose representation does not
    carry curvatures). ``errors`` maps a tau to the message of a snapshot
    that could not be built.
    """

    method: str
    taus: np.ndarray
    snapshots: list
    curvatures: list
    warp: object = None
    rotation: np.ndarray = None
    errors: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# SRVF


def srvf_transform(curve):
    """Square-root velocity function ``q = x' / sqrt(|x'|)``.

    The velocity is a second-order finite difference; ``q`` is rescaled to
    unit L^2 norm, which is the SRVF of the curve scaled to unit length.

    Raises
    ------
    ZeroSpeed
        If the speed vanishes at an interior sample.
    """
    edge = 2 if curve.n >= 3 else 1
    vel = np.gradient(curve.points, curve.grid, axis=0, edge_order=edge)
    speed = np.linalg.norm(vel, axis=1)
    scale = float(np.trapezoid(speed, curve.grid))
    if scale <= 0 or (curve.n > 2 and speed[1:-1].min() < ZERO_SPEED_TOL * scale):
        raise ZeroSpeed("curve is not immersed")
    root = np.sqrt(speed)
    q = np.divide(vel, root[:, None], out=np.zeros_like(vel), where=root[:, None] > 0)
    q /= l2_norm(q, curve.grid)
    return Srvf(curve.grid, q)


def srvf_inverse(srvf):
    """Curve ``x(t) = int_0^t q |q| du`` starting at the origin."""
    q = np.asarray(srvf.q, dtype=float)
    vel = q * np.linalg.norm(q, axis=1, keepdims=True)
    return DiscreteCurve(srvf.grid, cumulative_trapezoid(vel, srvf.grid, axis=0, initial=0.0))


# ---------------------------------------------------------------------------
# (speed, curvatures) and SRC


def sqrt_normalize(theta_values, rel_tol=VANISHING_REL_TOL):
    """Map curvature samples to ``theta / sqrt(|theta|)``.

    Where ``theta = 0`` the continuous extension 0 is used; this is only
    allowed for planar curves (signed curvature). In R^d with d >= 3 the
    curvature norm must stay above ``rel_tol * max |theta|``.

    Raises
    ------
    NotFrenetCurve
        If the curvature vanishes identically (a straight segment).
    VanishingCurvature
        For d >= 3, if the curvature norm vanishes anywhere.
    """
    vals = np.asarray(theta_values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    norms = np.linalg.norm(vals, axis=1)
    top = norms.max() if norms.size else 0.0
    if top <= STRAIGHT_TOL:
        raise NotFrenetCurve("curvature vanishes identically (straight line)")
    if vals.shape[1] >= 2 and norms.min() < rel_tol * top:
        k = int(np.argmin(norms))
        raise VanishingCurvature(f"curvature norm vanishes at sample {k}")
    root = np.sqrt(norms)
    return np.divide(vals, root[:, None], out=np.zeros_like(vals), where=root[:, None] > 0)


def theta_repr(arc, theta):
    """Pair the square-root speed with the (unparametrized) curvatures."""
    check_admissible(theta)
    return ThetaRepr(arc, theta)


def src_transform(arc, theta):
    """Square-root curvature transform ``c(t) = psi(t) theta(s(t)) / sqrt(|theta(s(t))|)``.

    Returns
    -------
    SrcRepr
        ``psi`` and ``c`` sampled on the time grid of ``arc``.
    """
    check_admissible(theta)
    vals = theta(arc.s)
    c = arc.psi[:, None] * sqrt_normalize(vals)
    if c.shape[1] >= 2 and np.any(c[:, :-1] <= 0):
        raise PositivityViolated("constrained square-root curvatures must be positive")
    return SrcRepr(arc.grid, arc.psi, c)


def _reconstruct(grid, speed, rate, frame0=None, x0=None):
    d = rate.shape[1] + 1
    x0 = np.zeros(d) if x0 is None else x0
    _, pts = integrate_frenet(grid, rate, speed, frame0=frame0, x0=x0)
    return DiscreteCurve(grid, pts)


def src_inverse(r, frame0=None, x0=None):
    """Rebuild a curve from its square-root curvature representation.

    ``c |c| = sdot * theta(s)`` gives the generator of the Frenet-Serret ODE
    in time; the frames are integrated with the midpoint exponential scheme
    from ``frame0`` (identity by default) and the positions from ``x0``
    (origin by default).
    """
    c = np.asarray(r.c, dtype=float)
    rate = c * np.linalg.norm(c, axis=1, keepdims=True)
    return _reconstruct(r.grid, np.asarray(r.psi) ** 2, rate, frame0, x0)


def theta_inverse(arc, theta, frame0=None, x0=None):
    """Rebuild a curve from its speed and curvature functions."""
    rate = arc.sdot[:, None] * theta(arc.s)
    return _reconstruct(arc.grid, arc.sdot, rate, frame0, x0)


def src_curvatures(r):
    """Curvatures carried by an SRC representation, as a function of arc length."""
    c = np.asarray(r.c, dtype=float)
    sdot = np.asarray(r.psi, dtype=float) ** 2
    arc = ArcLength.from_speed(r.grid, sdot)
    rate = c * np.linalg.norm(c, axis=1, keepdims=True)
    # per unit of normalized arc length
    vals = rate / np.maximum(sdot, 1e-300)[:, None] * np.trapezoid(sdot, r.grid)
    s, keep = np.unique(arc.s, return_index=True)
    return FrenetCurvatures.from_samples(s, vals[keep])


# ---------------------------------------------------------------------------
# sphere and flat geometry


def sphere_distance(f0, f1, grid=None):
    """Great-circle distance between two functions after projection to the unit sphere."""
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    grid = uniform_grid(len(f0)) if grid is None else grid
    cos = l2_inner(f0, f1, grid) / (l2_norm(f0, grid) * l2_norm(f1, grid))
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def sphere_geodesic(f0, f1, tau, grid=None):
    """Point at ``tau`` on the great circle from ``f0`` to ``f1`` (both unit norm).

    Raises
    ------
    AntipodalPoints
        If the two points are (numerically) antipodal.
    """
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    ang = sphere_distance(f0, f1, grid)
    if np.pi - ang < ANTIPODAL_TOL:
        raise AntipodalPoints("geodesic between antipodal points is not unique")
    if ang < 1e-12:
        return (1.0 - tau) * f0 + tau * f1
    return (np.sin((1.0 - tau) * ang) * f0 + np.sin(tau * ang) * f1) / np.sin(ang)


def psi_distance(psi0, psi1, grid=None):
    """Arc-cosine distance between square-root speed functions."""
    return sphere_distance(psi0, psi1, grid)


def psi_geodesic(psi0, psi1, tau, grid=None):
    return sphere_geodesic(psi0, psi1, tau, grid)


def curvature_distance(theta0, theta1, n=SHARED_GRID):
    """L^2 distance of two curvature functions on a shared uniform grid."""
    s = uniform_grid(n)
    diff = theta0(s) - theta1(s)
    return float(np.sqrt(max(np.trapezoid(np.sum(diff * diff, axis=1), s), 0.0)))


def curvature_geodesic(theta0, theta1, tau, n=4097):
    """Straight line ``(1 - tau) theta0 + tau theta1``.

    Exact on the spline coefficients when both inputs share a spline basis,
    sampled on ``n`` uniform points otherwise.
    """
    sp0, sp1 = theta0.spline, theta1.spline
    if (
        sp0 is not None
        and sp1 is not None
        and sp0.k == sp1.k
        and np.array_equal(sp0.t, sp1.t)
    ):
        coef = (1.0 - tau) * np.asarray(sp0.c) + tau * np.asarray(sp1.c)
        return FrenetCurvatures(spline=BSpline(sp0.t, coef, sp0.k))
    s = uniform_grid(n)
    return FrenetCurvatures.from_samples(s, (1.0 - tau) * theta0(s) + tau * theta1(s))
