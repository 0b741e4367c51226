"""Curve preprocessing, Frenet frames and SO(d) primitives.

Curves are sampled on a grid ``0 = t_0 < ... < t_{N-1} = 1`` and stored as
``(N, d)`` arrays. All integrals use the composite trapezoid rule on the
sample grid.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.linalg import expm, logm

from .errors import (
    DegenerateCurve,
    LogBranch,
    NonMonotoneWarp,
    NotFrenetCurve,
    ZeroSpeed,
)

__all__ = [
    "DiscreteCurve",
    "ArcLength",
    "FrenetPath",
    "Warping",
    "normalize",
    "arc_length",
    "resample_arclength",
    "gram_schmidt_frames",
    "so_exp",
    "so_log",
    "frenet_matrix",
    "frenet_band",
    "skew_norm",
    "apply_warp",
    "integrate_frenet",
    "l2_inner",
    "l2_norm",
    "uniform_grid",
]

ZERO_SPEED_TOL = 1e-8
GS_TOL = 1e-10
LOG_BRANCH_TOL = 1e-6


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def uniform_grid(n):
    return np.linspace(0.0, 1.0, n)


def _check_grid(grid, name="grid"):
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError(f"{name} must be a 1-d array with at least 2 samples")
    if grid[0] != 0.0 or grid[-1] != 1.0:
        raise ValueError(f"{name} must start at 0 and end at 1")
    if np.any(np.diff(grid) <= 0):
        raise ValueError(f"{name} must be strictly increasing")


@dataclass(frozen=True)
class DiscreteCurve:
    """A curve in R^d sampled on a grid of [0, 1].

    Parameters
    ----------
    grid : array_like, shape (N,)
        Strictly increasing sample times with ``grid[0] = 0`` and
        ``grid[-1] = 1``.
    points : array_like, shape (N, d)
        Sample positions, ``d >= 2``.
    """

    grid: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        grid = _frozen(self.grid)
        points = _frozen(self.points)
        _check_grid(grid)
        if points.ndim != 2 or points.shape[0] != grid.size:
            raise ValueError("points must have shape (len(grid), d)")
        if points.shape[1] < 2:
            raise ValueError("curves must live in R^d with d >= 2")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_points(cls, points):
        """Wrap points sampled on a uniform grid."""
        points = np.asarray(points, dtype=float)
        return cls(uniform_grid(len(points)), points)

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def n(self):
        return self.grid.size

    def polyline_length(self):
        return float(np.linalg.norm(np.diff(self.points, axis=0), axis=1).sum())

    def transform(self, rotation=None, translation=None):
        """Return ``rotation @ x + translation`` applied to every sample."""
        pts = self.points
        if rotation is not None:
            pts = pts @ np.asarray(rotation, dtype=float).T
        if translation is not None:
            pts = pts + np.asarray(translation, dtype=float)
        return DiscreteCurve(self.grid, pts)

    def reparametrize(self, warp):
        """Sample ``x(h(t))`` on the grid of ``warp`` (cubic interpolation of x)."""
        spline = CubicSpline(self.grid, self.points, axis=0)
        values = np.clip(warp.values, 0.0, 1.0)
        return DiscreteCurve(warp.grid, spline(values))

    def on_grid(self, grid):
        """Cubic interpolation of the samples onto another grid of [0, 1]."""
        grid = np.asarray(grid, dtype=float)
        if self.grid.size == grid.size and np.array_equal(self.grid, grid):
            return self
        spline = CubicSpline(self.grid, self.points, axis=0)
        return DiscreteCurve(grid, spline(grid))


@dataclass(frozen=True)
class ArcLength:
    """Arc-length function ``s(t)`` of a length-normalized curve and its speed."""

    grid: np.ndarray
    s: np.ndarray
    sdot: np.ndarray

    def __post_init__(self):
        for name in ("grid", "s", "sdot"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def psi(self):
        """Square root of the speed, a point of the unit sphere of L^2."""
        return np.sqrt(self.sdot)

    @classmethod
    def from_speed(cls, grid, sdot):
        """Build from (unnormalized) speed samples; rescales to total length 1."""
        grid = np.asarray(grid, dtype=float)
        sdot = np.asarray(sdot, dtype=float)
        total = trapezoid(sdot, grid)
        if total <= 0:
            raise DegenerateCurve("total length must be positive")
        sdot = sdot / total
        s = cumulative_trapezoid(sdot, grid, initial=0.0)
        s[-1] = 1.0
        return cls(grid, s, sdot)

    @classmethod
    def from_psi(cls, grid, psi):
        return cls.from_speed(grid, np.asarray(psi, dtype=float) ** 2)


@dataclass(frozen=True)
class FrenetPath:
    """Moving frames ``Q(s_i)`` as an ``(N, d, d)`` array (columns e_1..e_d)."""

    grid: np.ndarray
    frames: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "grid", _frozen(self.grid))
        object.__setattr__(self, "frames", _frozen(self.frames))

    @property
    def dim(self):
        return self.frames.shape[-1]

    def orthogonality_error(self):
        d = self.dim
        gram = np.einsum("nji,njk->nik", self.frames, self.frames)
        return float(np.linalg.norm(gram - np.eye(d), axis=(1, 2)).max())


@dataclass(frozen=True)
class Warping:
    """Increasing bijection ``h`` of [0, 1] sampled on a grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = _frozen(self.grid)
        values = _frozen(self.values)
        _check_grid(grid)
        if values.shape != grid.shape:
            raise NonMonotoneWarp("warp values must match the grid")
        if values[0] != 0.0 or values[-1] != 1.0:
            raise NonMonotoneWarp("a warp must fix the endpoints 0 and 1")
        if np.any(np.diff(values) <= 0):
            raise NonMonotoneWarp("a warp must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def identity(cls, n):
        g = uniform_grid(n)
        return cls(g, g.copy())

    def __call__(self, u):
        return PchipInterpolator(self.grid, self.values)(u)

    def derivative(self, u=None):
        """``h'`` at ``u``; on the own grid by second-order finite differences.

        Off the grid, and wherever the finite difference is not positive,
        the derivative of the monotone cubic interpolant is used.
        """
        pchip = PchipInterpolator(self.grid, self.values).derivative()
        if u is not None:
            return pchip(u)
        edge = 2 if self.grid.size >= 3 else 1
        out = np.gradient(self.values, self.grid, edge_order=edge)
        bad = out <= 0
        if np.any(bad):
            out[bad] = pchip(self.grid[bad])
        return out

    def inverse(self):
        """The inverse warp, sampled on the same grid."""
        values = PchipInterpolator(self.values, self.grid)(self.grid)
        values[0], values[-1] = 0.0, 1.0
        return Warping(self.grid, values)


# ---------------------------------------------------------------------------
# quadrature


def l2_inner(f, g, grid):
    """Trapezoid L^2 inner product of (vector-valued) samples."""
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    prod = f * g
    if prod.ndim > 1:
        prod = prod.reshape(prod.shape[0], -1).sum(axis=1)
    return float(trapezoid(prod, grid))


def l2_norm(f, grid):
    return float(np.sqrt(max(l2_inner(f, f, grid), 0.0)))


# ---------------------------------------------------------------------------
# preprocessing


def normalize(curve):
    """Translate the curve to start at the origin and scale it to unit length.

    The length is the length of the polyline through the samples.

    Raises
    ------
    DegenerateCurve
        If all samples coincide.
    """
    pts = curve.points - curve.points[0]
    length = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
    scale = max(1.0, float(np.abs(curve.points).max()))
    if length < 1e-12 * scale:
        raise DegenerateCurve("curve has zero length")
    return DiscreteCurve(curve.grid, pts / length)


def _velocity(curve):
    edge = 2 if curve.n >= 3 else 1
    return np.gradient(curve.points, curve.grid, axis=0, edge_order=edge)


def arc_length(curve):
    """Arc-length function of a curve, rescaled so that ``s(1) = 1``.

    The speed is the norm of the second-order finite-difference velocity;
    ``s`` is its cumulative trapezoid integral. Zero speed at an endpoint is
    tolerated, zero speed at an interior sample is not.

    Raises
    ------
    ZeroSpeed
        If the speed vanishes at an interior sample.
    """
    speed = np.linalg.norm(_velocity(curve), axis=1)
    total = trapezoid(speed, curve.grid)
    if total <= 0:
        raise DegenerateCurve("curve has zero length")
    interior = speed[1:-1] / total
    if interior.size and interior.min() < ZERO_SPEED_TOL:
        k = int(np.argmin(interior)) + 1
        raise ZeroSpeed(f"speed vanishes at sample {k} (t = {curve.grid[k]:.6g})")
    return ArcLength.from_speed(curve.grid, speed)


def resample_arclength(curve, n):
    """Resample a curve at ``n`` points equally spaced in arc length.

    A cubic spline through the samples is measured on a dense grid, its
    chord-length function is inverted, and the spline is evaluated at the
    resulting times. The output lives on the uniform grid of size ``n``.
    """
    if n < 2:
        raise ValueError("need at least 2 output samples")
    arc_length(curve)
    spline = CubicSpline(curve.grid, curve.points, axis=0)
    dense_t = uniform_grid(max(20 * curve.n, 20 * n, 4000))
    dense = spline(dense_t)
    cum = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(dense, axis=0), axis=1))])
    targets = uniform_grid(n) * cum[-1]
    t_new = np.interp(targets, cum, dense_t)
    t_new[0], t_new[-1] = 0.0, 1.0
    return DiscreteCurve(uniform_grid(n), spline(t_new))


# ---------------------------------------------------------------------------
# Frenet frames


def _orthogonal_complement(cols):
    """Unit vector completing ``cols`` (N, d, d-1) to a positive orthonormal basis.

    Cofactor expansion: the i-th entry is det([cols | e_i]).
    """
    n, d, _ = cols.shape
    if d == 2:
        return np.stack([-cols[:, 1, 0], cols[:, 0, 0]], axis=1)
    if d == 3:
        return np.cross(cols[:, :, 0], cols[:, :, 1])
    out = np.empty((n, d))
    basis = np.eye(d)
    for i in range(d):
        mat = np.concatenate([cols, np.broadcast_to(basis[i][None, :, None], (n, d, 1))], axis=2)
        out[:, i] = np.linalg.det(mat)
    return out / np.linalg.norm(out, axis=1, keepdims=True)


def gram_schmidt_frames(derivs, grid=None, scale=None):
    """Frenet frames from the derivatives of a curve.

    The first ``d - 1`` frame vectors come from Gram-Schmidt on the first
    ``d - 1`` derivatives. The last one completes a positively oriented
    basis, which is Gram-Schmidt on the d-th derivative followed by the
    determinant fix; the d-th derivative itself is therefore not needed and
    the last generalized curvature may vanish or change sign.

    Parameters
    ----------
    derivs : array_like, shape (k, N, d)
        ``derivs[j]`` holds the (j+1)-th derivative at each sample, ``k >= d - 1``.
    grid : array_like, optional
        Arc-length grid attached to the returned path (uniform by default).
    scale : float, optional
        Length scale of the pivot test, defaults to the mean first-derivative
        norm (the curve length for a curve parametrized on [0, 1]).

    Raises
    ------
    NotFrenetCurve
        If a Gram-Schmidt pivot falls below ``1e-10 * scale``.
    """
    derivs = np.asarray(derivs, dtype=float)
    _, n, d = derivs.shape
    if derivs.shape[0] < d - 1:
        raise ValueError(f"need at least {d - 1} derivative orders in R^{d}")
    if scale is None:
        scale = float(np.linalg.norm(derivs[0], axis=1).mean())
    tol = GS_TOL * max(scale, np.finfo(float).tiny)

    cols = np.empty((n, d, d - 1))
    for k in range(d - 1):
        v = derivs[k].copy()
        # two passes keep the basis orthonormal to machine precision
        for _ in range(2):
            for j in range(k):
                v -= np.einsum("ni,ni->n", v, cols[:, :, j])[:, None] * cols[:, :, j]
            if _ == 0:
                pivot = np.linalg.norm(v, axis=1)
                bad = pivot < tol
                if np.any(bad):
                    i = int(np.argmax(bad))
                    raise NotFrenetCurve(
                        f"derivative {k + 1} is dependent on lower orders at sample {i}",
                        index=i,
                    )
            v /= np.linalg.norm(v, axis=1, keepdims=True)
        cols[:, :, k] = v

    frames = np.concatenate([cols, _orthogonal_complement(cols)[:, :, None]], axis=2)
    if grid is None:
        grid = uniform_grid(n)
    return FrenetPath(grid, frames)


# ---------------------------------------------------------------------------
# SO(d)


def frenet_matrix(theta):
    """Tridiagonal skew matrix with ``A[k+1, k] = theta_k = -A[k, k+1]``."""
    theta = np.asarray(theta, dtype=float)
    d = theta.shape[-1] + 1
    out = np.zeros(theta.shape[:-1] + (d, d))
    k = np.arange(d - 1)
    out[..., k + 1, k] = theta
    out[..., k, k + 1] = -theta
    return out


def frenet_band(A):
    """Read the curvatures off the first sub/super-diagonal of a skew matrix."""
    A = np.asarray(A, dtype=float)
    d = A.shape[-1]
    k = np.arange(d - 1)
    return 0.5 * (A[..., k + 1, k] - A[..., k, k + 1])


def skew_norm(A):
    """Norm induced by the half-trace inner product ``<A, B> = tr(A^T B) / 2``."""
    A = np.asarray(A, dtype=float)
    return np.sqrt(0.5 * np.sum(A * A, axis=(-2, -1)))


def so_exp(A):
    """Matrix exponential of skew-symmetric matrices, shape (..., d, d).

    Closed forms for d = 2 (planar rotation) and d = 3 (Rodrigues);
    scaling-and-squaring otherwise.
    """
    A = np.asarray(A, dtype=float)
    d = A.shape[-1]
    if d == 2:
        ang = A[..., 1, 0]
        c, s = np.cos(ang), np.sin(ang)
        return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)
    if d == 3:
        w = np.stack([A[..., 2, 1], A[..., 0, 2], A[..., 1, 0]], axis=-1)
        ang = np.linalg.norm(w, axis=-1)[..., None, None]
        a = np.sinc(ang / np.pi)
        b = 0.5 * np.sinc(ang / (2 * np.pi)) ** 2
        return np.eye(3) + a * A + b * (A @ A)
    return expm(A)


def so_log(R):
    """Principal logarithm of rotation matrices, shape (..., d, d).

    Raises
    ------
    LogBranch
        If some rotation angle is within ``1e-6`` of pi.
    """
    R = np.asarray(R, dtype=float)
    d = R.shape[-1]
    if d == 2:
        ang = np.arctan2(R[..., 1, 0], R[..., 0, 0])
        if np.any(np.pi - np.abs(ang) < LOG_BRANCH_TOL):
            raise LogBranch("rotation by pi has no unique logarithm")
        return frenet_matrix(ang[..., None])
    if d == 3:
        cos = np.clip((np.trace(R, axis1=-2, axis2=-1) - 1.0) / 2.0, -1.0, 1.0)
        ang = np.arccos(cos)
        if np.any(np.pi - ang < LOG_BRANCH_TOL):
            raise LogBranch("rotation by pi has no unique logarithm")
        small = ang < 1e-4
        factor = np.where(small, 1.0 + ang**2 / 6.0, ang / np.where(small, 1.0, np.sin(ang)))
        return 0.5 * factor[..., None, None] * (R - np.swapaxes(R, -1, -2))
    flat = R.reshape(-1, d, d)
    out = np.empty_like(flat)
    for i, r in enumerate(flat):
        angles = np.abs(np.angle(np.linalg.eigvals(r)))
        if np.any(np.pi - angles < LOG_BRANCH_TOL):
            raise LogBranch("rotation by pi has no unique logarithm")
        L = np.real(logm(r))
        out[i] = 0.5 * (L - L.T)
    return out.reshape(R.shape)


# ---------------------------------------------------------------------------
# warps and ODE integration


def apply_warp(f, h, mode="plain", grid=None):
    """Compose samples of ``f`` with a warp.

    Parameters
    ----------
    f : array_like, shape (M,) or (M, k)
        Samples of a function on ``grid`` (uniform when omitted).
    h : Warping
    mode : {"plain", "half-density"}
        ``"plain"`` returns ``f(h(u))``; ``"half-density"`` returns
        ``sqrt(h'(u)) f(h(u))``, the action that preserves L^2 norms.

    Returns
    -------
    ndarray
        Samples on ``h.grid``. ``f`` is interpolated linearly, ``h'`` comes
        from the monotone cubic interpolant of ``h``.
    """
    if not isinstance(h, Warping):
        raise NonMonotoneWarp("h must be a Warping")
    f = np.asarray(f, dtype=float)
    grid = uniform_grid(f.shape[0]) if grid is None else np.asarray(grid, dtype=float)
    if f.ndim == 1:
        out = np.interp(h.values, grid, f)
    else:
        out = np.stack([np.interp(h.values, grid, f[:, j]) for j in range(f.shape[1])], axis=1)
    if mode == "plain":
        return out
    if mode != "half-density":
        raise ValueError(f"unknown mode {mode!r}")
    root = np.sqrt(np.maximum(h.derivative(), 0.0))
    return out * (root if out.ndim == 1 else root[:, None])


def integrate_frenet(grid, rate, speed, frame0=None, x0=None):
    """Integrate ``dQ/dt = Q A(t)``, ``dx/dt = speed * e_1`` on a grid.

    Parameters
    ----------
    grid : (N,) times.
    rate : (N, d-1) values of ``sdot(t) * theta(s(t))`` at the grid.
    speed : (N,) values of ``sdot(t)``.

    Uses the midpoint Lie-group scheme ``Q_{k+1} = Q_k exp(dt A_{k+1/2})``
    (order 2, exactly orthogonal) and the trapezoid rule for positions.
    Returns ``(frames, points)``.
    """
    grid = np.asarray(grid, dtype=float)
    rate = np.asarray(rate, dtype=float)
    speed = np.asarray(speed, dtype=float)
    d = rate.shape[1] + 1
    dt = np.diff(grid)
    mid = 0.5 * (rate[1:] + rate[:-1]) * dt[:, None]
    steps = so_exp(frenet_matrix(mid))
    frames = np.empty((grid.size, d, d))
    frames[0] = np.eye(d) if frame0 is None else frame0
    for k in range(grid.size - 1):
        frames[k + 1] = frames[k] @ steps[k]
    vel = speed[:, None] * frames[:, :, 0]
    points = cumulative_trapezoid(vel, grid, axis=0, initial=0.0)
    if x0 is not None:
        points = points + np.asarray(x0, dtype=float)
    return frames, points
