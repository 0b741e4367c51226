"""Estimation of Frenet curvatures from noisy samples of a curve.

The pipeline is

1. local polynomial estimates of the first derivatives (Epanechnikov kernel),
2. Frenet frames by Gram-Schmidt on those derivatives,
3. raw curvatures at arc-length midpoints, either from the discrete
   Frenet-Serret ODE (``log(Q_i^T Q_{i+1}) / ds``) or from the extrinsic
   formulas,
4. a penalized, weighted B-spline regression of the raw values.
"""

from dataclasses import dataclass, field
from math import factorial

import numpy as np
from scipy.interpolate import BSpline

from .errors import (
    NotFrenetCurve,
    PositivityViolated,
    RankDeficient,
    SingularFit,
    WindowTooSmall,
)
from .geom_core import (
    ArcLength,
    DiscreteCurve,
    frenet_band,
    frenet_matrix,
    gram_schmidt_frames,
    normalize,
    so_log,
    uniform_grid,
)

__all__ = [
    "FrenetCurvatures",
    "RawCurvatureSamples",
    "EstimationConfig",
    "local_poly_derivatives",
    "extrinsic_curvatures",
    "ode_raw_curvatures",
    "smooth_curvatures",
    "estimate_pipeline",
    "check_admissible",
]


@dataclass(frozen=True)
class FrenetCurvatures:
    """Generalized curvatures ``theta: [0, 1] -> R^{d-1}`` of arc length.

    Backed either by a vector-valued B-spline or by grid samples that are
    interpolated linearly. Calling the object evaluates it.
    """

    spline: BSpline = None
    grid: np.ndarray = None
    values: np.ndarray = None

    def __post_init__(self):
        if (self.spline is None) == (self.values is None):
            raise ValueError("give exactly one of spline or (grid, values)")
        if self.values is not None:
            values = np.array(self.values, dtype=float)
            if values.ndim == 1:
                values = values[:, None]
            grid = np.array(self.grid, dtype=float)
            if grid.shape[0] != values.shape[0]:
                raise ValueError("grid and values lengths differ")
            values.setflags(write=False)
            grid.setflags(write=False)
            object.__setattr__(self, "values", values)
            object.__setattr__(self, "grid", grid)

    @classmethod
    def from_samples(cls, grid, values):
        return cls(grid=grid, values=values)

    @classmethod
    def constant(cls, theta, n=2):
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return cls(grid=uniform_grid(n), values=np.tile(theta, (n, 1)))

    @classmethod
    def from_function(cls, fn, n=4097):
        """Sample a callable ``fn(s) -> (len(s), d-1)`` (or ``(len(s),)``) densely."""
        s = uniform_grid(n)
        return cls(grid=s, values=np.asarray(fn(s), dtype=float))

    @property
    def n_curvatures(self):
        if self.spline is not None:
            c = np.asarray(self.spline.c)
            return 1 if c.ndim == 1 else c.shape[1]
        return self.values.shape[1]

    @property
    def dim(self):
        """Ambient dimension d."""
        return self.n_curvatures + 1

    def __call__(self, s):
        s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
        if self.spline is not None:
            out = self.spline(s)
            return out[..., None] if out.ndim == s.ndim else out
        cols = [np.interp(s, self.grid, self.values[:, j]) for j in range(self.values.shape[1])]
        return np.stack(cols, axis=-1)

    def sample(self, n=1024):
        s = uniform_grid(n)
        return s, self(s)


@dataclass(frozen=True)
class RawCurvatureSamples:
    """Unsmoothed curvature values at arc-length positions, with weights."""

    positions: np.ndarray
    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.positions) <= 0):
            raise ValueError("positions must be strictly increasing")
        if np.any(np.asarray(self.weights) <= 0):
            raise ValueError("weights must be positive")


@dataclass
class EstimationConfig:
    """Knobs of :func:`estimate_pipeline`.

    ``bandwidth`` is the half-width of the kernel window as a fraction of
    the parameter range. ``lam=None`` selects the penalty by GCV. With
    ``arclength_pass`` the derivatives are refitted against the estimated
    arc length, which removes the dependence on the sampling speed.
    ``degree=None`` fits polynomials of degree ``d + 1``: the last curvature
    involves the d-th derivative and an odd degree gap keeps the boundary
    bias low.
    """

    bandwidth: float = 0.05
    degree: int = None
    n_knots: int = 20
    order: int = 4
    lam: float = None
    raw_method: str = "ode"
    enforce_positivity: bool = True
    arclength_pass: bool = True
    lam_grid: tuple = field(default_factory=lambda: tuple(np.logspace(-12, 2, 57)))

    def as_dict(self):
        return {
            "bandwidth": self.bandwidth,
            "degree": self.degree,
            "n_knots": self.n_knots,
            "order": self.order,
            "lam": self.lam,
            "raw_method": self.raw_method,
            "enforce_positivity": self.enforce_positivity,
            "arclength_pass": self.arclength_pass,
        }


def local_poly_derivatives(curve, bandwidth=0.1, degree=None, n_derivs=None):
    """Local polynomial estimates of the first derivatives of a curve.

    At every sample a polynomial of the given degree is fitted by weighted
    least squares to the neighbours within ``bandwidth`` (Epanechnikov
    weights); the k-th derivative is ``k!`` times the k-th local coefficient.

    Parameters
    ----------
    curve : DiscreteCurve
    bandwidth : float
        Kernel half-width as a fraction of the parameter range.
    degree : int, optional
        Local polynomial degree, at least ``n_derivs``; defaults to ``d``.
    n_derivs : int, optional
        Number of derivative orders returned, defaults to ``d``.

    Returns
    -------
    ndarray, shape (n_derivs, N, d)

    Raises
    ------
    WindowTooSmall
        A window holds fewer than ``degree + 1`` weighted samples.
    SingularFit
        A local design matrix is rank deficient.
    """
    d = curve.dim
    n_derivs = d if n_derivs is None else n_derivs
    degree = max(d, n_derivs) if degree is None else degree
    if degree < n_derivs:
        raise ValueError("degree must be at least the number of derivatives")
    t = curve.grid
    h = bandwidth * (t[-1] - t[0])
    if h <= 0:
        raise WindowTooSmall("bandwidth must be positive")
    x = curve.points
    out = np.empty((n_derivs, t.size, d))
    powers = np.arange(degree + 1)
    scale = np.array([factorial(k) for k in range(1, n_derivs + 1)]) / h ** np.arange(1, n_derivs + 1)

    lo = np.searchsorted(t, t - h, side="right")
    hi = np.searchsorted(t, t + h, side="left")
    for i in range(t.size):
        sl = slice(lo[i], hi[i])
        u = (t[sl] - t[i]) / h
        w = 0.75 * (1.0 - u * u)
        if np.count_nonzero(w > 0) < degree + 1:
            raise WindowTooSmall(
                f"window at sample {i} holds {np.count_nonzero(w > 0)} points, "
                f"degree {degree} needs {degree + 1}"
            )
        sw = np.sqrt(w)
        X = sw[:, None] * u[:, None] ** powers
        beta, _, rank, _ = np.linalg.lstsq(X, sw[:, None] * x[sl], rcond=None)
        if rank < degree + 1:
            raise SingularFit(f"local design at sample {i} has rank {rank}")
        out[:, i, :] = beta[1 : n_derivs + 1] * scale[:, None]
    return out


def _arc_positions(derivs, grid):
    speed = np.linalg.norm(derivs[0], axis=1)
    arc = ArcLength.from_speed(grid, speed)
    total = float(np.trapezoid(speed, grid))
    return arc, total


def extrinsic_curvatures(derivs, grid=None):
    """Curvature (d = 2, signed) or curvature and torsion (d = 3) from derivatives.

    Values are per unit of normalized arc length and are reported at the
    arc-length positions of the samples.
    """
    derivs = np.asarray(derivs, dtype=float)
    d = derivs.shape[-1]
    n = derivs.shape[1]
    grid = uniform_grid(n) if grid is None else np.asarray(grid, dtype=float)
    arc, total = _arc_positions(derivs, grid)
    x1, x2 = derivs[0], derivs[1]
    sp = np.linalg.norm(x1, axis=1)
    if d == 2:
        cross = x1[:, 0] * x2[:, 1] - x1[:, 1] * x2[:, 0]
        values = (cross / sp**3 * total)[:, None]
    elif d == 3:
        cr = np.cross(x1, x2)
        crn = np.linalg.norm(cr, axis=1)
        tol = 1e-10 * np.mean(sp) ** 2
        if np.any(crn < tol):
            i = int(np.argmin(crn))
            raise NotFrenetCurve(f"first two derivatives are parallel at sample {i}", index=i)
        kappa = crn / sp**3 * total
        tors = np.einsum("ni,ni->n", cr, derivs[2]) / crn**2 * total
        values = np.stack([kappa, tors], axis=1)
    else:
        raise ValueError("extrinsic formulas are implemented for d = 2 and d = 3")
    return RawCurvatureSamples(arc.s, values, np.ones(n))


def ode_raw_curvatures(frames):
    """Raw curvatures from consecutive frames through the Frenet-Serret ODE.

    For consecutive frames ``L = log(Q_i^T Q_{i+1}) / (s_{i+1} - s_i)``
    approximates the skew matrix at the arc-length midpoint. Its band holds
    the curvatures; the energy outside the band is turned into the weight
    ``1 / (1 + ||off-band|| / ||band||)``.
    """
    Q = frames.frames
    ds = np.diff(frames.grid)
    rel = np.einsum("nji,njk->nik", Q[:-1], Q[1:])
    L = so_log(rel) / ds[:, None, None]
    theta = frenet_band(L)
    band = frenet_matrix(theta)
    off = np.linalg.norm(L - band, axis=(1, 2))
    on = np.linalg.norm(band, axis=(1, 2))
    ratio = np.where(on > 0, off / np.where(on > 0, on, 1.0), 0.0)
    mid = 0.5 * (frames.grid[1:] + frames.grid[:-1])
    return RawCurvatureSamples(mid, theta, 1.0 / (1.0 + ratio))


# ---------------------------------------------------------------------------
# penalized B-spline regression


def _knot_vector(n_knots, order):
    inner = uniform_grid(n_knots)
    return np.concatenate([np.zeros(order - 1), inner, np.ones(order - 1)])


def _roughness_matrix(knots, order):
    """Exact Gram matrix of second derivatives, ``int B_a'' B_b'' ds``."""
    k = order - 1
    nb = len(knots) - order
    basis = BSpline(knots, np.eye(nb), k)
    d2 = basis.derivative(2)
    breaks = np.unique(knots)
    xg, wg = np.polynomial.legendre.leggauss(max(order, 2))
    omega = np.zeros((nb, nb))
    for a, b in zip(breaks[:-1], breaks[1:]):
        pts = 0.5 * (b - a) * xg + 0.5 * (a + b)
        vals = d2(pts)
        omega += (vals * (0.5 * (b - a) * wg)[:, None]).T @ vals
    return omega


def _penalized_solve(BtWB, Omega, BtWy, lam):
    M = BtWB + lam * Omega
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e13:
        raise RankDeficient(f"penalized normal equations are singular (cond = {cond:.3g})")
    return np.linalg.solve(M, BtWy), M


def smooth_curvatures(raw, n_knots=20, order=4, lam=None, enforce_positivity=True, lam_grid=None):
    """Penalized weighted B-spline regression of raw curvatures.

    Each component minimizes ``sum_k w_k (y_k - f(m_k))^2 / sum_k w_k +
    lam * int f''(s)^2 ds`` over cubic (``order = 4``) splines with
    ``n_knots`` uniform knots on [0, 1]. When ``lam`` is None it is chosen
    by generalized cross-validation over ``lam_grid``.

    Raises
    ------
    RankDeficient
        Too few raw samples for the basis, or singular normal equations.
    PositivityViolated
        For d >= 3, a constrained component is not positive on [0, 1].
    """
    knots = _knot_vector(n_knots, order)
    nb = len(knots) - order
    m = raw.positions
    y = np.asarray(raw.values, dtype=float)
    w = np.asarray(raw.weights, dtype=float)
    if m.size < nb:
        raise RankDeficient(f"{m.size} raw samples cannot determine {nb} spline coefficients")
    B = BSpline.design_matrix(np.clip(m, 0.0, 1.0), knots, order - 1).toarray()
    wn = w / w.sum()
    BtWB = B.T @ (wn[:, None] * B)
    BtWy = B.T @ (wn[:, None] * y)
    Omega = _roughness_matrix(knots, order)

    if lam is None:
        grid = np.logspace(-12, 2, 57) if lam_grid is None else np.asarray(lam_grid)
        best = None
        n = m.size
        for cand in grid:
            try:
                coef, M = _penalized_solve(BtWB, Omega, BtWy, cand)
            except RankDeficient:
                continue
            resid = y - B @ coef
            rss = float(np.sum(wn[:, None] * resid**2))
            edf = float(np.trace(np.linalg.solve(M, BtWB)))
            denom = (1.0 - edf / n) ** 2
            score = rss / denom if denom > 0 else np.inf
            if best is None or score < best[0]:
                best = (score, cand)
        if best is None:
            raise RankDeficient("no penalty on the grid gives a solvable system")
        lam = best[1]

    coef, _ = _penalized_solve(BtWB, Omega, BtWy, lam)
    theta = FrenetCurvatures(spline=BSpline(knots, coef, order - 1))
    if enforce_positivity:
        check_admissible(theta)
    return theta


def check_admissible(theta, n=2001):
    """Raise PositivityViolated unless theta_1..theta_{d-2} > 0 on a dense grid."""
    d = theta.dim
    if d < 3:
        return
    s = uniform_grid(n)
    vals = theta(s)[:, : d - 2]
    bad = vals <= 0
    if np.any(bad):
        where = s[np.any(bad, axis=1)]
        raise PositivityViolated(
            f"constrained curvature components are non-positive on "
            f"[{where.min():.4g}, {where.max():.4g}]",
            where=where,
        )


def estimate_pipeline(curve, config=None, return_raw=False):
    """Estimate arc length and smooth Frenet curvatures of a noisy curve.

    Returns
    -------
    ArcLength
        From the speed of the smoothed first derivative.
    FrenetCurvatures
        Spline estimate, a function of normalized arc length.
    RawCurvatureSamples
        Only with ``return_raw``: the unsmoothed values that were fitted.
    """
    config = EstimationConfig() if config is None else config
    d = curve.dim
    if curve.n < d + 2:
        raise WindowTooSmall(f"{curve.n} samples are too few for a curve in R^{d}")
    curve = normalize(curve)
    n_derivs = d if config.raw_method == "extrinsic" else d - 1
    fit = {
        "bandwidth": config.bandwidth,
        "degree": config.degree if config.degree is not None else d + 1,
        "n_derivs": n_derivs,
    }
    derivs = local_poly_derivatives(curve, **fit)
    arc, _ = _arc_positions(derivs, curve.grid)
    grid = curve.grid
    if config.arclength_pass:
        grid = arc.s
        derivs = local_poly_derivatives(DiscreteCurve(grid, curve.points), **fit)
    if config.raw_method == "ode":
        frames = gram_schmidt_frames(derivs, grid=arc.s)
        raw = ode_raw_curvatures(frames)
    elif config.raw_method == "extrinsic":
        raw = extrinsic_curvatures(derivs, grid)
    else:
        raise ValueError(f"unknown raw_method {config.raw_method!r}")
    theta = smooth_curvatures(
        raw,
        n_knots=config.n_knots,
        order=config.order,
        lam=config.lam,
        enforce_positivity=config.enforce_positivity,
        lam_grid=config.lam_grid,
    )
    if return_raw:
        return arc, theta, raw
    return arc, theta
