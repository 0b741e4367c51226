"""Registration of curve representations.

Warps are found by dynamic programming over monotone paths on the lattice
``{0..N0-1} x {0..N1-1}``. A path is a sequence of steps ``(a, b)`` with
``a, b`` in ``1..4`` and coprime; on each step the warp is linear with slope
``m = (b / (N1-1)) / (a / (N0-1))``. The cost of a step is the trapezoid
integral, over the ``a + 1`` samples of ``f0`` it covers, of
``|f0(t) - sqrt(m) f1(h(t))|^2`` with ``f1`` interpolated linearly, plus
an optional penalty on ``m``.

The lattice restricts slopes to a few rationals, which leaves a
discretization floor in the attained cost. :func:`refine_warp` removes
most of it by gradient descent over smooth warps, started from a smoothed
copy of the lattice solution.
"""

import warnings
from dataclasses import dataclass, field
from math import gcd

import numpy as np
from numba import njit
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from .errors import DegenerateCovarianceWarning, GridTooCoarse
from .geom_core import Warping, uniform_grid

__all__ = [
    "STEPS",
    "RegistrationResult",
    "dp_warp",
    "dp_path",
    "path_samples",
    "path_to_warp",
    "refine_warp",
    "procrustes_rotation",
    "rigid_align",
    "register_srvf",
    "register_src",
    "register_src_arclength",
]

STEPS = np.array([(a, b) for a in range(1, 5) for b in range(1, 5) if gcd(a, b) == 1], dtype=np.int64)

PENALTIES = {"linear": 0, "sqrt": 1}


@dataclass
class RegistrationResult:
    """Optimal warp (and rotation) with the attained cost.

    ``costs`` holds the lattice objective after each iteration of an
    alternating scheme; ``path`` the lattice vertices of the lattice warp.
    ``warp`` and ``cost`` are the final (refined) ones, and ``aligned``
    holds ``f1 * h`` (rotated for SRVFs) on the grid of ``f0``, so that
    ``cost = int |f0 - aligned|^2``.
    """

    warp: Warping
    rotation: np.ndarray = None
    cost: float = 0.0
    iterations: int = 1
    costs: list = field(default_factory=list)
    path: np.ndarray = None
    aligned: np.ndarray = None


# ---------------------------------------------------------------------------
# dynamic programming


@njit(cache=True, nogil=True)
def _segment_cost(f0, f1, i0, j0, a, b, dt, du, lam, pen_kind):
    k = f0.shape[1]
    n1 = f1.shape[0]
    m = (b * du) / (a * dt)
    rm = np.sqrt(m)
    acc = 0.0
    for q in range(a + 1):
        pos = j0 + (q * b) / a
        jl = int(np.floor(pos))
        fr = pos - jl
        if jl >= n1 - 1:
            jl = n1 - 2
            fr = 1.0
        e = 0.0
        for c in range(k):
            val = rm * ((1.0 - fr) * f1[jl, c] + fr * f1[jl + 1, c])
            diff = f0[i0 + q, c] - val
            e += diff * diff
        if q == 0 or q == a:
            e *= 0.5
        acc += e
    cost = acc * dt
    if lam > 0.0:
        if pen_kind == 0:
            pen = (1.0 - m) ** 2
        else:
            pen = (1.0 - rm) ** 2
        cost += lam * pen * a * dt
    return cost


@njit(cache=True, nogil=True)
def _dp_table(f0, f1, steps, lam, pen_kind):
    n0 = f0.shape[0]
    n1 = f1.shape[0]
    dt = 1.0 / (n0 - 1)
    du = 1.0 / (n1 - 1)
    E = np.full((n0, n1), np.inf)
    P = np.full((n0, n1), -1, dtype=np.int64)
    E[0, 0] = 0.0
    for i in range(1, n0):
        for j in range(1, n1):
            best = np.inf
            arg = -1
            for s in range(steps.shape[0]):
                a = steps[s, 0]
                b = steps[s, 1]
                pi = i - a
                pj = j - b
                if pi < 0 or pj < 0:
                    continue
                prev = E[pi, pj]
                if prev == np.inf:
                    continue
                c = prev + _segment_cost(f0, f1, pi, pj, a, b, dt, du, lam, pen_kind)
                if c < best:
                    best = c
                    arg = s
            E[i, j] = best
            P[i, j] = arg
    return E, P


def _as_2d(f):
    f = np.ascontiguousarray(np.asarray(f, dtype=float))
    return f[:, None] if f.ndim == 1 else f


def dp_path(f0, f1, penalty_weight=0.0, penalty="linear"):
    """Optimal lattice path and its cost.

    Returns
    -------
    path : ndarray, shape (K, 2)
        Lattice vertices ``(i, j)`` from ``(0, 0)`` to ``(N0-1, N1-1)``.
    cost : float
    """
    f0 = _as_2d(f0)
    f1 = _as_2d(f1)
    if f0.shape[0] < 8 or f1.shape[0] < 8:
        raise GridTooCoarse("dynamic programming needs at least 8 samples per function")
    if f0.shape[1] != f1.shape[1]:
        raise ValueError("functions must have the same number of components")
    if penalty_weight < 0:
        raise ValueError("penalty_weight must be non-negative")
    E, P = _dp_table(f0, f1, STEPS, float(penalty_weight), PENALTIES[penalty])
    i, j = f0.shape[0] - 1, f1.shape[0] - 1
    if not np.isfinite(E[i, j]):
        raise GridTooCoarse("grid sizes are incompatible with the step set")
    path = [(i, j)]
    while (i, j) != (0, 0):
        a, b = STEPS[P[i, j]]
        i, j = i - a, j - b
        path.append((i, j))
    return np.array(path[::-1]), float(E[-1, -1])


def path_to_warp(path, n0, n1):
    """Piecewise-linear warp through the lattice vertices, sampled on the f0 grid."""
    t = uniform_grid(n0)
    u = uniform_grid(n1)
    values = np.interp(t, t[path[:, 0]], u[path[:, 1]])
    values[0], values[-1] = 0.0, 1.0
    return Warping(t, values)


def dp_warp(f0, f1, penalty_weight=0.0, penalty="linear"):
    """Warp ``h`` minimizing ``int |f0 - sqrt(h') f1(h)|^2 (+ penalty)`` over lattice paths.

    Parameters
    ----------
    f0, f1 : array_like, shape (N0,) / (N0, k) and (N1,) / (N1, k)
        Samples on uniform grids of [0, 1].
    penalty_weight : float
        Weight of the penalty ``int (1 - h')^2`` (``penalty="linear"``) or
        ``int (1 - sqrt(h'))^2`` (``penalty="sqrt"``).

    Returns
    -------
    Warping
        Sampled on the grid of ``f0``.

    Raises
    ------
    GridTooCoarse
        If either function has fewer than 8 samples.
    """
    path, _ = dp_path(f0, f1, penalty_weight, penalty)
    return path_to_warp(path, len(f0), len(f1))


def path_samples(path, f1, n0):
    """Quadrature form of a lattice path.

    Returns ``(idx, weights, values, slopes)`` such that the data term of the
    path cost equals ``sum_k weights[k] * |f0[idx[k]] - values[k]|^2``.
    """
    f1 = _as_2d(f1)
    n1 = f1.shape[0]
    dt = 1.0 / (n0 - 1)
    du = 1.0 / (n1 - 1)
    idx, wts, vals, slopes = [], [], [], []
    for (i0, j0), (i1, j1) in zip(path[:-1], path[1:]):
        a, b = i1 - i0, j1 - j0
        m = (b * du) / (a * dt)
        q = np.arange(a + 1)
        pos = j0 + (q * b) / a
        jl = np.minimum(np.floor(pos).astype(int), n1 - 2)
        fr = pos - jl
        v = np.sqrt(m) * ((1.0 - fr)[:, None] * f1[jl] + fr[:, None] * f1[jl + 1])
        w = np.full(a + 1, dt)
        w[0] = w[-1] = 0.5 * dt
        idx.append(i0 + q)
        wts.append(w)
        vals.append(v)
        slopes.append(np.full(a + 1, m))
    return np.concatenate(idx), np.concatenate(wts), np.concatenate(vals), np.concatenate(slopes)


# ---------------------------------------------------------------------------
# rotations


def _rotation_from_cross(M):
    U, S, Vt = np.linalg.svd(M)
    sign = np.sign(np.linalg.det(U @ Vt))
    if sign < 0 and S.size > 1 and abs(S[-1] - S[-2]) <= 1e-10 * max(S[0], 1e-300):
        warnings.warn(
            "optimal rotation is not unique: smallest singular values tie at the sign flip",
            DegenerateCovarianceWarning,
            stacklevel=3,
        )
    D = np.ones(S.size)
    D[-1] = sign if sign != 0 else 1.0
    return (U * D) @ Vt


def procrustes_rotation(q0, q1, grid=None):
    """Rotation ``O`` in SO(d) minimizing ``int |q0 - O q1|^2``.

    SVD of the cross-covariance ``int q0 q1^T dt`` with the determinant
    sign correction. Emits :class:`DegenerateCovarianceWarning` when the
    minimizer is not unique.
    """
    q0 = _as_2d(getattr(q0, "q", q0))
    q1 = _as_2d(getattr(q1, "q", q1))
    grid = uniform_grid(len(q0)) if grid is None else grid
    w = _trapezoid_weights(grid)
    M = (q0 * w[:, None]).T @ q1
    return _rotation_from_cross(M)


def _trapezoid_weights(grid):
    grid = np.asarray(grid, dtype=float)
    w = np.zeros_like(grid)
    dg = np.diff(grid)
    w[:-1] += 0.5 * dg
    w[1:] += 0.5 * dg
    return w


def rigid_align(points, reference):
    """Rotate and translate ``points`` onto ``reference`` (least squares, no scaling)."""
    points = np.asarray(points, dtype=float)
    reference = np.asarray(reference, dtype=float)
    pc = points.mean(axis=0)
    rc = reference.mean(axis=0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateCovarianceWarning)
        O = _rotation_from_cross((reference - rc).T @ (points - pc))
    return (points - pc) @ O.T + rc


# ---------------------------------------------------------------------------
# continuous refinement
#
# A warp is stored through r = sqrt(h'), a point of the unit sphere of L^2
# with r > 0. The objective is
#     C(r) = int |f0 - r f1(h)|^2 + lam P(r),    h(t) = int_0^t r^2,
# and its L^2 gradient is
#     G(u) = -2 [2 r(u) int_u^1 A + (f0 - r f1(h)) . f1(h)](u) + lam P'(r(u))
# with A = r (f0 - r f1(h)) . f1'(h).

REFINE_MODES = 40
REFINE_ITER = 300
# lattice iterations before the descent takes over (it re-fits the rotation itself)
REFINE_LATTICE_ITER = 2


def _cosine_basis(t, modes):
    k = np.arange(modes + 1)
    B = np.sqrt(2.0) * np.cos(np.pi * k[:, None] * t[None, :])
    B[0] = 1.0
    return B


def _sphere_exp(r, v, w):
    nv = np.sqrt(max(np.sum(w * v * v), 0.0))
    if nv < 1e-15:
        return r
    return np.cos(nv) * r + np.sin(nv) * v / nv


class _WarpObjective:
    def __init__(self, f0, f1, lam, pen_kind):
        self.f0 = f0
        self.n0 = f0.shape[0]
        self.t = uniform_grid(self.n0)
        self.w = _trapezoid_weights(self.t)
        self.f1 = CubicSpline(uniform_grid(f1.shape[0]), f1, axis=0)
        self.df1 = self.f1.derivative()
        self.lam = lam
        self.pen_kind = pen_kind

    def warp_values(self, r):
        h = cumulative_trapezoid(r * r, self.t, initial=0.0)
        return np.clip(h / h[-1], 0.0, 1.0)

    def _penalty(self, r):
        if self.pen_kind == 0:
            return (1.0 - r * r) ** 2, -4.0 * r * (1.0 - r * r)
        return (1.0 - r) ** 2, -2.0 * (1.0 - r)

    def cost(self, r, grad=False):
        h = self.warp_values(r)
        f1h = self.f1(h)
        R = self.f0 - r[:, None] * f1h
        c = float(np.sum(self.w * np.sum(R * R, axis=1)))
        if self.lam > 0:
            pen, dpen = self._penalty(r)
            c += self.lam * float(np.sum(self.w * pen))
        if not grad:
            return c
        A = r * np.sum(R * self.df1(h), axis=1)
        tail = np.trapezoid(A, self.t) - cumulative_trapezoid(A, self.t, initial=0.0)
        G = -2.0 * (2.0 * r * tail + np.sum(R * f1h, axis=1))
        if self.lam > 0:
            G = G + self.lam * dpen
        return c, G


def _smooth_start(r, basis, w):
    # log map at the identity, truncated to the cosine modes, mapped back
    one = np.ones_like(r)
    cos = np.clip(np.sum(w * r), -1.0, 1.0)
    ang = np.arccos(cos)
    if ang < 1e-12:
        return one
    v = ang / np.sin(ang) * (r - cos * one)
    v = ((basis * w) @ v) @ basis
    v -= np.sum(w * v) * one
    return _sphere_exp(one, v, w)


def _slopes_on_grid(path, n0, n1):
    """``sqrt`` of the lattice slope at every f0 sample (averaged at vertices)."""
    dt = 1.0 / (n0 - 1)
    du = 1.0 / (n1 - 1)
    acc = np.zeros(n0)
    cnt = np.zeros(n0)
    for (i0, j0), (i1, j1) in zip(path[:-1], path[1:]):
        m = ((j1 - j0) * du) / ((i1 - i0) * dt)
        acc[i0 : i1 + 1] += np.sqrt(m)
        cnt[i0 : i1 + 1] += 1
    return acc / cnt


def refine_warp(
    f0, f1, path, penalty_weight=0.0, penalty="linear", modes=REFINE_MODES, max_iter=REFINE_ITER, tol=1e-12, start=None
):
    """Smooth warp improving on a lattice path for the same objective.

    Riemannian gradient descent on ``r = sqrt(h')`` over the unit sphere,
    with gradients projected on ``modes`` cosine modes and an Armijo
    backtracking step. Starts from the lattice warp truncated to those
    modes, or from ``start`` (samples of ``sqrt(h')``) when given.

    Returns
    -------
    warp : Warping
    r : ndarray
        ``sqrt(h')`` on the grid of ``f0``.
    cost : float
        Objective evaluated by trapezoid quadrature on the grid of ``f0``.
    """
    f0 = _as_2d(f0)
    f1 = _as_2d(f1)
    obj = _WarpObjective(f0, f1, float(penalty_weight), PENALTIES[penalty])
    r, cost, _ = _descend(obj, path, modes, max_iter, tol, start, rotate=False)
    return Warping(obj.t, obj.warp_values(r)), r, cost


def _descend(obj, path, modes, max_iter, tol, start, rotate):
    """Gradient descent behind :func:`refine_warp`.

    With ``rotate`` the rotation ``O`` minimizing ``int |f0 - O r f1(h)|^2``
    is re-fitted after every accepted step (``f0`` is replaced by ``O^T f0``
    inside the objective), which keeps the iteration monotone. Returns
    ``(r, cost, O)``.
    """
    w = obj.w
    f0 = obj.f0
    d = f0.shape[1]
    O = np.eye(d)
    basis = _cosine_basis(obj.t, min(modes, obj.n0 // 2))
    proj = basis * w

    if start is None:
        r = _smooth_start(_slopes_on_grid(path, obj.n0, obj.f1.x.size), basis, w)
    else:
        r = np.array(start, dtype=float)
    if np.any(r <= 0):
        r = np.ones(obj.n0)
    r = r / np.sqrt(np.sum(w * r * r))

    def fit_rotation(r):
        plain = obj.f1(obj.warp_values(r)) * r[:, None]
        O = _rotation_from_cross((f0 * w[:, None]).T @ plain)
        obj.f0 = f0 @ O
        return O

    if rotate:
        O = fit_rotation(r)
    cost, G = obj.cost(r, grad=True)
    step = 1.0
    for _ in range(max_iter):
        g = (proj @ G) @ basis
        g -= np.sum(w * g * r) * r
        gn2 = float(np.sum(w * g * g))
        if gn2 < 1e-30:
            break
        accepted = False
        while step > 1e-12:
            trial = _sphere_exp(r, -step * g, w)
            if np.all(trial > 0):
                trial /= np.sqrt(np.sum(w * trial * trial))
                c_new = obj.cost(trial)
                if c_new <= cost - 1e-4 * step * gn2:
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            break
        r = trial
        if rotate:
            O = fit_rotation(r)
        previous = cost
        cost, G = obj.cost(r, grad=True)
        step *= 2.0
        if previous - cost < tol * max(cost, 1e-300):
            break
    obj.f0 = f0
    return r, cost, O


# ---------------------------------------------------------------------------
# registration objectives


def _aligned(f1, r, t):
    """``f1 * h`` for ``h = int r^2`` (rescaled to end at 1), on the grid ``t``."""
    h = cumulative_trapezoid(r * r, t, initial=0.0)
    vals = CubicSpline(uniform_grid(f1.shape[0]), f1, axis=0)(np.clip(h / h[-1], 0.0, 1.0))
    return vals * (r / np.sqrt(h[-1]))[:, None]


def register_srvf(q0, q1, max_iter=20, tol=1e-8, refine=True):
    """Joint warp and rotation registration of two SRVFs.

    Alternates a Procrustes rotation step with a dynamic-programming warp
    step, starting with the rotation of the unwarped functions. Both steps
    minimize the same discretized objective, so the recorded costs never
    increase. Stops when the decrease falls below ``tol`` or after
    ``max_iter`` iterations.

    With ``refine`` the lattice stage stops after ``REFINE_LATTICE_ITER``
    iterations and its solution is improved by the descent of
    :func:`refine_warp`, re-fitting the rotation after every step; the
    result is kept only if it lowers the objective.
    """
    q0 = _as_2d(getattr(q0, "q", q0))
    q1 = _as_2d(getattr(q1, "q", q1))
    n0 = q0.shape[0]
    t = uniform_grid(n0)
    w = _trapezoid_weights(t)
    O = procrustes_rotation(q0, q1)
    costs = []
    path = None
    for it in range(1, max_iter + 1):
        path, _ = dp_path(q0, q1 @ O.T)
        idx, pw, vals, _ = path_samples(path, q1, n0)
        O = _rotation_from_cross((q0[idx] * pw[:, None]).T @ vals)
        resid = q0[idx] - vals @ O.T
        costs.append(float(np.sum(pw * np.sum(resid * resid, axis=1))))
        if len(costs) > 1 and costs[-2] - costs[-1] < tol:
            break
        if refine and it >= REFINE_LATTICE_ITER:
            break
    warp = path_to_warp(path, n0, q1.shape[0])
    r = _slopes_on_grid(path, n0, q1.shape[0])
    aligned = _aligned(q1, r, t) @ O.T
    cost = float(np.sum(w * np.sum((q0 - aligned) ** 2, axis=1)))
    if refine:
        obj = _WarpObjective(q0, q1, 0.0, 0)
        r_r, _, O_r = _descend(obj, path, REFINE_MODES, REFINE_ITER, 1e-12, None, rotate=True)
        al_r = _aligned(q1, r_r, t) @ O_r.T
        cost_r = float(np.sum(w * np.sum((q0 - al_r) ** 2, axis=1)))
        if cost_r < cost:
            warp, O, aligned, cost = Warping(t, obj.warp_values(r_r)), O_r, al_r, cost_r
    return RegistrationResult(
        warp=warp,
        rotation=O,
        cost=cost,
        iterations=len(costs),
        costs=costs,
        path=path,
        aligned=aligned,
    )


def _src_stack(r, weight):
    return np.column_stack([r.c, np.sqrt(weight) * r.psi])


def register_src(r0, r1, weight=1.0, refine=True):
    """Warp aligning two square-root curvature representations.

    One dynamic-programming pass on the stacked integrand ``(c, psi)``,
    optionally followed by :func:`refine_warp`; ``weight`` scales the speed
    term (1 gives the plain product objective). No rotation is involved:
    the representation is rotation invariant.
    """
    f0 = _src_stack(r0, weight)
    f1 = _src_stack(r1, weight)
    n0 = f0.shape[0]
    t = uniform_grid(n0)
    w = _trapezoid_weights(t)
    path, dp_cost = dp_path(f0, f1)
    warp = path_to_warp(path, n0, f1.shape[0])
    aligned = _aligned(f1, _slopes_on_grid(path, n0, f1.shape[0]), t)
    cost = float(np.sum(w * np.sum((f0 - aligned) ** 2, axis=1)))
    if refine:
        warp_r, r_r, cost_r = refine_warp(f0, f1, path)
        if cost_r < cost:
            warp, cost, aligned = warp_r, cost_r, _aligned(f1, r_r, t)
    return RegistrationResult(
        warp=warp,
        cost=cost,
        costs=[dp_cost],
        path=path,
        aligned=aligned,
    )


def register_src_arclength(theta0, theta1, n=512, penalty_weight=1.0, penalty="sqrt"):
    """Warp ``gamma`` of arc length aligning square-root normalized curvatures.

    Minimizes ``int |g0(s) - sqrt(gamma') g1(gamma(s))|^2 + w * P(gamma') ds``
    with ``g = theta / sqrt(|theta|)``. The default ``P = (1 - sqrt(gamma'))^2``
    makes the problem equal to the time-domain SRC registration under
    ``gamma = s1 o h o s0^{-1}``; ``penalty="linear"`` uses ``(1 - gamma')^2``.
    """
    from .representations import sqrt_normalize

    s = uniform_grid(n)
    g0 = sqrt_normalize(theta0(s))
    g1 = sqrt_normalize(theta1(s))
    return dp_warp(g0, g1, penalty_weight=penalty_weight, penalty=penalty)
