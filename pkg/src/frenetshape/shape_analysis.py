"""Shape distances, geodesics and distance matrices for the three frameworks.

``srvf``
    arc-cosine of the registered SRVF inner product (rotation and warp).
``theta``
    L^2 distance of the curvature functions; no registration.
``src``
    registered product distance ``d_psi + |c0 - c1 * h|``.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .errors import LogBranch, ShapeError
from .estimation import FrenetCurvatures, estimate_pipeline
from .geom_core import (
    DiscreteCurve,
    arc_length,
    l2_inner,
    l2_norm,
    normalize,
    so_exp,
    so_log,
    uniform_grid,
)
from .registration import (
    RegistrationResult,
    register_src,
    register_srvf,
    rigid_align,
)
from .representations import (
    GeodesicPath,
    SrcRepr,
    Srvf,
    curvature_distance,
    curvature_geodesic,
    sphere_distance,
    sphere_geodesic,
    src_curvatures,
    src_inverse,
    src_transform,
    srvf_inverse,
    srvf_transform,
    theta_inverse,
)

__all__ = [
    "METHODS",
    "Shape",
    "ShapeDistance",
    "DistanceMatrix",
    "prepare_shape",
    "shape_distance",
    "shape_distance_srvf",
    "shape_distance_theta",
    "shape_distance_src",
    "geodesic",
    "pairwise_matrix",
]

METHODS = ("srvf", "theta", "src")


@dataclass(frozen=True)
class Shape:
    """A normalized curve on a uniform grid with its arc length and curvatures."""

    curve: DiscreteCurve
    arc: object = None
    theta: FrenetCurvatures = None
    label: str = ""


@dataclass
class ShapeDistance:
    method: str
    value: float
    registration: RegistrationResult = None
    legs: dict = field(default_factory=dict)


@dataclass
class DistanceMatrix:
    """Symmetric matrix of pairwise distances; failed cells hold NaN."""

    labels: list
    values: np.ndarray
    method: str = ""
    errors: dict = field(default_factory=dict)


def prepare_shape(curve, theta=None, config=None, n=None, need_theta=True, label=""):
    """Normalize a curve, put it on a uniform grid and attach its curvatures.

    Parameters
    ----------
    curve : DiscreteCurve, Shape or SyntheticCurve
    theta : FrenetCurvatures, optional
        Known curvatures; when omitted and ``need_theta`` is set they are
        estimated with ``config``.
    n : int, optional
        Grid size; defaults to the size of the input grid.
    """
    if isinstance(curve, Shape):
        if n is None or curve.curve.n == n:
            if curve.theta is not None or not need_theta:
                return curve
            theta = curve.theta if theta is None else theta
        label = label or curve.label
        curve = curve.curve
    elif hasattr(curve, "curve") and hasattr(curve, "theta"):
        curve = curve.curve
    n = curve.n if n is None else n
    curve = normalize(curve.on_grid(uniform_grid(n)))
    arc = None
    if theta is None and need_theta:
        arc, theta = estimate_pipeline(curve, config)
    if arc is None:
        arc = arc_length(curve)
    return Shape(curve, arc, theta, label)


def _pair(x0, x1, need_theta, config, n):
    if n is None:
        n0 = x0.curve.n if isinstance(x0, (Shape,)) or hasattr(x0, "curve") else x0.n
        n1 = x1.curve.n if isinstance(x1, (Shape,)) or hasattr(x1, "curve") else x1.n
        n = max(n0, n1)
    return (
        prepare_shape(x0, config=config, n=n, need_theta=need_theta),
        prepare_shape(x1, config=config, n=n, need_theta=need_theta),
    )


def shape_distance_srvf(x0, x1, n=None):
    """Elastic SRVF shape distance ``min_{O, h} arccos <q0, O (q1 * h)>``."""
    s0, s1 = _pair(x0, x1, False, None, n)
    q0 = srvf_transform(s0.curve).q
    q1 = srvf_transform(s1.curve).q
    reg = register_srvf(q0, q1)
    grid = s0.curve.grid
    inner = l2_inner(q0, reg.aligned, grid)
    value = float(np.arccos(np.clip(inner / l2_norm(reg.aligned, grid), -1.0, 1.0)))
    return ShapeDistance("srvf", value, reg, {"inner_product": inner})


def shape_distance_theta(x0, x1, config=None, n=None):
    """L^2 distance between the curvature functions of arc length."""
    s0, s1 = _pair(x0, x1, True, config, n)
    return ShapeDistance("theta", curvature_distance(s0.theta, s1.theta))


def _src_pair(s0, s1):
    return src_transform(s0.arc, s0.theta), src_transform(s1.arc, s1.theta)


def shape_distance_src(x0, x1, config=None, n=None, weight=1.0):
    """SRC shape distance ``d_psi(psi0, psi1 * h) + |c0 - c1 * h|`` at the optimal warp.

    The two legs are reported in ``legs``.
    """
    s0, s1 = _pair(x0, x1, True, config, n)
    r0, r1 = _src_pair(s0, s1)
    reg = register_src(r0, r1, weight=weight)
    grid = s0.curve.grid
    c1h = reg.aligned[:, :-1]
    psi1h = reg.aligned[:, -1] / np.sqrt(weight)
    d_psi = sphere_distance(r0.psi, psi1h, grid)
    d_c = float(l2_norm(r0.c - c1h, grid))
    return ShapeDistance("src", d_psi + d_c, reg, {"d_psi": d_psi, "d_c": d_c})


def shape_distance(method, x0, x1, config=None, n=None):
    if method == "srvf":
        return shape_distance_srvf(x0, x1, n=n)
    if method == "theta":
        return shape_distance_theta(x0, x1, config=config, n=n)
    if method == "src":
        return shape_distance_src(x0, x1, config=config, n=n)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


# ---------------------------------------------------------------------------
# geodesics


def _unit(f, grid):
    return f / l2_norm(f, grid)


def geodesic(method, x0, x1, taus, config=None, n=None):
    """Geodesic path between two shapes, reconstructed as curves.

    srvf
        great circle from ``q0`` to ``O (q1 * h)``; snapshots by SRVF
        inversion, rotated by ``exp(tau log O^T)`` so that the last one
        is the (warped) target in its own orientation.
    theta
        straight line between curvature functions with the speed of ``x0``
        held fixed.
    src
        great circle between ``psi0`` and ``psi1 * h``, straight line between
        ``c0`` and ``c1 * h``.

    For ``theta`` and ``src`` snapshots are integrated from the identity frame
    and rigidly aligned to ``x0`` for display; ``curvatures`` holds the
    curvature function carried by each representation.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    s0, s1 = _pair(x0, x1, method != "srvf", config, n)
    grid = s0.curve.grid
    out = GeodesicPath(method, taus, [], [])

    if method == "srvf":
        q0 = srvf_transform(s0.curve).q
        q1 = srvf_transform(s1.curve).q
        reg = register_srvf(q0, q1)
        O = reg.rotation
        q1w = _unit(reg.aligned, grid)
        try:
            back = so_log(O.T)
        except LogBranch:
            back = np.zeros_like(O)
            out.meta["display_rotation"] = "identity (rotation angle at pi)"
        out.warp, out.rotation = reg.warp, O
        for tau in taus:
            q = sphere_geodesic(q0, q1w, tau, grid)
            pts = srvf_inverse(Srvf(grid, q)).points
            out.snapshots.append(DiscreteCurve(grid, pts @ so_exp(tau * back).T))
            out.curvatures.append(None)
        out.meta["alignment"] = "snapshots rotated by exp(tau log O^T) for display"
        return out

    if method == "theta":
        arc0 = s0.arc
        for tau in taus:
            th = curvature_geodesic(s0.theta, s1.theta, tau)
            try:
                rec = theta_inverse(arc0, th)
                out.snapshots.append(DiscreteCurve(grid, rigid_align(rec.points, s0.curve.points)))
                out.curvatures.append(th)
            except ShapeError as exc:
                out.errors[float(tau)] = str(exc)
                out.snapshots.append(None)
                out.curvatures.append(th)
        out.meta["alignment"] = "snapshots rigidly aligned to the source curve for display"
        return out

    r0, r1 = _src_pair(s0, s1)
    reg = register_src(r0, r1)
    psi1 = _unit(reg.aligned[:, -1], grid)
    c1 = reg.aligned[:, :-1]
    psi0 = _unit(r0.psi, grid)
    out.warp = reg.warp
    for tau in taus:
        try:
            rt = SrcRepr(grid, sphere_geodesic(psi0, psi1, tau, grid), (1.0 - tau) * r0.c + tau * c1)
            rec = src_inverse(rt)
            out.snapshots.append(DiscreteCurve(grid, rigid_align(rec.points, s0.curve.points)))
            out.curvatures.append(src_curvatures(rt))
        except ShapeError as exc:
            out.errors[float(tau)] = str(exc)
            out.snapshots.append(None)
            out.curvatures.append(None)
    out.meta["alignment"] = "snapshots rigidly aligned to the source curve for display"
    return out


# ---------------------------------------------------------------------------
# distance matrices


def _directed(method, a, b):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return shape_distance(method, a, b).value


def _pair_job(method, i, j, a, b):
    try:
        if method == "theta":
            return i, j, _directed(method, a, b), None
        return i, j, 0.5 * (_directed(method, a, b) + _directed(method, b, a)), None
    except ShapeError as exc:
        return i, j, np.nan, f"{type(exc).__name__}: {exc}"


def pairwise_matrix(curves, method, config=None, n=None, jobs=1, labels=None):
    """Pairwise distances of a collection of curves.

    Registered methods are symmetrized by averaging both directions. Pairs
    (or curves) that fail get NaN cells and an entry in ``errors`` instead of
    aborting the whole batch.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    k = len(curves)
    if k < 2:
        raise ValueError("need at least two curves")
    labels = list(labels) if labels is not None else [str(i) for i in range(k)]
    if n is None:
        n = max(c.curve.n if hasattr(c, "curve") else c.n for c in curves)
    shapes, errors = [], {}
    for i, c in enumerate(curves):
        try:
            shape = prepare_shape(c, config=config, n=n, need_theta=method != "srvf")
            if method == "src":
                src_transform(shape.arc, shape.theta)
            shapes.append(shape)
        except ShapeError as exc:
            shapes.append(None)
            errors[(i, i)] = f"{type(exc).__name__}: {exc}"
    values = np.zeros((k, k))
    todo = []
    for i in range(k):
        for j in range(i + 1, k):
            if shapes[i] is None or shapes[j] is None:
                values[i, j] = values[j, i] = np.nan
            else:
                todo.append((i, j))
    for i in range(k):
        if shapes[i] is None:
            values[i, i] = np.nan
    results = Parallel(n_jobs=jobs)(
        delayed(_pair_job)(method, i, j, shapes[i], shapes[j]) for i, j in todo
    )
    for i, j, v, err in results:
        values[i, j] = values[j, i] = v
        if err is not None:
            errors[(i, j)] = err
    return DistanceMatrix(labels, values, method, errors)
