"""Synthetic curves with known Frenet curvatures.

Generators return a :class:`SyntheticCurve`: the sampled curve, its
ground-truth curvatures as a function of normalized arc length (when known)
and the generating parameters.
"""

from dataclasses import dataclass, field

import numpy as np

from .estimation import FrenetCurvatures, check_admissible
from .geom_core import DiscreteCurve, integrate_frenet, normalize, uniform_grid

__all__ = [
    "SyntheticCurve",
    "bump",
    "peak_curvature",
    "peak_loop",
    "peak_loop_set",
    "spiral2d",
    "helix3d",
    "from_curvatures",
]

PEAK_PROFILE = "(1 - u^2)^3 on |u| < 1, u = 2 (s - location) / width"


@dataclass(frozen=True)
class SyntheticCurve:
    curve: DiscreteCurve
    theta: FrenetCurvatures = None
    params: dict = field(default_factory=dict)


def bump(u):
    """C^2 compact bump ``(1 - u^2)^3`` on ``|u| < 1``, peak value 1 at 0."""
    u = np.asarray(u, dtype=float)
    return np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 3, 0.0)


def peak_curvature(location, amplitude, width):
    """Single-peak curvature: ``amplitude`` at ``location``, support of length ``width``."""

    def fn(s):
        return amplitude * bump(2.0 * (np.asarray(s) - location) / width)

    return FrenetCurvatures.from_function(fn, n=8193)


def _add_noise(points, noise_sigma, seed):
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        points = points + rng.normal(0.0, noise_sigma, size=points.shape)
    return points


def from_curvatures(theta, speed=None, n=512, frame0=None, x0=None, substeps=16, noise_sigma=0.0, seed=None):
    """Integrate the Frenet-Serret equations for prescribed curvatures.

    Parameters
    ----------
    theta : FrenetCurvatures or callable
        Curvatures as a function of normalized arc length.
    speed : callable, optional
        Speed profile ``t -> sdot(t) > 0``; rescaled to total length 1.
        Unit speed when omitted.
    n : int
        Number of output samples on the uniform grid of [0, 1].
    substeps : int
        Integration substeps per output interval.

    The noiseless curve has length 1 and starts at ``x0`` (origin by
    default). With ``noise_sigma > 0`` Gaussian noise is added to the points
    which are then normalized.
    """
    if not isinstance(theta, FrenetCurvatures):
        theta = FrenetCurvatures.from_function(theta)
    check_admissible(theta)
    tf = uniform_grid((n - 1) * substeps + 1)
    if speed is None:
        sdot = np.ones_like(tf)
    else:
        sdot = np.asarray(speed(tf), dtype=float)
        if np.any(sdot <= 0):
            raise ValueError("speed profile must be positive")
    sdot = sdot / np.trapezoid(sdot, tf)
    s = np.concatenate([[0.0], np.cumsum(0.5 * (sdot[1:] + sdot[:-1]) * np.diff(tf))])
    s[-1] = 1.0
    rate = sdot[:, None] * theta(s)
    _, pts = integrate_frenet(tf, rate, sdot, frame0=frame0, x0=x0)
    pts = pts[::substeps]
    curve = DiscreteCurve(uniform_grid(n), pts)
    if noise_sigma > 0:
        curve = normalize(DiscreteCurve(curve.grid, _add_noise(curve.points, noise_sigma, seed)))
    return SyntheticCurve(curve, theta, {"kind": "from_curvatures", "n": n, "noise_sigma": noise_sigma, "seed": seed})


def peak_loop(location=0.5, amplitude=60.5, width=0.15, n=512, noise_sigma=0.0, seed=None):
    """Planar curve whose signed curvature has a single peak.

    The curvature is a C^2 polynomial bump (see ``PEAK_PROFILE``) of height
    ``amplitude`` centred at ``location`` and vanishing outside an interval
    of length ``width``. The curve is integrated at unit speed, so it is a
    straight wire with one loop-like bend.
    """
    if not 0.0 < location < 1.0:
        raise ValueError("location must lie in (0, 1)")
    if width <= 0:
        raise ValueError("width must be positive")
    if n < 50:
        raise ValueError("need at least 50 samples")
    theta = peak_curvature(location, amplitude, width)
    out = from_curvatures(theta, n=n, noise_sigma=noise_sigma, seed=seed)
    params = {
        "kind": "peak_loop",
        "location": location,
        "amplitude": amplitude,
        "width": width,
        "n": n,
        "noise_sigma": noise_sigma,
        "seed": seed,
        "profile": PEAK_PROFILE,
    }
    return SyntheticCurve(out.curve, theta, params)


def peak_loop_set(k=20, amplitude=60.5, width=0.15, n=512, low=0.1, high=0.9, seed=0):
    """``k`` peak loops with random peak locations in ``[low, high]``, sorted by location."""
    rng = np.random.default_rng(seed)
    locs = np.sort(rng.uniform(low, high, size=k))
    return [peak_loop(float(loc), amplitude, width, n) for loc in locs]


def spiral2d(spins=1.0, scale=1.0, n=512, noise_sigma=0.0, seed=None):
    """Archimedean spiral ``r = scale * phi``, ``phi`` in ``[pi, pi + 2 pi spins]``.

    Starting half a turn away from the centre keeps the total turning close
    to ``2 pi spins``. The ground-truth curvature is computed on a dense
    sampling of the analytic curve.
    """
    if spins <= 0:
        raise ValueError("spins must be positive")
    phi0, phi1 = np.pi, np.pi + 2.0 * np.pi * spins

    def points_at(t):
        phi = phi0 + (phi1 - phi0) * t
        r = scale * phi
        return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=1)

    t = uniform_grid(n)
    pts = _add_noise(points_at(t), noise_sigma, seed)
    curve = normalize(DiscreteCurve(t, pts))

    phi = np.linspace(phi0, phi1, 20001)
    ds = scale * np.sqrt(phi**2 + 1.0)
    s = np.concatenate([[0.0], np.cumsum(0.5 * (ds[1:] + ds[:-1]) * np.diff(phi))])
    length = s[-1]
    kappa = (phi**2 + 2.0) / (scale * (phi**2 + 1.0) ** 1.5) * length
    theta = FrenetCurvatures.from_samples(s / length, kappa)
    params = {"kind": "spiral2d", "spins": spins, "scale": scale, "n": n, "noise_sigma": noise_sigma, "seed": seed}
    return SyntheticCurve(curve, theta, params)


def helix3d(radius=1.0, pitch=0.5, spins=1.0, n=512, noise_sigma=0.0, seed=None):
    """Circular helix ``(a cos u, a sin u, b u)``, ``u`` in ``[0, 2 pi spins]``.

    After length normalization the curvature and torsion are the constants
    ``a L / (a^2 + b^2)`` and ``b L / (a^2 + b^2)`` with ``L`` the original
    length.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    t = uniform_grid(n)
    u = 2.0 * np.pi * spins * t
    pts = np.stack([radius * np.cos(u), radius * np.sin(u), pitch * u], axis=1)
    pts = _add_noise(pts, noise_sigma, seed)
    curve = normalize(DiscreteCurve(t, pts))
    c2 = radius**2 + pitch**2
    length = 2.0 * np.pi * spins * np.sqrt(c2)
    theta = FrenetCurvatures.constant([radius * length / c2, pitch * length / c2])
    params = {"kind": "helix3d", "radius": radius, "pitch": pitch, "spins": spins, "n": n, "noise_sigma": noise_sigma, "seed": seed}
    return SyntheticCurve(curve, theta, params)
