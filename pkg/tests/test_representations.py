import numpy as np
import pytest

from conftest import random_rotation, random_theta
from frenetshape.errors import (
    AntipodalPoints,
    NotFrenetCurve,
    PositivityViolated,
    VanishingCurvature,
    ZeroSpeed,
)
from frenetshape.estimation import FrenetCurvatures
from frenetshape.geom_core import ArcLength, DiscreteCurve, l2_norm, uniform_grid
from frenetshape.registration import rigid_align
from frenetshape.representations import (
    SrcRepr,
    Srvf,
    curvature_distance,
    curvature_geodesic,
    psi_distance,
    sphere_geodesic,
    sqrt_normalize,
    src_curvatures,
    src_inverse,
    src_transform,
    srvf_inverse,
    srvf_transform,
    theta_inverse,
)
from frenetshape.synth import from_curvatures


def test_srvf_straight_segment_is_constant():
    t = uniform_grid(50)
    q = srvf_transform(DiscreteCurve(t, np.stack([3 * t, 4 * t], axis=1))).q
    np.testing.assert_allclose(q, np.tile([0.6, 0.8], (50, 1)), atol=1e-12)


def test_srvf_quadratic_speed():
    # x = (t^2, 0): q = sqrt(2 t) after scaling to unit length
    t = uniform_grid(401)
    q = srvf_transform(DiscreteCurve(t, np.stack([t**2, 0 * t], axis=1))).q
    np.testing.assert_allclose(q[1:, 0], np.sqrt(2 * t[1:]), atol=2e-3)
    np.testing.assert_allclose(q[:, 1], 0.0)


def test_srvf_unit_norm_and_scale_invariance(rng):
    c = from_curvatures(random_theta(rng), n=300).curve
    q0 = srvf_transform(c)
    q1 = srvf_transform(DiscreteCurve(c.grid, 7.0 * c.points + 1.0))
    assert abs(q0.norm() - 1.0) < 1e-12
    np.testing.assert_allclose(q0.q, q1.q, atol=1e-12)


def test_srvf_zero_speed_rejected():
    t = uniform_grid(30)
    x = np.minimum(t, 0.4)
    with pytest.raises(ZeroSpeed):
        srvf_transform(DiscreteCurve(t, np.stack([x, x**2], axis=1)))


def test_srvf_round_trip(rng):
    c = from_curvatures(random_theta(rng), n=512).curve
    q = srvf_transform(c)
    back = srvf_transform(srvf_inverse(q))
    assert l2_norm(q.q - back.q, q.grid) < 1e-3


def test_srvf_inverse_of_constant():
    t = uniform_grid(20)
    x = srvf_inverse(Srvf(t, np.tile([0.0, 1.0], (20, 1))))
    np.testing.assert_allclose(x.points, np.stack([0 * t, t], axis=1), atol=1e-14)


def test_psi_distance_known_value():
    t = uniform_grid(20001)
    d = psi_distance(np.ones_like(t), np.sqrt(2 * t), t)
    assert d == pytest.approx(np.arccos(2 * np.sqrt(2) / 3), abs=1e-5)
    assert d == pytest.approx(0.3398, abs=1e-4)


def test_sphere_geodesic_norm_and_endpoints(rng):
    t = uniform_grid(257)
    f0 = np.sqrt(1 + 0.5 * np.sin(2 * np.pi * t))
    f1 = np.sqrt(1 + 0.9 * np.cos(3 * np.pi * t) ** 2)
    f0 /= l2_norm(f0, t)
    f1 /= l2_norm(f1, t)
    for tau in np.linspace(0, 1, 11):
        g = sphere_geodesic(f0, f1, tau, t)
        assert abs(l2_norm(g, t) - 1.0) < 1e-6
    np.testing.assert_allclose(sphere_geodesic(f0, f1, 0.0, t), f0, atol=1e-14)
    np.testing.assert_allclose(sphere_geodesic(f0, f1, 1.0, t), f1, atol=1e-12)


def test_sphere_geodesic_antipodal():
    t = uniform_grid(11)
    f = np.ones_like(t)
    with pytest.raises(AntipodalPoints):
        sphere_geodesic(f, -f, 0.5, t)


def test_sqrt_normalize_cases():
    with pytest.raises(NotFrenetCurve):
        sqrt_normalize(np.zeros((10, 2)))
    vals = np.stack([np.linspace(-1, 1, 11), np.zeros(11)], axis=1)
    with pytest.raises(VanishingCurvature):
        sqrt_normalize(vals)
    # planar signed curvature may cross zero
    planar = sqrt_normalize(np.linspace(-4, 4, 9))
    np.testing.assert_allclose(planar[:, 0], np.sign(np.linspace(-4, 4, 9)) * 2 * np.sqrt(np.abs(np.linspace(-1, 1, 9))))


def test_src_identity(rng):
    theta = random_theta(rng)
    t = uniform_grid(300)
    arc = ArcLength.from_speed(t, 1 + 0.5 * t)
    r = src_transform(arc, theta)
    lhs = r.c * np.linalg.norm(r.c, axis=1, keepdims=True)
    np.testing.assert_allclose(lhs, arc.sdot[:, None] * theta(arc.s), rtol=1e-12)
    np.testing.assert_allclose(r.psi**2, arc.sdot)


def test_src_requires_positive_curvature():
    theta = FrenetCurvatures.constant([-1.0, 2.0])
    arc = ArcLength.from_speed(uniform_grid(50), np.ones(50))
    with pytest.raises(PositivityViolated):
        src_transform(arc, theta)


def test_src_inverse_circle():
    t = uniform_grid(400)
    c = np.full((400, 1), np.sqrt(2 * np.pi))
    x = src_inverse(SrcRepr(t, np.ones(400), c))
    radius = 1 / (2 * np.pi)
    assert np.linalg.norm(x.points[-1] - x.points[0]) < 1e-4
    centre = np.array([0.0, radius])
    np.testing.assert_allclose(np.linalg.norm(x.points - centre, axis=1), radius, atol=1e-5)


def test_src_round_trip(rng):
    syn = from_curvatures(random_theta(rng), n=512)
    t = syn.curve.grid
    arc = ArcLength.from_speed(t, np.ones_like(t))
    x = src_inverse(src_transform(arc, syn.theta))
    aligned = rigid_align(x.points, syn.curve.points)
    assert np.linalg.norm(aligned - syn.curve.points, axis=1).max() < 1e-3


def test_src_curvatures_recover_theta(rng):
    theta = random_theta(rng)
    t = uniform_grid(400)
    arc = ArcLength.from_speed(t, 1 + 0.8 * t**2)
    back = src_curvatures(src_transform(arc, theta))
    s = uniform_grid(201)
    np.testing.assert_allclose(back(s), theta(s), rtol=1e-3)


def test_theta_inverse_matches_src_inverse(rng):
    theta = random_theta(rng)
    t = uniform_grid(300)
    arc = ArcLength.from_speed(t, 1 + t)
    a = theta_inverse(arc, theta)
    b = src_inverse(src_transform(arc, theta))
    np.testing.assert_allclose(a.points, b.points, atol=1e-10)


def test_theta_inverse_rigid_frame(rng):
    theta = random_theta(rng)
    arc = ArcLength.from_speed(uniform_grid(200), np.ones(200))
    Q = random_rotation(3, rng)
    a = theta_inverse(arc, theta)
    b = theta_inverse(arc, theta, frame0=Q, x0=np.array([1.0, 2.0, 3.0]))
    np.testing.assert_allclose(b.points, a.points @ Q.T + [1.0, 2.0, 3.0], atol=1e-12)


def test_curvature_distance_and_geodesic():
    a = FrenetCurvatures.constant([2.0, 1.0])
    b = FrenetCurvatures.constant([5.0, -3.0])
    assert curvature_distance(a, b) == pytest.approx(5.0)
    mid = curvature_geodesic(a, b, 0.25)
    np.testing.assert_allclose(mid(np.array([0.3])), [[2.75, 0.0]])
    assert curvature_distance(a, mid) + curvature_distance(mid, b) == pytest.approx(5.0)


def test_curvature_geodesic_on_shared_basis():
    from frenetshape.estimation import RawCurvatureSamples, smooth_curvatures

    m = uniform_grid(200)
    a = smooth_curvatures(RawCurvatureSamples(m, (1 + m)[:, None], np.ones(200)), lam=1e-6)
    b = smooth_curvatures(RawCurvatureSamples(m, (3 - m**2)[:, None], np.ones(200)), lam=1e-6)
    g = curvature_geodesic(a, b, 0.5)
    assert g.spline is not None
    s = uniform_grid(51)
    np.testing.assert_allclose(g(s), 0.5 * (a(s) + b(s)), atol=1e-12)
