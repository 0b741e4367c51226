import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from conftest import random_rotation, random_warp
from frenetshape.errors import (
    DegenerateCurve,
    LogBranch,
    NonMonotoneWarp,
    NotFrenetCurve,
    ZeroSpeed,
)
from frenetshape.geom_core import (
    ArcLength,
    DiscreteCurve,
    Warping,
    apply_warp,
    arc_length,
    frenet_band,
    frenet_matrix,
    gram_schmidt_frames,
    integrate_frenet,
    l2_norm,
    normalize,
    resample_arclength,
    skew_norm,
    so_exp,
    so_log,
    uniform_grid,
)


def _random_skew(rng, d, scale=1.0):
    M = rng.normal(size=(d, d))
    return scale * (M - M.T) / 2


# ---------------------------------------------------------------------------
# DiscreteCurve and Warping


def test_curve_rejects_bad_grid():
    with pytest.raises(ValueError):
        DiscreteCurve(np.array([0.0, 0.5, 0.5, 1.0]), np.zeros((4, 2)))
    with pytest.raises(ValueError):
        DiscreteCurve(np.array([0.1, 0.5, 1.0]), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        DiscreteCurve(uniform_grid(4), np.zeros((4, 1)))


def test_curve_is_immutable():
    c = DiscreteCurve.from_points(np.arange(8.0).reshape(4, 2))
    with pytest.raises(ValueError):
        c.points[0, 0] = 1.0


def test_warping_rejects_non_monotone():
    t = uniform_grid(5)
    with pytest.raises(NonMonotoneWarp):
        Warping(t, np.array([0.0, 0.5, 0.4, 0.8, 1.0]))
    with pytest.raises(NonMonotoneWarp):
        Warping(t, np.array([0.0, 0.2, 0.4, 0.8, 0.9]))


def test_warping_inverse_composes_to_identity(rng):
    h = random_warp(401, rng)
    hinv = h.inverse()
    u = np.linspace(0, 1, 97)
    np.testing.assert_allclose(hinv(h(u)), u, atol=1e-6)


# ---------------------------------------------------------------------------
# normalize


def test_normalize_unit_segment_unchanged():
    t = uniform_grid(11)
    c = DiscreteCurve(t, np.stack([t, 0 * t], axis=1))
    np.testing.assert_allclose(normalize(c).points, c.points, atol=1e-15)


def test_normalize_translates_and_scales_segment():
    t = uniform_grid(11)
    c = DiscreteCurve(t, np.stack([3 + 0 * t, 3 + 2 * t], axis=1))
    out = normalize(c)
    np.testing.assert_allclose(out.points[0], 0.0)
    assert out.polyline_length() == pytest.approx(1.0)
    np.testing.assert_allclose(out.points[-1], [0.0, 1.0], atol=1e-15)


def test_normalize_circle_arc_matches_polyline_oracle():
    t = uniform_grid(200)
    pts = 2 * np.stack([np.cos(np.pi * t), np.sin(np.pi * t)], axis=1)
    oracle = np.sum(np.hypot(*np.diff(pts, axis=0).T))
    out = normalize(DiscreteCurve(t, pts))
    np.testing.assert_allclose(out.points, (pts - pts[0]) / oracle)
    assert out.polyline_length() == pytest.approx(1.0, abs=1e-14)


def test_normalize_degenerate():
    with pytest.raises(DegenerateCurve):
        normalize(DiscreteCurve(uniform_grid(5), np.ones((5, 3))))


# ---------------------------------------------------------------------------
# arc length and resampling


def test_arc_length_unit_speed():
    t = uniform_grid(101)
    c = DiscreteCurve(t, np.stack([np.cos(t), np.sin(t)], axis=1))
    arc = arc_length(normalize(c))
    np.testing.assert_allclose(arc.s, t, atol=1e-4)
    np.testing.assert_allclose(arc.psi, 1.0, atol=1e-4)
    assert np.trapezoid(arc.psi**2, t) == pytest.approx(1.0, abs=1e-12)


def test_arc_length_quadratic_speed():
    t = uniform_grid(1001)
    c = DiscreteCurve(t, np.stack([t**2, 0 * t], axis=1))
    arc = arc_length(c)
    np.testing.assert_allclose(arc.s, t**2, atol=1e-6)
    np.testing.assert_allclose(arc.psi, np.sqrt(2 * t), atol=1e-6)


def test_arc_length_stationary_interval():
    t = uniform_grid(21)
    x = np.minimum(t, 0.5) + np.maximum(t - 0.7, 0.0)
    with pytest.raises(ZeroSpeed):
        arc_length(DiscreteCurve(t, np.stack([x, 0 * x], axis=1)))


def test_arc_length_from_speed_normalizes():
    t = uniform_grid(51)
    arc = ArcLength.from_speed(t, 3 + np.sin(t))
    assert arc.s[-1] == 1.0
    assert np.trapezoid(arc.sdot, t) == pytest.approx(1.0)


def test_resample_unit_speed_is_identity():
    t = uniform_grid(300)
    c = normalize(DiscreteCurve(t, np.stack([np.cos(2 * t), np.sin(2 * t), t], axis=1)))
    out = resample_arclength(c, 300)
    assert np.abs(out.points - c.points).max() < 1e-6


def test_resample_quadratic_speed_uniform_spacing():
    t = uniform_grid(400)
    c = DiscreteCurve(t, np.stack([t**2, 0 * t], axis=1))
    out = resample_arclength(c, 101)
    gaps = np.diff(out.points[:, 0])
    assert gaps.max() / gaps.min() < 1 + 1e-3


def test_resample_two_points_gives_endpoints():
    t = uniform_grid(50)
    c = DiscreteCurve(t, np.stack([np.cos(t), np.sin(t)], axis=1))
    out = resample_arclength(c, 2)
    np.testing.assert_allclose(out.points, c.points[[0, -1]], atol=1e-12)


def test_resample_speed_ratio_smooth_curve():
    t = uniform_grid(256)
    c = DiscreteCurve(t, np.stack([np.cos(3 * t**2), np.sin(3 * t**2), t], axis=1))
    out = resample_arclength(c, 256)
    gaps = np.linalg.norm(np.diff(out.points, axis=0), axis=1)
    assert gaps.max() / gaps.min() < 1 + 1e-3


# ---------------------------------------------------------------------------
# Gram-Schmidt frames


def test_frames_planar_circle():
    t = uniform_grid(64)
    a = 2 * np.pi * t
    d1 = np.stack([-np.sin(a), np.cos(a)], axis=1)
    d2 = -np.stack([np.cos(a), np.sin(a)], axis=1)
    fp = gram_schmidt_frames(np.stack([d1, d2]))
    np.testing.assert_allclose(fp.frames[:, :, 0], d1, atol=1e-14)
    # N = +90 degree rotation of T, which points inward on a CCW circle
    np.testing.assert_allclose(fp.frames[:, :, 1], d2, atol=1e-14)


def test_frames_helix_analytic():
    a, b = 1.0, 0.5
    u = np.linspace(0, 4 * np.pi, 100)
    d1 = np.stack([-a * np.sin(u), a * np.cos(u), b + 0 * u], axis=1)
    d2 = np.stack([-a * np.cos(u), -a * np.sin(u), 0 * u], axis=1)
    d3 = np.stack([a * np.sin(u), -a * np.cos(u), 0 * u], axis=1)
    fp = gram_schmidt_frames(np.stack([d1, d2, d3]))
    assert fp.orthogonality_error() < 1e-12
    np.testing.assert_allclose(np.linalg.det(fp.frames), 1.0, atol=1e-12)
    np.testing.assert_allclose(fp.frames[:, :, 0], d1 / np.sqrt(a * a + b * b), atol=1e-14)
    # binormal of a right-handed helix is (b sin u, -b cos u, a) / c
    B = np.stack([b * np.sin(u), -b * np.cos(u), a + 0 * u], axis=1) / np.sqrt(a * a + b * b)
    np.testing.assert_allclose(fp.frames[:, :, 2], B, atol=1e-14)


def test_frames_straight_line_not_frenet():
    n = 20
    d1 = np.tile([1.0, 2.0, 0.5], (n, 1))
    d2 = np.zeros((n, 3))
    with pytest.raises(NotFrenetCurve) as info:
        gram_schmidt_frames(np.stack([d1, d2]))
    assert info.value.index == 0


def test_frames_orthonormal_in_higher_dimension(rng):
    d, n = 5, 30
    derivs = rng.normal(size=(d - 1, n, d))
    fp = gram_schmidt_frames(derivs)
    assert fp.orthogonality_error() < 1e-12
    np.testing.assert_allclose(np.linalg.det(fp.frames), 1.0, atol=1e-12)


# ---------------------------------------------------------------------------
# SO(d)


def test_so_exp_zero_is_identity():
    for d in (2, 3, 4):
        np.testing.assert_array_equal(so_exp(np.zeros((d, d))), np.eye(d))


def test_so_exp_planar_quarter_turn():
    A = np.array([[0.0, -np.pi / 2], [np.pi / 2, 0.0]])
    np.testing.assert_allclose(so_exp(A), [[0.0, -1.0], [1.0, 0.0]], atol=1e-15)


def test_so_exp_rodrigues_matches_series():
    A = np.zeros((3, 3))
    A[1, 0], A[0, 1] = 0.3, -0.3
    # scaling-and-squaring Taylor series as an independent oracle
    B = A / 2**10
    E = np.eye(3)
    term = np.eye(3)
    for k in range(1, 20):
        term = term @ B / k
        E = E + term
    for _ in range(10):
        E = E @ E
    np.testing.assert_allclose(so_exp(A), E, atol=1e-13)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_so_exp_matches_expm(d, rng):
    A = _random_skew(rng, d, 0.7)
    np.testing.assert_allclose(so_exp(A), expm(A), atol=1e-12)


def test_so_log_identity():
    for d in (2, 3, 4):
        np.testing.assert_array_equal(so_log(np.eye(d)), np.zeros((d, d)))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_so_log_round_trip(d, rng):
    for _ in range(20):
        A = _random_skew(rng, d)
        A *= rng.uniform(0.01, 2.9) / np.linalg.norm(A, 2)
        np.testing.assert_allclose(so_log(so_exp(A)), A, atol=1e-9)


def test_so_log_small_angle_series():
    A = _random_skew(np.random.default_rng(1), 3, 1e-7)
    np.testing.assert_allclose(so_log(so_exp(A)), A, atol=1e-16)


def test_so_log_branch_cut():
    R = np.diag([1.0, -1.0, -1.0])
    with pytest.raises(LogBranch):
        so_log(R)
    with pytest.raises(LogBranch):
        so_log(-np.eye(2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=5))
def test_frenet_matrix_norm_identity(theta):
    theta = np.array(theta)
    A = frenet_matrix(theta)
    np.testing.assert_array_equal(A, -A.T)
    assert abs(skew_norm(A) - np.linalg.norm(theta)) <= 1e-12 * max(1.0, np.linalg.norm(theta))
    np.testing.assert_array_equal(frenet_band(A), theta)


# ---------------------------------------------------------------------------
# warps


def test_apply_warp_identity():
    t = uniform_grid(64)
    f = np.stack([np.sin(3 * t), t**2], axis=1)
    h = Warping.identity(64)
    np.testing.assert_array_equal(apply_warp(f, h), f)
    np.testing.assert_allclose(apply_warp(f, h, "half-density"), f, atol=1e-14)


def test_apply_warp_half_density_square():
    t = uniform_grid(201)
    out = apply_warp(np.ones(201), Warping(t, t**2), "half-density")
    np.testing.assert_allclose(out, np.sqrt(2 * t), atol=1e-12)


def test_apply_warp_requires_warping():
    with pytest.raises(NonMonotoneWarp):
        apply_warp(np.ones(5), np.linspace(0, 1, 5))


def test_half_density_preserves_norm_and_distance(rng):
    n = 512
    t = uniform_grid(n)
    for _ in range(10):
        q0 = np.stack([np.sin(2 * np.pi * t * rng.uniform(1, 3)), np.cos(t * rng.uniform(1, 4))], axis=1)
        q1 = np.stack([t**2 * rng.normal(), np.exp(-t) * rng.normal()], axis=1)
        h = random_warp(n, rng)
        a = apply_warp(q0, h, "half-density")
        b = apply_warp(q1, h, "half-density")
        assert abs(l2_norm(a, t) - l2_norm(q0, t)) < 1e-4
        assert abs(l2_norm(a - b, t) - l2_norm(q0 - q1, t)) < 1e-4


# ---------------------------------------------------------------------------
# Frenet ODE


def test_integrate_frenet_circle():
    t = uniform_grid(257)
    kappa = 2 * np.pi
    frames, pts = integrate_frenet(t, np.full((257, 1), kappa), np.ones(257))
    # unit length, curvature 2 pi: a full circle of radius 1 / (2 pi)
    assert np.linalg.norm(pts[-1]) < 1e-4
    r = np.linalg.norm(pts - np.array([0.0, 1 / kappa]), axis=1)
    np.testing.assert_allclose(r, 1 / kappa, atol=1e-4)
    np.testing.assert_allclose(np.einsum("nji,njk->nik", frames, frames), np.broadcast_to(np.eye(2), frames.shape), atol=1e-13)


def test_integrate_frenet_respects_initial_frame(rng):
    t = uniform_grid(101)
    O = random_rotation(3, rng)
    x0 = rng.normal(size=3)
    rate = np.tile([3.0, 1.0], (101, 1))
    f_id, p_id = integrate_frenet(t, rate, np.ones(101))
    f_o, p_o = integrate_frenet(t, rate, np.ones(101), frame0=O, x0=x0)
    np.testing.assert_allclose(p_o, p_id @ O.T + x0, atol=1e-13)
