import numpy as np
import pytest

from frenetshape.estimation import FrenetCurvatures
from frenetshape.geom_core import Warping, uniform_grid
from frenetshape.synth import from_curvatures

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)


def random_rotation(d, rng):
    Q, R = np.linalg.qr(rng.normal(size=(d, d)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def random_warp(n, rng, amplitude=0.4, modes=3):
    """Smooth warp with ``h' = 1 + sum a_k cos(k pi t)``, ``sum |a_k| <= amplitude``."""
    t = uniform_grid(n)
    a = rng.uniform(-1.0, 1.0, size=modes)
    a *= amplitude / max(np.abs(a).sum(), 1e-12)
    k = np.arange(1, modes + 1)
    h = t + np.sum(a[:, None] * np.sin(np.pi * k[:, None] * t) / (np.pi * k[:, None]), axis=0)
    h[0], h[-1] = 0.0, 1.0
    return Warping(t, h)


def random_theta(rng, d=3):
    """Smooth admissible curvatures with |theta| bounded away from zero."""
    base = rng.uniform(3.0, 6.0, size=d - 1)
    amp = rng.uniform(0.5, 1.5, size=d - 1)
    freq = rng.uniform(0.5, 2.0, size=d - 1)
    phase = rng.uniform(0, 2 * np.pi, size=d - 1)

    def fn(s):
        s = np.asarray(s)[:, None]
        return base + amp * np.sin(2 * np.pi * freq * s + phase)

    return FrenetCurvatures.from_function(fn)


def random_curve(rng, d=3, n=512):
    return from_curvatures(random_theta(rng, d), n=n).curve


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
