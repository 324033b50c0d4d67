import numpy as np
import pytest

from saari.trig_harmonics import TrigLoop

SQRT3 = np.sqrt(3.0)


def equilateral(side=1.0):
    """Unit-mass equilateral triangle centred at the centroid."""
    r = side / SQRT3
    ang = np.pi / 2 + 2 * np.pi * np.arange(3) / 3
    return r * np.column_stack([np.cos(ang), np.sin(ang)])


def pair_loop(C, theta=0.0, T=2 * np.pi, A=1.0, masses=(1.0, 1.0)):
    """Two-body trigonometric loop whose single pair has the given A, C and phase."""
    da = np.array([np.sqrt(A * (1 + C)), 0.0])
    db = np.array([0.0, np.sqrt(A * (1 - C))])
    m1, m2 = masses
    w1, w2 = m2 / (m1 + m2), -m1 / (m1 + m2)
    loop = TrigLoop(masses, np.array([w1 * da, w2 * da]), np.array([w1 * db, w2 * db]), T)
    # the phase advances by 2ω per unit time
    return loop.time_shift(-theta / (2 * loop.omega))


def random_configuration(rng, n, d=2, min_sep=0.2):
    while True:
        q = rng.normal(size=(n, d))
        diffs = q[:, None] - q[None]
        dist = np.linalg.norm(diffs, axis=-1)[np.triu_indices(n, 1)]
        if dist.min() > min_sep:
            return q


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)


def rotating_equilateral():
    from saari.variational import relative_equilibrium

    return relative_equilibrium([1, 1, 1], equilateral())


def perturbed_equilateral(C):
    """Rotating equilateral loop with the relative sine vector of pair (0, 1) shrunk until its C equals ``C``."""
    from saari.trig_harmonics import pair_harmonics

    base = rotating_equilateral()

    def build(s):
        b = np.array(base.b)
        d = b[1] - b[0]
        b[1] -= s * d / 2
        b[0] += s * d / 2
        return TrigLoop(base.masses, base.a, b, base.T)

    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if pair_harmonics(build(mid))[0].C < C:
            lo = mid
        else:
            hi = mid
    return build(0.5 * (lo + hi))


def random_fourier_loop(rng, n=3, order=3, T=2 * np.pi, samples=256, min_sep=0.05, masses=None):
    """Random zero-mean planar loop with decaying harmonics, collision-free on the sample grid."""
    from saari.mechanics import pairwise_distances
    from saari.variational import FourierLoop

    decay = 1.0 / np.arange(1, order + 1) ** 1.5
    while True:
        m = rng.uniform(0.5, 2.0, n) if masses is None else np.asarray(masses, dtype=float)
        c = rng.normal(size=(n, order, 2)) * decay[None, :, None]
        s = rng.normal(size=(n, order, 2)) * decay[None, :, None]
        loop = FourierLoop(m, T, c, s)
        if pairwise_distances(loop.positions(loop.sample_times(samples))).min() > min_sep:
            return loop
