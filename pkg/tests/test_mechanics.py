import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saari.errors import CollisionError, ValidationError
from saari.mechanics import (
    Configuration,
    MassVector,
    central_config_residual,
    dump_configuration,
    kinetic_energy,
    lagrangian,
    load_configuration,
    moment_of_inertia,
    newton_residual,
    potential,
    potential_gradient,
    project_center_of_mass,
    total_energy,
)

from conftest import equilateral, random_configuration

PAIR = np.array([[-0.5, 0.0], [0.5, 0.0]])


def test_potential_examples():
    assert potential([1, 1], PAIR) == pytest.approx(1.0, abs=1e-15)
    assert potential([1, 1], [[0, 0], [0, 2]]) == pytest.approx(0.5, abs=1e-15)
    assert potential([1, 1, 1], equilateral()) == pytest.approx(3.0, rel=1e-14)


def test_potential_collision():
    with pytest.raises(CollisionError):
        potential([1, 1], [[1.0, 2.0], [1.0, 2.0]])
    with pytest.raises(CollisionError):
        potential([1, 1, 1], [[0, 0], [1, 0], [1 + 1e-14, 0]])


def test_moment_of_inertia_examples():
    assert moment_of_inertia([1, 1], PAIR) == pytest.approx(0.5)
    # centroid distance of a unit equilateral triangle is 1/sqrt(3)
    assert moment_of_inertia([1, 1, 1], equilateral()) == pytest.approx(1.0, rel=1e-14)
    assert moment_of_inertia([1, 2, 3], np.zeros((3, 2))) == 0.0


def test_kinetic_energy_examples():
    assert kinetic_energy([2.0], [[3.0, 4.0]]) == 25.0
    assert kinetic_energy([1, 1], np.zeros((2, 2))) == 0.0
    assert kinetic_energy([1, 1], [[1, 0], [-1, 0]]) == 1.0


def test_lagrangian_examples():
    snap = lagrangian([1, 1], PAIR, np.zeros((2, 2)))
    assert (snap.L, snap.lam) == pytest.approx((1.0, 2.0))
    snap = lagrangian([1, 1, 1], equilateral(), np.zeros((3, 2)))
    assert snap.L == pytest.approx(3.0, rel=1e-14)
    assert snap.lam == pytest.approx(3.0, rel=1e-14)
    snap = lagrangian([1, 1], PAIR, [[0, 1], [0, -1]])
    assert (snap.K, snap.L) == pytest.approx((1.0, 2.0))
    assert snap.L == snap.K + snap.U
    assert snap.E == pytest.approx(0.0)
    assert total_energy([1, 1], PAIR, [[0, 1], [0, -1]]) == pytest.approx(0.0)


def test_newton_residual_examples():
    assert newton_residual([1, 1], PAIR, [[1, 0], [-1, 0]]) == pytest.approx(0.0, abs=1e-15)
    q = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
    force = np.linalg.norm(potential_gradient([1, 1, 1], q), axis=1).max()
    assert newton_residual([1, 1, 1], q, np.zeros((3, 2))) == pytest.approx(force)
    assert force > 0


def test_central_config_residual_examples():
    assert central_config_residual([1, 1, 1], equilateral()) < 1e-14
    for sep in (0.1, 1.0, 7.0):
        q = project_center_of_mass([1, 3], [[0, 0], [sep, 0.3 * sep]])
        assert central_config_residual([1, 3], q) < 1e-14
    iso = project_center_of_mass([1, 1, 1], [[-0.5, 0], [0.5, 0], [0, 1.5]])
    # 0.638697804738... from a 30-digit loop-by-loop evaluation
    assert central_config_residual([1, 1, 1], iso) == pytest.approx(0.6386978047381976, rel=1e-12)


def test_project_center_of_mass_examples():
    q = equilateral()
    np.testing.assert_allclose(project_center_of_mass([1, 1, 1], q), q, atol=1e-16)
    np.testing.assert_allclose(project_center_of_mass([1, 1], [[0, 0], [2, 0]]), [[-1, 0], [1, 0]])
    np.testing.assert_allclose(project_center_of_mass([1, 3], [[0, 0], [4, 0]]), [[-3, 0], [1, 0]])


def test_types_validate():
    with pytest.raises(ValidationError):
        MassVector([1.0])
    with pytest.raises(ValidationError):
        MassVector([1.0, 0.0])
    with pytest.raises(ValidationError):
        Configuration(np.zeros((3, 4)))
    c = Configuration([[0, 0], [1, 0]])
    assert c.dim == 2 and c.is_collision_free()
    assert not Configuration([[1, 1], [1, 1]]).is_collision_free()
    assert Configuration([[-1, 0], [1, 0]]).is_centered([1, 1])
    assert not Configuration([[0, 0], [1, 0]]).is_centered([1, 1])
    assert Configuration([0.0, 1.0, 3.0]).dim == 1


def test_json_round_trip():
    q = equilateral()
    text = json.dumps(dump_configuration([1, 2, 3], q))
    m, c = load_configuration(json.loads(text))
    np.testing.assert_array_equal(np.asarray(m), [1, 2, 3])
    np.testing.assert_array_equal(c.q, q)
    assert json.loads(text)["dim"] == 2
    with pytest.raises(ValidationError):
        load_configuration({"masses": [1, -1], "positions": [[0, 0], [1, 0]]})


def test_batch_evaluation_matches_single(rng):
    m = np.array([1.0, 2.0, 0.5])
    qs = np.stack([random_configuration(rng, 3) for _ in range(5)])
    np.testing.assert_allclose(potential(m, qs), [potential(m, q) for q in qs], rtol=1e-15)
    np.testing.assert_allclose(potential_gradient(m, qs), [potential_gradient(m, q) for q in qs], rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.01, 100.0), st.integers(0, 2**31))
def test_scale_law(c, seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.5, 2.0, 4)
    q = random_configuration(rng, 4)
    assert potential(m, c * q) == pytest.approx(potential(m, q) / c, rel=1e-12)
    assert moment_of_inertia(m, c * q) == pytest.approx(c * c * moment_of_inertia(m, q), rel=1e-12)
    iu2 = lambda x: moment_of_inertia(m, x) * potential(m, x) ** 2
    assert iu2(c * q) == pytest.approx(iu2(q), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_inertia_minimized_at_center_of_mass(seed):
    rng = np.random.default_rng(seed)
    m = rng.uniform(0.1, 3.0, 5)
    q = rng.normal(size=(5, 3))
    centered = project_center_of_mass(m, q)
    for _ in range(5):
        s = rng.normal(size=3)
        assert moment_of_inertia(m, centered) <= moment_of_inertia(m, centered + s) + 1e-12


def test_gradient_matches_finite_differences(rng):
    h = 1e-5
    for _ in range(20):
        m = rng.uniform(0.5, 2.0, 4)
        q = random_configuration(rng, 4, d=rng.integers(1, 4))
        grad = potential_gradient(m, q)
        fd = np.zeros_like(q)
        for idx in np.ndindex(q.shape):
            e = np.zeros_like(q)
            e[idx] = h
            fd[idx] = (potential(m, q + e) - potential(m, q - e)) / (2 * h)
        assert np.linalg.norm(grad - fd) <= 1e-6 * np.linalg.norm(grad)


def test_central_configuration_solves_newton():
    q = equilateral()
    lam = potential([1, 1, 1], q) / moment_of_inertia([1, 1, 1], q)
    assert newton_residual([1, 1, 1], q, -lam * q) < 1e-14
