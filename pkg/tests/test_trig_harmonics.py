import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from saari.errors import DegeneratePair, HypothesisViolated, SearchExhausted, SlowConvergence, ValidationError
from saari.mechanics import pairwise_distances, potential
from saari.trig_harmonics import (
    PairHarmonics,
    TrigLoop,
    constant_potential_certificate,
    fourier_coefficient_series,
    pair_harmonics,
    phase_alignment,
    potential_spectrum_quadrature,
    rigidity_check,
    series_partial_sums,
    series_term_ratio,
    spectrum_table,
)

from conftest import equilateral, pair_loop, perturbed_equilateral, rotating_equilateral

# (1/2π)∫ (1 + 0.5 cos s)^(-1/2) cos(ns) ds by 30-digit adaptive quadrature
ORACLE_C05 = {1: -0.142611928112603630781604769358, 2: 0.0287489366897873327820400017623}


def synthetic_pair(A, C, theta=0.0, masses=1.0):
    return PairHarmonics(0, 1, A, A * C, C, theta, C > 0, masses)


def random_loop(rng, n=3, d=2):
    return TrigLoop(rng.uniform(0.5, 2, n), rng.normal(size=(n, d)), rng.normal(size=(n, d)), rng.uniform(0.5, 5))


def test_rigid_circular_loop_has_no_modulation():
    for ph in pair_harmonics(rotating_equilateral()):
        assert ph.B < 1e-15 and ph.C < 1e-15 and not ph.theta_defined


def test_collinear_oscillation_is_fully_modulated():
    loop = TrigLoop([1, 1, 2], [[1, 0], [-1, 0.5], [0, -0.25]], np.zeros((3, 2)))
    for ph in pair_harmonics(loop):
        assert ph.B == pytest.approx(ph.A) and ph.C == 1.0 and ph.theta == 0.0


def test_direct_pair_values():
    loop = TrigLoop([1, 1], [[1, 0], [0, 0]], [[0, 0.5], [0, 0]])
    (ph,) = pair_harmonics(loop)
    assert (ph.A, ph.B, ph.C, ph.theta) == pytest.approx((0.625, 0.375, 0.6, 0.0))


def test_degenerate_pair():
    with pytest.raises(DegeneratePair):
        pair_harmonics(TrigLoop([1, 1, 1], [[1, 0], [1, 0], [0, 1]], [[0, 1], [0, 1], [1, 0]]))


def test_squared_distance_reconstruction(rng):
    for _ in range(25):
        loop = random_loop(rng, n=4, d=rng.integers(1, 4))
        t = np.linspace(0, loop.T, 64)
        q = loop.positions(t)
        for ph in pair_harmonics(loop):
            d2 = np.sum((q[:, ph.j] - q[:, ph.k]) ** 2, axis=-1)
            assert np.max(np.abs(d2 - ph.squared_distance(t, loop.T))) < 1e-12 * ph.A
            assert ph.A >= ph.B
            assert ph.A == pytest.approx(0.5 * (np.sum((loop.a[ph.j] - loop.a[ph.k]) ** 2) + np.sum((loop.b[ph.j] - loop.b[ph.k]) ** 2)), rel=1e-14)


def test_term_ratio_values():
    # (2l + 1/2 + n)(2l + 3/2 + n) / (4 (l+1)(l+1+n)) evaluated by hand
    assert series_term_ratio(1, 0, exact=True) == Fraction(15, 32)
    assert series_term_ratio(2, 0, exact=True) == Fraction(35, 48)
    assert series_term_ratio(3, 2, exact=True) == Fraction(15 * 17, 4 * 3 * 6 * 4)
    assert series_term_ratio(1, 0) == 0.46875
    assert abs(series_term_ratio(1, 10**6) - 1) < 1e-5


def test_gauss_exponent_is_one_for_every_harmonic():
    # c_l / c_{l+1} = 1 + μ/l + O(1/l²) with μ = 1, so the series diverges at C = 1
    for n in range(1, 9):
        for l in (10**4, 10**6):
            mu = (1 / series_term_ratio(n, l, exact=True) - 1) * l
            assert float(mu) == pytest.approx(1.0, abs=5 * n * n / l)


def test_term_ratio_bound_used_for_tail():
    for n in range(0, 11):
        ratios = np.array([series_term_ratio(n, l) for l in range(3000)])
        for L in range(0, 200, 7):
            assert ratios[L:].max() <= max(ratios[L], 1.0) + 1e-15


def test_series_zero_modulation():
    for n in range(1, 6):
        assert fourier_coefficient_series(synthetic_pair(1.0, 0.0), n).D == 0.0


def test_series_matches_quadrature_oracle():
    for n, value in ORACLE_C05.items():
        coef = fourier_coefficient_series(synthetic_pair(1.0, 0.5), n)
        assert coef.D == pytest.approx(abs(value), rel=1e-8)
        assert coef.coefficient.real == pytest.approx(value, rel=1e-8)
    d1 = fourier_coefficient_series(synthetic_pair(1.0, 0.5), 1).D
    d2 = fourier_coefficient_series(synthetic_pair(1.0, 0.5), 2).D
    assert d1 > d2


def test_series_scaling_in_mass_and_amplitude():
    base = fourier_coefficient_series(synthetic_pair(1.0, 0.4), 3).D
    assert fourier_coefficient_series(synthetic_pair(4.0, 0.4, masses=6.0), 3).D == pytest.approx(3 * base, rel=1e-14)


@settings(max_examples=60, deadline=None)
@given(st.one_of(st.just(0.0), st.floats(1e-3, 0.99)), st.integers(1, 12))
def test_coefficients_nonnegative(C, n):
    D = fourier_coefficient_series(synthetic_pair(1.0, C), n).D
    assert D >= 0
    assert (D == 0) == (C == 0)


def test_tail_bound_covers_neglected_terms():
    ph = synthetic_pair(1.0, 0.95)
    for n in (1, 4):
        rough = fourier_coefficient_series(ph, n, tol=1e-6)
        fine = fourier_coefficient_series(ph, n)
        assert 0 <= fine.D - rough.D <= rough.tail_bound
        assert fine.terms_used > rough.terms_used


def test_partial_sums_monotone_and_bounded():
    for C in (0.3, 0.7, 0.9):
        loop = pair_loop(C, 0.4)
        quad = potential_spectrum_quadrature(loop, 4)
        for n in range(1, 5):
            ph = pair_harmonics(loop)[0]
            coef = fourier_coefficient_series(ph, n)
            scale = coef.D / series_partial_sums(C, n, coef.terms_used)[-1]
            sums = scale * series_partial_sums(C, n, 400)
            assert np.all(np.diff(sums) >= 0)
            assert sums[-1] <= abs(quad[n]) * (1 + 1e-12)


def test_series_at_full_modulation_diverges():
    with pytest.raises(SlowConvergence) as info:
        fourier_coefficient_series(synthetic_pair(1.0, 1.0), 1, max_terms=10**5)
    err = info.value
    assert err.terms_used == 10**5
    assert err.tail["verdict"] == "divergent"
    assert err.tail["mu_estimate"] == pytest.approx(1.0, abs=1e-4)
    assert math.isinf(err.tail["tail_bound"])
    # partial sums grow like log(L)
    more = pytest.raises(SlowConvergence, fourier_coefficient_series, synthetic_pair(1.0, 1.0), 1, max_terms=10**6)
    assert more.value.partial_sum > err.partial_sum + 0.1


def test_quadrature_rigid_loop_is_constant():
    spec = potential_spectrum_quadrature(rotating_equilateral(), 8)
    assert np.all(np.abs(spec[1:]) < 1e-12)
    assert spec[0].real == pytest.approx(3.0, rel=1e-13)


def test_quadrature_matches_series_single_pair():
    loop = pair_loop(0.6, 1.1)
    quad = potential_spectrum_quadrature(loop, 8)
    (ph,) = pair_harmonics(loop)
    for n in range(1, 9):
        series = fourier_coefficient_series(ph, n).coefficient
        assert abs(series - quad[n]) <= 1e-8 * abs(quad[n])


def test_odd_harmonics_vanish(rng):
    for _ in range(5):
        loop = random_loop(rng)
        even, odd = potential_spectrum_quadrature(loop, 6, odd=True)
        assert np.all(np.abs(odd) < 1e-12 * abs(even[0]))


def test_extended_precision_quadrature_agrees():
    loop = pair_loop(0.3, 0.2)
    double = potential_spectrum_quadrature(loop, 3, 64)
    extended = potential_spectrum_quadrature(loop, 3, 64, dps=30)
    np.testing.assert_allclose(extended, double, rtol=1e-12, atol=1e-16)


def test_quadrature_sample_validation():
    with pytest.raises(ValidationError):
        potential_spectrum_quadrature(pair_loop(0.5), 8, samples=48)
    with pytest.raises(ValidationError):
        potential_spectrum_quadrature(pair_loop(0.5), 8, samples=32)


def test_spectrum_table_rows():
    rows = spectrum_table(pair_loop(0.6, 0.3), 4, 256)
    assert [r[0] for r in rows] == [0, 1, 2, 3, 4]
    for n, re, im, series_value, quad_value in rows:
        assert quad_value == pytest.approx(math.hypot(re, im))
        assert series_value == pytest.approx(quad_value, rel=1e-9)


def test_rigidity_of_rotating_equilateral():
    loop = rotating_equilateral()
    rep = rigidity_check(loop)
    assert rep.rigid and rep.max_C < 1e-12
    initial = pairwise_distances(loop.positions(0.0))
    np.testing.assert_allclose(sorted(rep.distances.values()), sorted(initial), rtol=1e-13)


def test_rigidity_flags_modulated_pair():
    rep = rigidity_check(perturbed_equilateral(0.3))
    assert not rep.rigid
    assert rep.max_C == pytest.approx(0.3, abs=1e-12)
    assert rep.distances is None
    rep = rigidity_check(TrigLoop([1, 1], [[1, 0], [-1, 0]], np.zeros((2, 2))))
    assert not rep.rigid and rep.max_C == 1.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.integers(2, 5))
def test_rigid_loops_have_constant_potential(seed, n):
    rng = np.random.default_rng(seed)
    q0 = rng.normal(size=(n, 2))
    if pairwise_distances(q0).min() < 0.1:
        return
    angle = rng.uniform(0, 2 * np.pi)
    R = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
    a = q0 @ R.T
    loop = TrigLoop(rng.uniform(0.5, 2, n), a, np.column_stack([-a[:, 1], a[:, 0]]), rng.uniform(0.5, 4))
    assert rigidity_check(loop).rigid
    U = potential(loop.masses, loop.positions(loop.sample_times(1024)))
    assert np.std(U) / np.mean(U) < 1e-10


def test_certificate_rigid_loop_is_trivial():
    rep = constant_potential_certificate(rotating_equilateral())
    assert rep.n is None and rep.active_pairs == []
    assert rep.concluded_rigid and rep.consistent


def test_certificate_rejects_nonconstant_potential():
    with pytest.raises(HypothesisViolated):
        constant_potential_certificate(perturbed_equilateral(0.3))


def test_phase_alignment_quarter_window():
    hit = phase_alignment([0.3 * 2 * np.pi, 0.7 * 2 * np.pi])
    assert hit.k == 3
    assert all(d < 0.25 for d in hit.deviations)
    with pytest.raises(SearchExhausted):
        phase_alignment([2 * np.pi * 0.5], k_max=1)


def test_certificate_logic_on_modulated_loop():
    loop = perturbed_equilateral(0.3)
    rep = constant_potential_certificate(loop, check_hypothesis=False)
    assert rep.hypothesis_ratio > 1e-3
    assert rep.n is not None and len(rep.active_pairs) == 3
    assert all(f < 0.25 or f > 0.75 for f in rep.fractional_parts)
    assert rep.terms_nonnegative and all(d > 0 for d in rep.D)
    assert rep.real_sum > 0
    # the quadrature coefficient is the signed series sum
    series = (-1) ** rep.n * sum(d * complex(math.cos(rep.n * ph.theta), math.sin(rep.n * ph.theta))
                                  for d, ph in zip(rep.D, [p for p in rep.rigidity.pairs if p.theta_defined]))
    assert abs(series - rep.quadrature_coefficient) < 1e-10 * abs(series)
    assert not rep.concluded_rigid and rep.consistent


def test_loop_json_and_time_shift(rng):
    loop = random_loop(rng)
    back = TrigLoop.from_dict(json.loads(json.dumps(loop.to_dict())))
    np.testing.assert_array_equal(back.a, loop.a)
    shifted = loop.time_shift(0.37)
    np.testing.assert_allclose(shifted.positions(1.0), loop.positions(1.37), atol=1e-14)
    with pytest.raises(ValidationError):
        TrigLoop.from_dict({"masses": [1, 1], "a": [[0, 0]], "b": [[1, 0]]})
    with pytest.raises(ValidationError):
        TrigLoop([1, 1], np.zeros((2, 2)), np.ones((2, 2)), T=-1.0)
