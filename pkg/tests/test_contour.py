import numpy as np
import pytest
from hypothesis import given, strategies as st

from paramarg.contour import (ClosedCurve, CurveError, angles, contour_integral, evaluate, fourier_coefficients,
                              integrate_dz, inverse_fourier, resample, sample_curve, spectral_derivative)

from conftest import cval


def test_unit_circle_samples():
    c = sample_curve(lambda p: np.exp(1j * p), 64)
    assert c.N == 64 and c.n == 1
    np.testing.assert_allclose(np.abs(c.z), 1.0, atol=1e-15)


def test_constant_curve_rejected_when_regularity_requested():
    c = sample_curve(lambda p: np.tile([1.0, 0.0], (p.size, 1)), 16)
    assert c.n == 2 and np.all(c.samples == [1, 0])
    with pytest.raises(CurveError):
        sample_curve(lambda p: np.tile([1.0, 0.0], (p.size, 1)), 16, regular=True)


def test_ellipse_extremum():
    c = sample_curve(lambda p: 2 * np.cos(p) + 1j * np.sin(p), 128)
    assert np.argmax(np.abs(c.z)) == 0
    assert abs(np.max(np.abs(c.z)) - 2) < 1e-15


@pytest.mark.parametrize("N", [0, 8, 24, 100])
def test_bad_sample_counts(N):
    with pytest.raises(CurveError):
        sample_curve(lambda p: np.exp(1j * p), N)


def test_formula_failure_is_reported():
    with pytest.raises(CurveError):
        sample_curve(lambda p: 1 / 0, 16)


def test_spectral_derivative():
    c = sample_curve(lambda p: np.exp(1j * p), 32)
    np.testing.assert_allclose(spectral_derivative(c).z, 1j * c.z, atol=1e-13)
    const = ClosedCurve(np.full(16, 3 + 1j))
    assert np.max(np.abs(spectral_derivative(const).z)) < 1e-15
    c2 = sample_curve(lambda p: np.exp(2j * p), 64)
    psi = angles(64)
    assert np.max(np.abs(spectral_derivative(c2).z - 2j * np.exp(2j * psi))) < 1e-12


def test_cauchy_and_residue_integrals(oracle):
    c = sample_curve(lambda p: np.exp(1j * p), 64)
    assert abs(integrate_dz(c, c.z)) < 1e-12
    assert abs(integrate_dz(c, 1 / c.z) - cval(oracle["int_dz_over_z"])) < 1e-12
    assert abs(integrate_dz(c, np.conj(c.z)) - cval(oracle["int_zbar_dz"])) < 1e-12


def test_integrand_mismatch():
    c = sample_curve(lambda p: np.exp(1j * p), 32)
    with pytest.raises(CurveError):
        contour_integral(c, np.ones(16))


def test_fourier_examples():
    psi = angles(32)
    f = fourier_coefficients(np.exp(1j * psi))
    assert abs(f.coefficient(1) - 1) < 1e-12
    assert np.max(np.abs(np.delete(f.coefficients, f.N // 2 + 1))) < 1e-12
    assert abs(fourier_coefficients(np.exp(-1j * psi)).coefficient(-1) - 1) < 1e-12
    g = fourier_coefficients(np.cos(psi))
    assert abs(g.coefficient(1) - 0.5) < 1e-12 and abs(g.coefficient(-1) - 0.5) < 1e-12


coef_lists = st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False),
                      min_size=1, max_size=6)


def _trig(coefs, psi):
    # sum_m a_m e^{i(m-2)psi}, low-order trigonometric polynomial
    return sum(a * np.exp(1j * (m - 2) * psi) for m, a in enumerate(coefs))


@given(coef_lists, st.sampled_from([16, 32, 64]))
def test_fourier_round_trip(coefs, N):
    v = _trig(coefs, angles(N))
    back = inverse_fourier(fourier_coefficients(v))
    assert np.max(np.abs(back - v)) <= 1e-12 * max(1.0, np.max(np.abs(v)))


@given(coef_lists, st.integers(0, 63))
def test_integral_invariant_under_rotation(coefs, shift):
    c = ClosedCurve(_trig(coefs, angles(64)) + 5.0)
    g = 1 / c.z ** 2 + np.conj(c.z)
    a = integrate_dz(c, g)
    b = integrate_dz(ClosedCurve(np.roll(c.z, shift)), np.roll(g, shift))
    assert abs(a - b) < 1e-10 * max(1.0, abs(a))


@given(coef_lists)
def test_exact_form_integrates_to_zero(coefs):
    c = ClosedCurve(_trig(coefs, angles(64)))
    assert abs(contour_integral(c, spectral_derivative(c).z)) < 1e-10 * c.scale()


@given(st.lists(st.complex_numbers(max_magnitude=0.5, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_grid_doubling_converged(coefs):
    c = ClosedCurve(_trig(coefs, angles(64)) + 2.0)
    fine = resample(c, 128)
    a = integrate_dz(c, np.exp(c.z) * np.conj(c.z))
    b = integrate_dz(fine, np.exp(fine.z) * np.conj(fine.z))
    assert abs(a - b) < 1e-10 * max(1.0, abs(a))


def test_evaluate_matches_nodes_and_off_nodes():
    psi = angles(32)
    c = ClosedCurve(np.exp(3j * psi) + 0.5 * np.exp(-2j * psi))
    np.testing.assert_allclose(evaluate(c, psi)[:, 0], c.z, atol=1e-13)
    q = np.array([0.123, 2.5])
    np.testing.assert_allclose(evaluate(c, q)[:, 0], np.exp(3j * q) + 0.5 * np.exp(-2j * q), atol=1e-13)
