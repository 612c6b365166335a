import numpy as np
import pytest
from hypothesis import given, strategies as st

from paramarg.contour import ClosedCurve, angles, sample_curve
from paramarg.cr import box_patch, sphere_patch
from paramarg.moments import (complex_moments, dbar_residual, disc_extension, moments_equiv_extension,
                              monomial_forms, planar_dbar)

from conftest import cval

unit = sample_curve(lambda p: np.exp(1j * p), 128)


def test_moments_of_exp_vanish():
    mr = complex_moments(unit, np.exp, 8)
    assert mr.max_abs < 1e-12 and mr.vanish


def test_moments_of_zbar(oracle):
    mr = complex_moments(unit, np.conj, 8)
    assert abs(mr.moments[0] - cval(oracle["int_zbar_dz"])) < 1e-12
    assert np.max(np.abs(mr.moments[1:])) < 1e-12
    assert not mr.vanish


@pytest.mark.parametrize("t", [0.3, 1.0, 1.7])
def test_moments_of_abs_on_circles(t):
    c = sample_curve(lambda p: t * np.exp(1j * p), 128)
    assert complex_moments(c, np.abs, 8).max_abs < 1e-12


def test_moment_sample_mismatch():
    with pytest.raises(ValueError):
        complex_moments(unit, np.ones(7))


def test_monomial_forms_count():
    # |alpha| <= 2 in two variables: 6 monomials, two differentials each
    forms = monomial_forms(2, 2)
    assert len(forms) == 12 and forms[0] == ((0, 0), 0)


def test_extension_examples():
    psi = angles(64)
    ext = disc_extension(unit, np.exp(1j * psi))
    assert ext.extends and abs(ext.taylor[1] - 1) < 1e-12 and np.max(np.abs(np.delete(ext.taylor, 1))) < 1e-12
    bad = disc_extension(unit, np.exp(-1j * psi))
    assert not bad.extends and abs(bad.negative_mass - 1) < 1e-12
    t = 0.7
    c = sample_curve(lambda p: t * np.exp(1j * p), 64)
    ab = disc_extension(c, np.abs)
    assert ab.extends and abs(ab.taylor[0] - t) < 1e-12 and abs(ab(0.3 + 0.2j) - t) < 1e-12


def test_equivalence_examples():
    c = sample_curve(lambda p: 0.6 * np.exp(1j * p), 128)
    for f, want in [(np.exp, True), (np.conj, False), (np.abs, True)]:
        r = moments_equiv_extension(c, f, 8)
        assert r["agree"] and r["moments_vanish"] is want and r["extends"] is want


def test_planar_dbar_examples(oracle):
    x = np.linspace(-1, 1, 41)
    Z = x[None, :] + 1j * x[:, None]
    assert np.max(planar_dbar(Z ** 2, 0.05)) < 1e-6
    np.testing.assert_allclose(planar_dbar(np.conj(Z), 0.05), oracle["dbar_zbar"], atol=1e-12)
    r = dbar_residual(np.abs, "planar", h=1e-4, points=np.array([1 + 2j, 1.5, -2j]))
    np.testing.assert_allclose(r, oracle["dbar_abs_at_1p2i"], atol=1e-6)


def test_planar_dbar_coarse_grid():
    with pytest.raises(ValueError):
        planar_dbar(np.zeros((4, 10)), 0.1)


def test_tangential_dbar_on_sphere():
    s = sphere_patch(4, 8)
    hol = dbar_residual(lambda x: x[:, 0] * x[:, 1] + np.exp(x[:, 1]), "tangential-CR", patch=s)
    anti = dbar_residual(lambda x: np.conj(x[:, 0]), "tangential-CR", patch=s)
    assert np.max(hol) < 1e-6
    # the unit complex tangent is (-conj z2, conj z1), so |Zbar conj(z1)| = |z2|
    np.testing.assert_allclose(anti, np.abs(s.points_ambient[:, 1]), atol=1e-6)


def test_tangential_mode_needs_patch():
    with pytest.raises(ValueError):
        dbar_residual(np.exp, "tangential-CR")


poly_st = st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=5)


@given(poly_st, st.floats(0.2, 1.5), st.complex_numbers(max_magnitude=1))
def test_holomorphic_data_moments_vanish_and_extend(coefs, r, c0):
    c = sample_curve(lambda p: c0 + r * np.exp(1j * p), 128)
    f = lambda z: np.polyval(coefs, z) * np.exp(z)
    mr = complex_moments(c, f, 8)
    ext = disc_extension(c, f)
    assert mr.max_abs < 1e-10 * mr.scale and ext.extends
    assert ext.boundary_mismatch < 10 * ext.tol * ext.scale


@given(poly_st, st.integers(1, 3))
def test_equivalence_with_antiholomorphic_terms(coefs, m):
    c = sample_curve(lambda p: 0.8 * np.exp(1j * p), 128)
    f = lambda z: np.polyval(coefs, z) + np.conj(z) ** m
    r = moments_equiv_extension(c, f, 8)
    assert r["agree"] and not r["extends"]


@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=1, max_size=3))
def test_dbar_of_quadratics(coefs):
    # central differences are exact for quadratics
    x = np.linspace(-1, 1, 21)
    Z = x[None, :] + 1j * x[:, None]
    h = x[1] - x[0]
    assert np.max(planar_dbar(np.polyval(coefs, Z), h)) < 1e-12
    np.testing.assert_allclose(planar_dbar(np.polyval(coefs, Z) + np.conj(Z), h), 1.0, atol=1e-12)
