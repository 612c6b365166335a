import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from paramarg.families import (FamilyError, ParamManifold, build_family, common_point_search, degeneracy_check,
                               fiber_ratio_test, jacobian_field, orbit_nontriviality, parametric_ap_verdict,
                               partials, rank_field, regularity_check, track_zeros)
from paramarg.contour import angles

from conftest import cval

C = ParamManifold.circle


def ex1(M=128, n_psi=256):
    return build_family(lambda z, t: np.stack([(2 + t[:, 0].real) * z, 2 + t[:, 0].real + 0 * z], -1),
                        C(M), 2, n_psi=n_psi)


def ex2(M=64, n_psi=64):
    return build_family(lambda z, t: np.stack([z + 2 * t[:, 0], z + 2 * t[:, 0]], -1), C(M), 2, n_psi=n_psi)


def at_theta(th):
    return np.array([[np.exp(1j * th)]])


def test_partials_match_oracle_ex1(oracle):
    A = partials(ex1(), [1.0], at_theta(np.pi / 2))[0]
    want = np.array([[cval(v) for v in col] for col in oracle["ex1_partials_theta_pi2_zeta1"]]).T
    np.testing.assert_allclose(A, want, atol=1e-9)


def test_partials_match_oracle_ex2(oracle):
    f = ex2()
    for key, cols in oracle["ex2_partials_samples"].items():
        z, th = key.split(",")
        A = partials(f, [complex(z)], at_theta(float(th)))[0]
        want = np.array([[cval(v) for v in col] for col in cols]).T
        np.testing.assert_allclose(A, want, atol=1e-9)


def test_zeta_independent_family_has_zero_first_column():
    f = build_family(lambda z, t: np.stack([0.5 * t[:, 0] ** 2 + 0 * z, t[:, 0] + 0 * z], -1), C(32), 1, n_psi=16)
    A = partials(f, [0.2 + 0.1j, -0.5], np.array([[1j], [-1]]))
    assert np.max(np.abs(A[..., 0])) < 1e-14
    assert np.min(np.abs(A[..., 1])) > 0.5


def test_build_family_rejects_bad_input():
    with pytest.raises(FamilyError):
        build_family(lambda z, t: np.stack([np.conj(z), t[:, 0]], -1), C(16), 2, n_psi=32)
    with pytest.raises(FamilyError):
        build_family(lambda z, t: np.stack([z, t[:, 0]], -1), C(16), 2, n_psi=48)
    with pytest.raises(FamilyError):
        build_family(lambda z, t: np.stack([z, t[:, 0]], -1), C(16), 3, n_psi=32)


def test_regularity_examples():
    assert regularity_check(ex2()).passed
    stuck = build_family(lambda z, t: np.stack([z, 0 * z], -1), C(16), 1, n_psi=16)
    rep = regularity_check(stuck)
    assert not rep.passed and rep.t_rank_min == 0 and rep.t_rank_failures == rep.grid_points


def test_rank_examples():
    r2 = rank_field(ex2())
    assert r2.max_rank == 1 and np.max(r2.ratio) < 1e-10
    r1 = rank_field(ex1(32, 64))
    assert r1.max_rank == 2 and np.mean(r1.ratio > 1e-2) > 0.5


def test_ex1_jacobian_matches_oracle(oracle):
    jf = jacobian_field(ex1(32, 64))
    assert jf.eta == (0, 1)
    for psi, th, val in oracle["ex1_J_samples"]:
        got = jf.evaluator(np.array([np.exp(1j * psi)]), at_theta(th))[0]
        assert abs(got - cval(val)) < 1e-9


def test_jacobian_properties():
    jf = jacobian_field(ex1(32, 64))
    assert jf.center_max < 1e-12 and np.max(jf.negative_mass) < 1e-9 * jf.scale
    assert np.max(np.abs(jacobian_field(ex2()).values)) < 1e-10


def test_jacobian_argument_validation():
    with pytest.raises(FamilyError):
        jacobian_field(ex2(), eta=(0, 0))
    with pytest.raises(FamilyError):
        jacobian_field(ex2(), fields=(3,))


def test_fiber_ratio_with_control():
    f = ex1()
    jf = jacobian_field(f)
    plain = fiber_ratio_test(jf, f)
    assert plain["status"] == "tested" and plain["passed"] and plain["max_violation"] < 1e-6
    ctrl = fiber_ratio_test(jf, f, multiplier=lambda z, t: np.exp(1j * z * t[:, 0]))
    assert ctrl["max_violation"] > 1e-2


def test_fiber_ratio_vacuous_for_injective_family():
    f = build_family(lambda z, t: np.stack([z, t[:, 0]], -1), C(32), 2, n_psi=64)
    assert fiber_ratio_test(jacobian_field(f), f)["status"] == "vacuous"


def test_track_zeros_ex1_singular_fibers():
    tz = track_zeros(jacobian_field(ex1(16, 64)))
    assert tz.singular == [0, 8]
    assert all(c == 1 for j, c in enumerate(tz.counts) if j not in tz.singular)


def test_track_zeros_square_root_monodromy(oracle):
    t = np.exp(1j * angles(64))[:, None]
    tz = track_zeros(lambda z, tt: z ** 2 - tt[:, 0] / 2, t)
    assert tz.conserved and tz.monodromy == [1, 0] and tz.nontrivial_monodromy
    start = np.sort_complex(tz.chains[0])
    want = np.sort_complex(np.array([cval(v) for v in oracle["branch_zeros_theta0"]]))
    np.testing.assert_allclose(start, want, atol=1e-9)


def test_track_zeros_double_zero():
    tz = track_zeros(lambda z, tt: z ** 2 + 0 * tt[:, 0], np.exp(1j * angles(8))[:, None])
    assert all(c == 2 for c in tz.counts) and not tz.nontrivial_monodromy


def test_degeneracy_branches():
    assert degeneracy_check(ex1(32, 64)).branch == "ZeroDegree"
    ident = build_family(lambda z, t: np.stack([z, t[:, 0]], -1), C(32), 2, n_psi=64)
    rep = degeneracy_check(ident)
    assert rep.branch == "NotDegenerate" and abs(rep.degree) == 1
    flat = build_family(lambda z, t: np.stack([0.5 * t[:, 0] ** 2 + 0 * z, t[:, 0] + 0 * z], -1), C(32), 1,
                        n_psi=16)
    rep = degeneracy_check(flat)
    assert rep.branch == "DimensionDrop" and rep.verified


def test_orbit_examples():
    psi = angles(128)
    concentric = np.array([r * np.exp(1j * psi) for r in (0.5, 1.0, 2.0)])
    rep = common_point_search(concentric)
    assert rep.status == "trivial" and abs(rep.common_point) < 0.5
    segment = np.array([c + np.exp(1j * psi) for c in np.linspace(-1.5, 1.5, 31)])
    assert common_point_search(segment).status == "nontrivial"
    assert orbit_nontriviality(ex2()).status == "nontrivial"
    assert orbit_nontriviality(ex2(), "declared", declared="trivial").status == "trivial"
    with pytest.raises(FamilyError):
        orbit_nontriviality(ex2(), "declared")


def test_verdicts():
    f = ex1(32, 64)
    v = parametric_ap_verdict(f, orbit_nontriviality(f))
    assert v.outcome == "counterexample-confirmed" and "orbit" in v.violated and v.max_rank == 2
    g = ex2()
    v = parametric_ap_verdict(g, orbit_nontriviality(g))
    assert v.outcome == "PASS" and v.hypotheses_hold and v.collapsed


coef = st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False)


def poly_family(a, b, c, e):
    return build_family(lambda z, t: np.stack([a * z + b * t[:, 0], c * z ** 2 + e * t[:, 0] * z + t[:, 0]], -1),
                        C(8), 2, n_psi=16, radii=(0.0, 0.5))


@given(coef, coef, coef, coef, st.complex_numbers(max_magnitude=0.9), st.floats(0, 2 * np.pi))
def test_redundant_psi_column_keeps_rank(a, b, c, e, z, th):
    f = poly_family(a, b, c, e)
    A = partials(f, [z], at_theta(th))[0]
    B = np.column_stack([A, 1j * z * A[:, 0]])
    tol = 1e-7 * max(1.0, np.linalg.norm(A))
    assert np.linalg.matrix_rank(B, tol) == np.linalg.matrix_rank(A, tol)


@settings(max_examples=15)
@given(coef, coef, coef, coef)
def test_rank_bounded(a, b, c, e):
    for f in (poly_family(a, b, c, e),
              build_family(lambda z, t: (a * z + b * t[:, 0])[:, None], C(8), 2, n_psi=16, radii=(0.0,),
                           strict=False)):
        assert rank_field(f).max_rank <= min(f.k + 1, f.n)
