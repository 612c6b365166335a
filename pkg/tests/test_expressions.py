import numpy as np
import pytest
from hypothesis import given, strategies as st

from paramarg.expressions import ExpressionError, compile_expr, compile_vector


def test_basic_evaluation():
    f = compile_expr("zeta + 2*t", ["zeta", "t"])
    assert complex(f(zeta=1j, t=1)) == 2 + 1j
    assert complex(compile_expr("i^2", [])()) == -1
    assert complex(compile_expr("ζ*conj(ζ)", ["zeta"])(zeta=3 + 4j)) == 25


def test_vectorized():
    f = compile_expr("abs(z)^2 + re(z)", ["z"])
    z = np.array([1, 1j, 2 - 1j])
    np.testing.assert_allclose(f(z=z), np.abs(z) ** 2 + z.real)


def test_vector_broadcasts_constants():
    v = compile_vector(["z", "2"], ["z"])
    out = v(z=np.arange(3))
    assert out.shape == (3, 2) and np.all(out[:, 1] == 2)


@pytest.mark.parametrize("src", ["__import__('os')", "z.real", "[z]", "lambda: 1", "z if z else 0", "foo(z)",
                                 "w + 1", "z % 2", "", "z +"])
def test_rejects(src):
    with pytest.raises(ExpressionError):
        compile_expr(src, ["z"])


def test_missing_variable():
    with pytest.raises(ExpressionError):
        compile_expr("z + w", ["z", "w"])(z=1)


@given(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
       st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_matches_python_arithmetic(a, b):
    f = compile_expr("a*b - a/(1 + abs(b)) + conj(a)^2", ["a", "b"])
    want = a * b - a / (1 + abs(b)) + a.conjugate() ** 2
    assert abs(complex(f(a=a, b=b)) - want) <= 1e-12 * max(1.0, abs(want))
