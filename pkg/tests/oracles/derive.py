"""Independent oracle values for the test suite.

Everything here is computed symbolically (sympy) or by adaptive
high-precision quadrature (mpmath), without touching paramarg, and frozen
into derived.json.  Re-run with ``python3 tests/oracles/derive.py`` after
changing a fixture.
"""
import json
from pathlib import Path

import mpmath as mp
import sympy as sp

mp.mp.dps = 30
out = {}


def c2(z):
    z = complex(z)
    return [z.real, z.imag]


# closed-contour integrals on the unit circle
def circle_integral(g):
    return mp.quad(lambda s: g(mp.e ** (1j * s)) * 1j * mp.e ** (1j * s), [0, mp.pi / 2, mp.pi, 3 * mp.pi / 2, 2 * mp.pi])


out["int_zbar_dz"] = c2(circle_integral(lambda z: mp.conj(z)))
out["int_dz_over_z"] = c2(circle_integral(lambda z: 1 / z))

# change of argument for the principal-value residue, away from zeros
def arg_change(J, n=4000):
    total = mp.mpf(0)
    prev = mp.arg(J(1))
    for j in range(1, n + 1):
        cur = mp.arg(J(mp.e ** (2j * mp.pi * j / n)))
        d = cur - prev
        d -= 2 * mp.pi * mp.nint(d / (2 * mp.pi))
        total += d
        prev = cur
    return total


# I = (1/2 pi i) * closed integral of d ln(J/conj J) = 2 * (argument change) / (2 pi)
out["residue_2izeta2"] = float(2 * arg_change(lambda z: 2j * z ** 2) / (2 * mp.pi))
out["residue_zeta"] = float(2 * arg_change(lambda z: z) / (2 * mp.pi))
out["residue_2_plus_zeta"] = float(2 * arg_change(lambda z: 2 + z) / (2 * mp.pi))

# roots of the cubic
zeta = sp.symbols("zeta")
roots = [complex(r) for r in sp.Poly(zeta ** 3 - sp.Rational(1, 2), zeta).nroots(n=30)]
out["cubic_roots"] = sorted([c2(r) for r in roots])
out["cubic_count_inside"] = sum(abs(r) < 1 for r in roots)
out["linking_z1sq"] = sum(abs(complex(r)) < 1 for r in sp.Poly(zeta ** 2 - sp.Rational(1, 4), zeta).nroots())

# example families: symbolic partials and Jacobian
th, rho, ps = sp.symbols("theta rho psi", real=True)
t = sp.exp(sp.I * th)
z = rho * sp.exp(sp.I * ps)
ex1 = sp.Matrix([(2 + sp.cos(th)) * z, 2 + sp.cos(th)])
ex2 = sp.Matrix([z + 2 * t, z + 2 * t])


def partial_columns(Phi, zv, thv):
    # d/dzeta of a holomorphic expression in zeta = rho e^{i psi}: (d/drho) e^{-i psi}
    dz = (sp.diff(Phi, rho) * sp.exp(-sp.I * ps))
    dt = sp.diff(Phi, th)
    sub = {rho: abs(zv), ps: float(sp.arg(zv)) if zv != 0 else 0.0, th: thv}
    return [[c2(complex(sp.N(e.subs(sub)))) for e in dz], [c2(complex(sp.N(e.subs(sub)))) for e in dt]]


out["ex1_partials_theta_pi2_zeta1"] = partial_columns(ex1, 1, sp.pi / 2)
out["ex2_partials_samples"] = {f"{a},{b}": partial_columns(ex2, complex(a), float(b))
                               for a, b in [(0.3, 0.7), (1, 2.0), (0.5j, 4.0)]}

# J on the boundary for example 1: det [i zeta dPhi/dzeta, dPhi/dtheta]
dzeta = sp.diff(ex1, rho) * sp.exp(-sp.I * ps)
Jsym = sp.simplify(sp.Matrix.hstack(sp.I * z * dzeta, sp.diff(ex1, th)).det())
out["ex1_J_samples"] = [[a, b, c2(complex(sp.N(Jsym.subs({rho: 1, ps: a, th: b}))))]
                        for a, b in [(0.0, 0.5), (1.0, 1.0), (2.5, 2.2), (4.0, 3.5), (5.5, 5.9)]]

# zeros of zeta^2 - t/2 and their monodromy around theta in [0, 2 pi]
out["branch_zeros_theta0"] = sorted([c2(r) for r in [mp.sqrt(0.5), -mp.sqrt(0.5)]])

# Wirtinger derivatives
x, y = sp.symbols("x y", real=True)
def dbar(expr):
    return sp.simplify((sp.diff(expr, x) + sp.I * sp.diff(expr, y)) / 2)
out["dbar_zbar"] = float(sp.Abs(dbar(x - sp.I * y)))
out["dbar_abs_at_1p2i"] = float(sp.Abs(dbar(sp.sqrt(x ** 2 + y ** 2))).subs({x: 1, y: 2}))

# complex tangent space of the sphere at (1, 0): kernel of d(|z|^2) = 2 Re<., p>
out["sphere_tangent_at_1_0"] = [[c2(1j), c2(0)], [c2(0), c2(1)], [c2(0), c2(1j)]]

Path(__file__).with_name("derived.json").write_text(json.dumps(out, indent=1, sort_keys=True) + "\n")
print("wrote", len(out), "oracle values")
