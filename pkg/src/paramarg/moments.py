"""Complex moments on closed curves, holomorphic extension into analytic
discs, and finite-difference d-bar residuals used as independent oracles.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .contour import ClosedCurve, contour_integral, fourier_coefficients, spectral_derivative

__all__ = [
    "MOMENT_TOL",
    "EXTENSION_TOL",
    "MomentReport",
    "ExtensionResult",
    "monomial_forms",
    "complex_moments",
    "disc_extension",
    "dbar_residual",
    "planar_dbar",
    "tangential_dbar",
    "moments_equiv_extension",
]

MOMENT_TOL = 1e-8
EXTENSION_TOL = 1e-8


@dataclass(frozen=True)
class MomentReport:
    moments: np.ndarray
    forms: list
    max_abs: float
    scale: float
    tol: float

    @property
    def vanish(self) -> bool:
        return bool(self.max_abs < self.tol * self.scale)


def monomial_forms(n: int, k_max: int) -> list[tuple[tuple[int, ...], int]]:
    """All forms z^alpha dz_j with |alpha| <= k_max, as ``(alpha, j)`` pairs,
    ordered by degree then lexicographically."""
    forms = []
    for deg in range(k_max + 1):
        for alpha in itertools.product(range(deg + 1), repeat=n):
            if sum(alpha) == deg:
                for j in range(n):
                    forms.append((tuple(alpha), j))
    forms.sort(key=lambda f: (sum(f[0]), tuple(-a for a in f[0]), f[1]))
    return forms


def complex_moments(c: ClosedCurve, f, k_max: int = 8, forms: Sequence | None = None,
                    tol: float = MOMENT_TOL) -> MomentReport:
    """Moments of ``f`` against monomial 1-forms along a closed curve.

    In the plane the moments are ``int f z^k dz`` for ``k = 0..k_max``.  In
    C^n the default family is every ``z^alpha dz_j`` with ``|alpha| <= k_max``.
    ``f`` is either samples at the curve's nodes or a callable on points.
    """
    pts = c.samples
    fv = np.asarray(f(pts if c.n > 1 else pts[:, 0]) if callable(f) else f, dtype=complex).reshape(-1)
    if fv.shape[0] != c.N:
        raise ValueError(f"f has {fv.shape[0]} samples, curve has {c.N}")
    if forms is None:
        forms = [((k,), 0) for k in range(k_max + 1)] if c.n == 1 else monomial_forms(c.n, k_max)
    dz = spectral_derivative(c).samples
    vals = []
    for alpha, j in forms:
        mono = np.prod(pts ** np.asarray(alpha)[None, :], axis=1)
        vals.append(contour_integral(c, fv * mono * dz[:, j]))
    vals = np.asarray(vals, dtype=complex)
    length = float(np.sum(np.linalg.norm(dz, axis=1)) * 2 * np.pi / c.N)
    deg = max((sum(a) for a, _ in forms), default=0)
    scale = max(1.0, float(np.max(np.abs(fv)))) * max(1.0, length) * c.scale() ** deg
    return MomentReport(vals, list(forms), float(np.max(np.abs(vals))) if vals.size else 0.0, scale, tol)


@dataclass(frozen=True)
class ExtensionResult:
    taylor: np.ndarray
    negative_mass: float
    scale: float
    tol: float
    boundary_mismatch: float

    @property
    def extends(self) -> bool:
        return bool(self.negative_mass < self.tol * self.scale)

    def __call__(self, zeta):
        """Evaluate the reconstructed extension on the disc."""
        zeta = np.asarray(zeta, dtype=complex)
        out = np.zeros_like(zeta)
        for a in self.taylor[::-1]:
            out = out * zeta + a
        return out


def disc_extension(phi_t, f, tol: float = EXTENSION_TOL) -> ExtensionResult:
    """Test whether ``f`` on the boundary of an analytic disc extends
    holomorphically into it.

    ``phi_t`` is the disc's boundary parametrization as a curve sampled at
    ``zeta = exp(i psi_j)``; ``f`` is samples at the same nodes or a callable
    on the curve's points.  The pullback ``f(Phi_t(e^{i psi}))`` extends iff
    its negative Fourier modes vanish; the nonnegative modes are the Taylor
    coefficients of the extension in ``zeta``.
    """
    if callable(f):
        pts = phi_t.samples if phi_t.n > 1 else phi_t.samples[:, 0]
        fv = np.asarray(f(pts), dtype=complex).reshape(-1)
    else:
        fv = np.asarray(f, dtype=complex).reshape(-1)
    fd = fourier_coefficients(fv)
    neg = fd.negative()
    mass = float(np.sqrt(np.sum(np.abs(neg) ** 2)))
    taylor = fd.nonnegative().copy()
    scale = max(1.0, float(np.max(np.abs(fv))))
    res = ExtensionResult(taylor, mass, scale, tol, 0.0)
    zeta = np.exp(2j * np.pi * np.arange(fv.size) / fv.size)
    mismatch = float(np.max(np.abs(res(zeta) - fv)))
    return ExtensionResult(taylor, mass, scale, tol, mismatch)


def moments_equiv_extension(c: ClosedCurve, f, k_max: int = 8) -> dict:
    """Compare the moment verdict with the extension verdict on a disc
    boundary sampled at ``zeta = exp(i psi_j)``."""
    mr = complex_moments(c, f, k_max)
    ext = disc_extension(c, f)
    return {
        "moments_vanish": mr.vanish,
        "extends": ext.extends,
        "agree": mr.vanish == ext.extends,
        "max_moment": mr.max_abs,
        "negative_mass": ext.negative_mass,
    }


MIN_GRID = 5


def planar_dbar(values: np.ndarray, h: float) -> np.ndarray:
    """``|df/dzbar|`` at interior nodes of a regular grid ``values[iy, ix]``
    with spacing ``h`` in both directions, by second-order central differences."""
    v = np.asarray(values, dtype=complex)
    if v.ndim != 2 or min(v.shape) < MIN_GRID:
        raise ValueError(f"grid too coarse: need at least {MIN_GRID} points per direction")
    fx = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * h)
    fy = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * h)
    return 0.5 * np.abs(fx + 1j * fy)


def _stencil_dbar(f: Callable, z: np.ndarray, h: float) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    fx = (f(z + h) - f(z - h)) / (2 * h)
    fy = (f(z + 1j * h) - f(z - 1j * h)) / (2 * h)
    return 0.5 * np.abs(fx + 1j * fy)


def tangential_dbar(patch, f: Callable, tau: float = 1e-7) -> np.ndarray:
    """Max over complex tangent directions of ``|Zbar f|`` at each point of
    a manifold patch, ``Zbar = (X + i JX) / 2``; ``f`` is a callable on
    ambient points of shape ``(P, n)``.  Excluded points get 0."""
    from .cr import complex_tangent_pairs  # circular at import time

    h = patch.step
    rows, owner = [], []
    for i, pairs in enumerate(complex_tangent_pairs(patch, tau)):
        b = patch.points_ambient[i]
        for X, JX in pairs:
            rows.extend([b + h * X, b - h * X, b + h * JX, b - h * JX])
            owner.append(i)
    out = np.zeros(patch.size)
    if not rows:
        return out
    v = np.asarray(f(np.array(rows)), dtype=complex).reshape(-1, 4)
    z = 0.5 * np.abs((v[:, 0] - v[:, 1]) / (2 * h) + 1j * (v[:, 2] - v[:, 3]) / (2 * h))
    np.maximum.at(out, np.array(owner), z)
    return out


def dbar_residual(f, mode: str = "planar", *, h: float | None = None, points=None, patch=None,
                  tau: float = 1e-7) -> np.ndarray:
    """d-bar residual field.

    planar mode: ``f`` is either a 2-D array sampled on a regular grid with
    spacing ``h`` (residual on interior nodes), or a callable on C evaluated
    with a central-difference stencil of step ``h`` at ``points``.

    tangential-CR mode: ``f`` is a callable on C^n and ``patch`` a
    :class:`~paramarg.cr.ManifoldPatch`; returns ``max |Zbar f|`` over an
    orthonormal basis of the complex tangent space at every patch point.
    """
    if mode == "planar":
        if callable(f):
            if points is None or h is None:
                raise ValueError("callable f needs points and a step h")
            return _stencil_dbar(f, points, h)
        if h is None:
            raise ValueError("grid spacing h is required")
        return planar_dbar(f, h)
    if mode == "tangential-CR":
        if patch is None or not callable(f):
            raise ValueError("tangential mode needs a patch and a callable f")
        return tangential_dbar(patch, f, tau)
    raise ValueError(f"unknown mode {mode!r}")
