"""Closed curves sampled at equispaced angles, spectral differentiation and
periodic trapezoid quadrature.

Every contour integral in the package goes through :func:`contour_integral`,
which is the trapezoid rule on ``psi_j = 2*pi*j/N``.  On real-analytic
periodic data it converges geometrically in ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

__all__ = [
    "ClosedCurve",
    "FourierData",
    "CurveError",
    "angles",
    "is_power_of_two",
    "sample_curve",
    "spectral_derivative",
    "contour_integral",
    "integrate_dz",
    "fourier_coefficients",
    "inverse_fourier",
    "resample",
    "evaluate",
]

MIN_SAMPLES = 16


class CurveError(ValueError):
    """Raised for malformed curves or mismatched sample arrays."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def angles(N: int) -> np.ndarray:
    return 2.0 * np.pi * np.arange(N) / N


def _check_N(N: int) -> None:
    if not isinstance(N, (int, np.integer)) or N < MIN_SAMPLES or not is_power_of_two(int(N)):
        raise CurveError(f"sample count must be a power of two >= {MIN_SAMPLES}, got {N!r}")


@dataclass(frozen=True)
class ClosedCurve:
    """A 2*pi-periodic curve in C^n stored as ``samples[j] = gamma(2*pi*j/N)``.

    ``samples`` has shape ``(N, n)``.  Use :attr:`z` for the scalar view of a
    planar (n = 1) curve.
    """

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2:
            raise CurveError("samples must have shape (N,) or (N, n)")
        _check_N(s.shape[0])
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def N(self) -> int:
        return self.samples.shape[0]

    @property
    def n(self) -> int:
        return self.samples.shape[1]

    @property
    def z(self) -> np.ndarray:
        if self.n != 1:
            raise CurveError(f"curve lives in C^{self.n}, not the plane")
        return self.samples[:, 0]

    @property
    def psi(self) -> np.ndarray:
        return angles(self.N)

    def scale(self) -> float:
        """Largest coordinate modulus, floored at 1 so scale-relative tolerances
        stay meaningful for small curves."""
        return max(1.0, float(np.max(np.abs(self.samples))))

    def is_regular(self, rtol: float = 1e-10) -> bool:
        speed = np.linalg.norm(spectral_derivative(self).samples, axis=1)
        return bool(np.min(speed) > rtol * self.scale())


Spec = Union[Callable[[np.ndarray], np.ndarray], Sequence, np.ndarray]


def sample_curve(spec: Spec, N: int | None = None, *, regular: bool = False) -> ClosedCurve:
    """Sample a closed curve.

    ``spec`` is either a callable ``psi -> points`` (vectorized over ``psi``,
    returning shape ``(N,)`` or ``(N, n)``), or an explicit point list whose
    length is the sample count.  With ``regular=True`` a curve whose
    spectral derivative vanishes somewhere is rejected.
    """
    if callable(spec):
        if N is None:
            raise CurveError("N is required when the curve is given as a formula")
        _check_N(N)
        psi = angles(N)
        try:
            pts = np.asarray(spec(psi), dtype=complex)
        except Exception as exc:  # evaluation failures surface as CurveError
            raise CurveError(f"curve formula failed to evaluate: {exc}") from exc
        if pts.ndim == 0 or pts.shape[0] != N:
            pts = np.broadcast_to(pts, (N,) + pts.shape[1:] if pts.ndim else (N,)).copy()
        if not np.all(np.isfinite(pts)):
            raise CurveError("curve formula produced non-finite values")
    else:
        pts = np.asarray(spec, dtype=complex)
        if N is not None and pts.shape[0] != N:
            raise CurveError(f"point list has {pts.shape[0]} samples, expected {N}")
    curve = ClosedCurve(pts)
    if regular and not curve.is_regular():
        raise CurveError("curve is not regular: its derivative vanishes")
    return curve


def _wavenumbers(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, d=1.0 / N)


def _spectral_d(values: np.ndarray) -> np.ndarray:
    N = values.shape[0]
    k = _wavenumbers(N)
    k[N // 2] = 0.0  # Nyquist mode has no well-defined derivative
    coef = np.fft.fft(values, axis=0)
    return np.fft.ifft(1j * k.reshape((-1,) + (1,) * (values.ndim - 1)) * coef, axis=0)


def spectral_derivative(c: ClosedCurve) -> ClosedCurve:
    """Samples of d(gamma)/d(psi) from the truncated Fourier series."""
    return ClosedCurve(_spectral_d(c.samples))


def contour_integral(c: ClosedCurve | int, integrand) -> complex:
    """Periodic trapezoid rule ``(2*pi/N) * sum(integrand_j)`` over psi.

    The integrand is a sample array aligned with the curve's nodes; to
    integrate a form ``g(z) dz`` use :func:`integrate_dz`.
    """
    N = c if isinstance(c, (int, np.integer)) else c.N
    vals = np.asarray(integrand, dtype=complex)
    if vals.shape[0] != N:
        raise CurveError(f"integrand has {vals.shape[0]} samples, curve has {N}")
    total = 2.0 * np.pi / N * np.sum(vals, axis=0)
    return complex(total) if vals.ndim == 1 else total


def integrate_dz(c: ClosedCurve, g, coordinate: int = 0) -> complex:
    """Integral of ``g dz_j`` along the curve, ``g`` given by samples."""
    dz = spectral_derivative(c).samples[:, coordinate]
    return contour_integral(c, np.asarray(g, dtype=complex) * dz)


@dataclass(frozen=True)
class FourierData:
    """Coefficients ``c_m`` for ``m = -N/2 .. N/2-1`` (row ``m + N/2``) with
    ``samples_j = sum_m c_m exp(i m psi_j)``."""

    coefficients: np.ndarray

    @property
    def N(self) -> int:
        return self.coefficients.shape[0]

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.N // 2, self.N // 2)

    def coefficient(self, m: int) -> np.ndarray | complex:
        if not -self.N // 2 <= m < self.N // 2:
            return 0.0 * self.coefficients[0]
        return self.coefficients[m + self.N // 2]

    def negative(self) -> np.ndarray:
        return self.coefficients[: self.N // 2]

    def nonnegative(self) -> np.ndarray:
        """Coefficients c_0, c_1, ..., c_{N/2-1} (the Taylor part)."""
        return self.coefficients[self.N // 2:]


def fourier_coefficients(c: ClosedCurve | np.ndarray) -> FourierData:
    samples = c.samples if isinstance(c, ClosedCurve) else np.asarray(c, dtype=complex)
    N = samples.shape[0]
    return FourierData(np.fft.fftshift(np.fft.fft(samples, axis=0) / N, axes=0))


def inverse_fourier(f: FourierData) -> np.ndarray:
    return np.fft.ifft(np.fft.ifftshift(f.coefficients, axes=0), axis=0) * f.N


def resample(c: ClosedCurve, N: int) -> ClosedCurve:
    """Trigonometric interpolation of the curve onto ``N`` nodes."""
    _check_N(N)
    if N == c.N:
        return c
    coef = np.fft.fft(c.samples, axis=0) / c.N
    M = c.N
    if N > M:
        out = np.zeros((N, c.n), dtype=complex)
        half = M // 2
        out[:half] = coef[:half]
        out[N - half + 1:] = coef[half + 1:]
        # split the Nyquist mode symmetrically so real data stays real
        out[half] += 0.5 * coef[half]
        out[N - half] += 0.5 * coef[half]
    else:
        half = N // 2
        out = np.concatenate([coef[:half], coef[M - half:]], axis=0)
    return ClosedCurve(np.fft.ifft(out, axis=0) * N)


def evaluate(c: ClosedCurve | FourierData, psi) -> np.ndarray:
    """Evaluate the interpolating trigonometric polynomial at arbitrary angles."""
    fd = c if isinstance(c, FourierData) else fourier_coefficients(c)
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    half = fd.N // 2
    coef = fd.coefficients
    # the Nyquist coefficient is split between modes -N/2 and +N/2, as in resample()
    modes = np.concatenate([fd.modes, [half]]).astype(float)
    full = np.concatenate([coef, coef[:1]], axis=0)
    full[0] = full[0] * 0.5
    full[-1] = full[-1] * 0.5
    return np.exp(1j * np.outer(psi, modes)) @ full
