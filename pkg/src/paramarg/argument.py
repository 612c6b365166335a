"""Winding numbers, zero counting, linking numbers, degrees of circle maps,
zero localization in the disc and the principal-value logarithmic residue.

Functions holomorphic on the closed unit disc can be passed either as a
vectorized evaluator ``f(zeta)`` or as boundary samples (an array or a
planar :class:`~paramarg.contour.ClosedCurve`).  Samples are extended into
the disc through their nonnegative Fourier modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .contour import (
    ClosedCurve,
    angles,
    contour_integral,
    evaluate,
    fourier_coefficients,
    resample,
    spectral_derivative,
)

__all__ = [
    "ArgumentError",
    "OnCurveError",
    "NotIntegerError",
    "DegenerateZerosError",
    "Zero",
    "ZeroList",
    "ResidueValue",
    "BoundaryZero",
    "winding_number",
    "rounded",
    "zero_count",
    "boundary_zeros",
    "linking_number",
    "curve_degree",
    "locate_zeros",
    "log_residue_pv",
    "INTEGER_TOL",
    "PV_WINDOWS",
]

INTEGER_TOL = 1e-8
BOUNDARY_ZERO_TOL = 1e-9
PV_WINDOWS = (1e-2, 5e-3, 2.5e-3)
MAX_SAMPLES = 2 ** 16
START_SAMPLES = 256
CELL_DIAMETER = 1e-6


class ArgumentError(ArithmeticError):
    pass


class OnCurveError(ArgumentError):
    """The target point lies on (or numerically on) the curve."""


class NotIntegerError(ArgumentError):
    """A quantity that must be an integer did not converge to one."""


class DegenerateZerosError(ArgumentError):
    """Zeros are not isolated (the function looks identically zero somewhere)."""


def rounded(value: float, tol: float = INTEGER_TOL, *, half: bool = False) -> float:
    """Round to the nearest integer (or half-integer), refusing to hide a
    value that is not close to one."""
    unit = 0.5 if half else 1.0
    r = unit * round(value / unit)
    if abs(value - r) > tol:
        raise NotIntegerError(f"{value!r} is not within {tol:g} of a multiple of {unit}")
    return float(r)


# --- boundary function plumbing -------------------------------------------------

class _Boundary:
    """Uniform access to a function on the closed disc."""

    def __init__(self, phi):
        if callable(phi):
            self._f = phi
            self._fd = None
            self.N0 = START_SAMPLES
        else:
            curve = phi if isinstance(phi, ClosedCurve) else ClosedCurve(np.asarray(phi, dtype=complex))
            if curve.n != 1:
                raise ValueError("expected a scalar function (planar samples)")
            self._f = None
            self._curve = curve
            self._fd = fourier_coefficients(curve)
            self.N0 = max(curve.N, START_SAMPLES)
            taylor = self._fd.nonnegative()[:, 0]
            self._taylor = taylor

    def on_circle(self, N: int, r: float = 1.0, center: complex = 0.0) -> np.ndarray:
        psi = angles(N)
        if self._f is not None:
            return np.asarray(self._f(center + r * np.exp(1j * psi)), dtype=complex)
        if r == 1.0 and center == 0.0:
            return resample(self._curve, N).z if N >= self._curve.N else evaluate(self._fd, psi)[:, 0]
        return self(center + r * np.exp(1j * psi))

    def at_angles(self, psi) -> np.ndarray:
        psi = np.asarray(psi, dtype=float)
        if self._f is not None:
            return np.asarray(self._f(np.exp(1j * psi)), dtype=complex)
        return evaluate(self._fd, psi)[:, 0]

    def __call__(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex)
        if self._f is not None:
            return np.asarray(self._f(zeta), dtype=complex)
        # Horner on the Taylor part
        out = np.zeros_like(zeta)
        for a in self._taylor[::-1]:
            out = out * zeta + a
        return out


def _winding_adaptive(sample_fn: Callable[[int], np.ndarray], b: complex, N0: int,
                      scale: float | None = None) -> float:
    """(1/2 pi i) * integral of dz/(z-b), doubling N until the value settles."""
    N = N0
    prev = None
    while True:
        z = sample_fn(N)
        sc = scale if scale is not None else max(1.0, float(np.max(np.abs(z))))
        if np.min(np.abs(z - b)) <= BOUNDARY_ZERO_TOL * sc:
            raise OnCurveError(f"point {b!r} lies on the curve")
        dz = spectral_derivative(ClosedCurve(z)).z
        w = contour_integral(N, dz / (z - b)) / (2j * np.pi)
        val = w.real
        if prev is not None and abs(val - prev) < 1e-10 and abs(val - round(val)) < INTEGER_TOL:
            return val
        if N >= MAX_SAMPLES:
            return val
        prev = val
        N *= 2


def winding_number(c: ClosedCurve, b: complex = 0.0) -> float:
    """Winding number of a planar closed curve about ``b`` by quadrature of
    dz/(z-b).  The returned value is real, not rounded; see :func:`rounded`."""
    if c.n != 1:
        raise ValueError("winding number needs a planar curve")
    scale = c.scale()
    fine = resample(c, max(4 * c.N, 1024))
    if np.min(np.abs(fine.z - b)) <= BOUNDARY_ZERO_TOL * scale:
        raise OnCurveError(f"point {b!r} is within {BOUNDARY_ZERO_TOL:g} of the curve")

    def fn(N):
        return c.z if N == c.N else resample(c, N).z

    return _winding_adaptive(fn, b, c.N, scale)


# --- boundary zeros and principal values -----------------------------------------

@dataclass(frozen=True)
class BoundaryZero:
    psi: float
    multiplicity: int

    @property
    def location(self) -> complex:
        return complex(np.exp(1j * self.psi))


def _arc_increment(bf: _Boundary, b: complex, a0: float, a1: float) -> complex:
    """Change of log(f - b) along the unit circle from angle a0 to a1."""
    M = max(64, int(math.ceil((a1 - a0) / (2 * np.pi) * 4096)))
    while True:
        psi = np.linspace(a0, a1, M + 1)
        v = bf.at_angles(psi) - b
        steps = np.angle(v[1:] / v[:-1])
        chord_ok = np.all(np.abs(v[1:] - v[:-1]) < 0.5 * np.minimum(np.abs(v[1:]), np.abs(v[:-1])))
        if chord_ok or M > 2 ** 20:
            break
        M *= 2
    return np.sum(steps) * 1j + (np.log(np.abs(v[-1])) - np.log(np.abs(v[0])))


def _candidate_minima(bf: _Boundary, b: complex, Nf: int = 4096):
    psi = angles(Nf)
    a = np.abs(bf.at_angles(psi) - b)
    scale = max(1.0, float(np.max(np.abs(bf.at_angles(psi)))))
    return psi, a, scale


def boundary_zeros(phi, b: complex = 0.0, tol: float = BOUNDARY_ZERO_TOL) -> list[BoundaryZero]:
    """Isolated zeros of ``phi - b`` on the unit circle, with multiplicities."""
    bf = phi if isinstance(phi, _Boundary) else _Boundary(phi)
    return _boundary_zeros(bf, b, tol)


def _boundary_zeros(bf: _Boundary, b: complex, tol: float) -> list[BoundaryZero]:
    psi, a, scale = _candidate_minima(bf, b)
    Nf = psi.size
    h = 2 * np.pi / Nf
    if np.count_nonzero(a < tol * scale) > Nf // 64:
        raise DegenerateZerosError("function vanishes on an arc of the boundary")
    is_min = (a <= np.roll(a, 1)) & (a <= np.roll(a, -1)) & (a < 1e-2 * scale)
    found: list[float] = []
    for j in np.flatnonzero(is_min):
        res = minimize_scalar(lambda s: float(np.abs(bf.at_angles(np.array([s]))[0] - b)),
                              bounds=(psi[j] - 1.5 * h, psi[j] + 1.5 * h), method="bounded",
                              options={"xatol": 1e-15})
        if res.fun < tol * scale:
            p = float(np.mod(res.x, 2 * np.pi))
            if all(abs((p - q + np.pi) % (2 * np.pi) - np.pi) > 4 * h for q in found):
                found.append(p)
    zeros = []
    for p in sorted(found):
        eps = min(1e-3, 0.25 * _min_sep(p, found))
        zeros.append(BoundaryZero(p, _local_multiplicity(bf, b, p, eps)))
    return zeros


def _min_sep(p: float, found: list[float]) -> float:
    others = [abs((p - q + np.pi) % (2 * np.pi) - np.pi) for q in found if q != p]
    return min(others) if others else np.pi


def _local_multiplicity(bf: _Boundary, b: complex, p: float, eps: float) -> int:
    """Order of vanishing of f - b at exp(i p), from |f - b| ~ C |psi - p|^m."""
    e1, e2 = eps, eps / 4
    v1 = np.abs(bf.at_angles(np.array([p - e1, p + e1])) - b).mean()
    v2 = np.abs(bf.at_angles(np.array([p - e2, p + e2])) - b).mean()
    m = math.log(v1 / v2) / math.log(e1 / e2)
    return max(1, int(round(m)))


def _pv_increment(bf: _Boundary, b: complex, zeros: list[BoundaryZero], delta: float) -> complex:
    """Change of log(f - b) along the circle with windows (p - delta, p + delta)
    cut out around every boundary zero p."""
    ps = sorted(z.psi for z in zeros)
    total = 0.0 + 0.0j
    for i, p in enumerate(ps):
        q = ps[(i + 1) % len(ps)] + (2 * np.pi if i + 1 == len(ps) else 0.0)
        total += _arc_increment(bf, b, p + delta, q - delta)
    return total


def _richardson_odd(values: list[complex]) -> complex:
    """Extrapolate v(delta) = L + a*delta + c*delta^3 + ... for deltas halving."""
    r = [2 * values[i + 1] - values[i] for i in range(len(values) - 1)]
    if len(r) == 1:
        return r[0]
    return (8 * r[1] - r[0]) / 7


@dataclass
class _PVCount:
    value: complex
    per_window: list
    windows: list


def _pv_count(bf: _Boundary, b: complex, zeros: list[BoundaryZero], deltas=PV_WINDOWS) -> _PVCount:
    vals = [_pv_increment(bf, b, zeros, d) / (2j * np.pi) for d in deltas]
    windows = [(z.psi - deltas[-1], z.psi + deltas[-1]) for z in zeros]
    return _PVCount(_richardson_odd(vals), vals, windows)


def zero_count(phi, b: complex = 0.0) -> float:
    """Weighted number of zeros of ``phi - b`` on the closed unit disc.

    Interior zeros count with their multiplicity; zeros on the unit circle
    count with half their multiplicity.  Without boundary zeros this is the
    winding number of ``phi(S^1)`` about ``b``.  With boundary zeros the
    interior count is read on the circle of radius ``1 - delta`` and the
    boundary contribution from the principal value of the argument change,
    extrapolated to ``delta -> 0``.
    """
    bf = _Boundary(phi)
    zeros = _boundary_zeros(bf, b, BOUNDARY_ZERO_TOL)
    if not zeros:
        w = _winding_adaptive(lambda N: bf.on_circle(N), b, bf.N0)
        return rounded(w)
    interior = [rounded(_winding_adaptive(lambda N, r=1.0 - d: bf.on_circle(N, r), b, bf.N0))
                for d in PV_WINDOWS]
    if len(set(interior)) != 1:
        raise NotIntegerError(f"interior count did not stabilize under shrinking: {interior}")
    pv = _pv_count(bf, b, zeros)
    total = rounded(pv.value.real, 1e-6, half=True)
    boundary = sum(z.multiplicity for z in zeros)
    if abs(total - (interior[0] + 0.5 * boundary)) > 1e-9:
        raise NotIntegerError(
            f"principal value {pv.value.real:.12g} disagrees with interior {interior[0]} "
            f"+ half boundary multiplicity {boundary}")
    return total


# --- linking numbers and degrees --------------------------------------------------

def linking_number(c: ClosedCurve, P: Callable[[np.ndarray], np.ndarray]) -> float:
    """(1/2 pi i) * integral over the curve of dP/P, for ``P`` a polynomial in
    ``n`` variables evaluated on arrays of shape ``(N, n)``."""
    def fn(N):
        pts = c.samples if N == c.N else resample(c, N).samples
        return np.asarray(P(pts), dtype=complex).reshape(N)

    vals = fn(max(4 * c.N, 1024))
    scale = max(1.0, float(np.max(np.abs(vals))))
    if np.min(np.abs(vals)) <= BOUNDARY_ZERO_TOL * scale:
        raise OnCurveError("the polynomial vanishes on the curve")
    return _winding_adaptive(fn, 0.0, c.N, scale)


def curve_degree(map_samples, reference: complex = 0.0) -> int:
    """Degree of a map from the circle to a closed planar curve, measured as
    the winding number of the image about ``reference``."""
    if callable(map_samples):
        w = _winding_adaptive(lambda N: np.asarray(map_samples(angles(N)), dtype=complex),
                              reference, START_SAMPLES)
    else:
        c = map_samples if isinstance(map_samples, ClosedCurve) else ClosedCurve(map_samples)
        w = winding_number(c, reference)
    return int(rounded(w))


# --- zero localization ------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    location: complex
    multiplicity: int
    on_boundary: bool = False

    @property
    def weight(self) -> float:
        return 0.5 * self.multiplicity if self.on_boundary else float(self.multiplicity)


@dataclass
class ZeroList:
    zeros: list[Zero] = field(default_factory=list)

    def weighted_count(self) -> float:
        return float(sum(z.weight for z in self.zeros))

    def __len__(self):
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def locations(self) -> np.ndarray:
        return np.array([z.location for z in self.zeros], dtype=complex)


def _rect_contour(x0: float, x1: float, y0: float, y1: float, m: int) -> np.ndarray:
    t = np.linspace(0.0, 1.0, m, endpoint=False)
    bottom = (x0 + (x1 - x0) * t) + 1j * y0
    right = x1 + 1j * (y0 + (y1 - y0) * t)
    top = (x1 - (x1 - x0) * t) + 1j * y1
    left = x0 + 1j * (y1 - (y1 - y0) * t)
    return np.concatenate([bottom, right, top, left])


class _Cell:
    __slots__ = ("x0", "x1", "y0", "y1", "count")

    def __init__(self, x0, x1, y0, y1, count=None):
        self.x0, self.x1, self.y0, self.y1, self.count = x0, x1, y0, y1, count

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))


def _cell_count(f, cell: _Cell, scale: float) -> int | None:
    """Zeros of f inside the cell by argument increments along its edges;
    ``None`` if f (numerically) vanishes on the boundary."""
    m = 32
    while True:
        z = _rect_contour(cell.x0, cell.x1, cell.y0, cell.y1, m)
        v = f(z)
        av = np.abs(v)
        if not np.all(np.isfinite(av)) or np.min(av) <= 1e-12 * np.max(av):
            return None
        nxt = np.roll(v, -1)
        # |v_{j+1} - v_j| < |v_j| / 2 keeps each chord away from the origin
        if np.all(np.abs(nxt - v) < 0.5 * np.minimum(av, np.abs(nxt))):
            steps = np.angle(nxt / v)
            return int(round(np.sum(steps) / (2 * np.pi)))
        if m >= 2 ** 16:
            return None
        m *= 2


def _split(f, cell: _Cell, scale: float) -> list[_Cell]:
    for ratio in (0.5, 0.4631, 0.5377, 0.4129):
        xm = cell.x0 + (cell.x1 - cell.x0) * ratio
        ym = cell.y0 + (cell.y1 - cell.y0) * ratio
        kids = [_Cell(cell.x0, xm, cell.y0, ym), _Cell(xm, cell.x1, cell.y0, ym),
                _Cell(cell.x0, xm, ym, cell.y1), _Cell(xm, cell.x1, ym, cell.y1)]
        counts = [_cell_count(f, k, scale) for k in kids]
        if any(c is None or c < 0 for c in counts) or sum(counts) != cell.count:
            continue
        for k, c in zip(kids, counts):
            k.count = c
        return [k for k in kids if k.count > 0]
    raise DegenerateZerosError("zero count does not stabilize under subdivision")


def _polish(f, z0: complex, m: int, hw: float, scale: float) -> complex:
    """Mean of the m zeros near z0 from the first contour moment of f'/f."""
    rho = 1e-2
    while rho > 4 * hw and _count_circle(f, z0, rho, scale) != m:
        rho /= 2
    rho = max(rho, 4 * hw)
    M = 128
    th = angles(M)
    zeta = z0 + rho * np.exp(1j * th)
    v = f(zeta)
    dv = spectral_derivative(ClosedCurve(v)).z
    return complex(z0 + contour_integral(M, (zeta - z0) * dv / v) / (2j * np.pi * m))


def _count_circle(f, z0: complex, rho: float, scale: float) -> int | None:
    M = 256
    v = f(z0 + rho * np.exp(1j * angles(M)))
    av = np.abs(v)
    if np.min(av) <= 1e-12 * np.max(av):
        return None
    nxt = np.roll(v, -1)
    if not np.all(np.abs(nxt - v) < 0.5 * np.minimum(av, np.abs(nxt))):
        return None
    return int(round(np.sum(np.angle(nxt / v)) / (2 * np.pi)))


def locate_zeros(phi, region: tuple[complex, float] = (0.0, 1.0),
                 cell_diameter: float = CELL_DIAMETER) -> ZeroList:
    """Zeros of a holomorphic function in the closed disc ``|zeta - c| <= R``.

    Recursive quadrisection of a bounding square: each cell's zero count is
    the winding of ``phi`` along the cell boundary; cells holding zeros are
    split until their diameter drops below ``cell_diameter``, then each
    cluster is polished with the contour moment of ``phi'/phi``.
    """
    bf = _Boundary(phi)
    center, R = complex(region[0]), float(region[1])
    f = bf
    scale = max(1.0, float(np.max(np.abs(f(center + R * np.exp(1j * angles(256)))))))
    # off-center start keeps symmetric zeros off the cell edges
    root = None
    for off in ((1.37e-3, 2.71e-3), (-3.1e-3, 1.9e-3), (2.3e-3, -4.1e-3)):
        cx, cy, hw = center.real + off[0] * R, center.imag + off[1] * R, 1.0173 * R
        cell = _Cell(cx - hw, cx + hw, cy - hw, cy + hw)
        cell.count = _cell_count(f, cell, scale)
        if cell.count is not None:
            root = cell
            break
    if root is None:
        raise DegenerateZerosError("function vanishes on the bounding square")
    finished: list[_Cell] = []
    stack = [root] if root.count > 0 else []
    budget = 200_000
    while stack:
        cell = stack.pop()
        budget -= 1
        if budget < 0:
            raise DegenerateZerosError("too many cells: zeros are probably not isolated")
        if cell.diameter < cell_diameter:
            finished.append(cell)
            continue
        stack.extend(_split(f, cell, scale))
    zeros = []
    for cell in finished:
        z = _polish(f, cell.center, cell.count, cell.diameter, scale)
        r = abs(z - center)
        if r > R * (1 + BOUNDARY_ZERO_TOL):
            continue
        zeros.append(Zero(z, int(cell.count), bool(abs(r - R) <= BOUNDARY_ZERO_TOL * R)))
    zeros.sort(key=lambda q: (round(q.location.real, 9), round(q.location.imag, 9)))
    return ZeroList(zeros)


# --- principal-value logarithmic residue ---------------------------------------

@dataclass(frozen=True)
class ResidueValue:
    value: complex
    pv_windows: list = field(default_factory=list)

    def __float__(self):
        return float(self.value.real)


def log_residue_pv(J) -> ResidueValue:
    """(1/2 pi i) * integral over the unit circle of d(J/conj J)/(J/conj J).

    Isolated boundary zeros of ``J`` are excluded by symmetric angular
    windows whose width is extrapolated to zero.  For ``J`` holomorphic on
    the closed disc the value is twice the weighted zero count of ``J``.
    """
    bf = _Boundary(J)
    zeros = _boundary_zeros(bf, 0.0, BOUNDARY_ZERO_TOL)
    if zeros:
        pv = _pv_count(bf, 0.0, zeros)
        # d ln(J / conj J) = 2 i d arg J
        return ResidueValue(complex(2.0 * pv.value.real, 0.0), pv.windows)

    def ratio_integral(N):
        v = bf.on_circle(N)
        if np.min(np.abs(v)) == 0.0:
            raise OnCurveError("J vanishes on the circle")
        g = v / np.conj(v)
        dg = spectral_derivative(ClosedCurve(g)).z
        return contour_integral(N, dg / g) / (2j * np.pi)

    N = bf.N0
    prev = ratio_integral(N)
    while N < MAX_SAMPLES:
        N *= 2
        cur = ratio_integral(N)
        if abs(cur - prev) < 1e-12:
            return ResidueValue(cur, [])
        prev = cur
    return ResidueValue(prev, [])
