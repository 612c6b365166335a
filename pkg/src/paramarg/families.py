"""Families of analytic discs ``Phi(zeta, t)`` over a closed parameter
manifold: partial derivatives, rank fields, the boundary Jacobian ``J``,
zero tracking, degeneracy, orbit tests and the combined verdict.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment
from matplotlib.path import Path
from scipy.spatial import cKDTree

from .argument import ArgumentError, ZeroList, locate_zeros, winding_number, zero_count
from .contour import ClosedCurve, angles, is_power_of_two, spectral_derivative

__all__ = [
    "RANK_TOL",
    "FamilyError",
    "ParamManifold",
    "DiscFamily",
    "RankField",
    "JacobianField",
    "RegularityReport",
    "DegeneracyReport",
    "OrbitReport",
    "Verdict",
    "ZeroTracking",
    "build_family",
    "partials",
    "regularity_check",
    "strip_regularity",
    "rank_field",
    "jacobian_field",
    "fiber_ratio_test",
    "track_zeros",
    "degeneracy_check",
    "common_point_search",
    "orbit_nontriviality",
    "parametric_ap_verdict",
]

RANK_TOL = 1e-7
HOLOMORPHY_TOL = 1e-10
FD_STEP = 1e-3
CAUCHY_RADIUS = 0.05
CAUCHY_POINTS = 16
CHUNK = 200_000  # (zeta, t) evaluation points per batch


class FamilyError(ValueError):
    pass


def _rdot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Real inner product on C^m along the last axis."""
    return np.real(np.sum(np.conj(a) * b, axis=-1))


def realify(A: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts along axis -2: (..., n, c) -> (..., 2n, c)."""
    return np.concatenate([A.real, A.imag], axis=-2)


def _rank(sigma: np.ndarray, tau: float, floor: float) -> np.ndarray:
    smax = sigma[..., :1]
    keep = (sigma > tau * smax) & (smax > floor)
    return np.sum(keep, axis=-1)


# --- parameter manifolds ------------------------------------------------------------

@dataclass(frozen=True)
class ParamManifold:
    """Closed parameter manifold sampled on a lattice.

    ``points`` holds the lattice as an ``(M, m)`` complex array: the circle
    is ``|t| = 1`` in C, the torus ``|t1| = |t2| = 1`` in C^2 and the sphere
    ``|t1|^2 + |t2|^2 = 1``.  ``axes`` are the lattice coordinates (angles)
    in the order of ``grid_shape``.
    """

    kind: str
    points: np.ndarray
    grid_shape: tuple
    axes: tuple
    axis_names: tuple

    @property
    def k(self) -> int:
        return {"point": 0, "circle": 1, "torus": 2, "sphere": 3}[self.kind]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    @property
    def M(self) -> int:
        return self.points.shape[0]

    @property
    def homology_condition(self) -> bool:
        """Whether H_{k-2}(M) vanishes for the shipped manifolds (the torus
        is flagged as not meeting it)."""
        return self.kind != "torus"

    def retract(self, t: np.ndarray) -> np.ndarray:
        if self.kind in ("circle", "torus"):
            return t / np.abs(t)
        if self.kind == "sphere":
            return t / np.linalg.norm(t, axis=-1, keepdims=True)
        return t

    def tangent_basis(self, t: np.ndarray) -> np.ndarray:
        """Orthonormal real basis of the tangent space, shape ``(P, k, m)``."""
        P = t.shape[0]
        if self.kind == "point":
            return np.zeros((P, 0, 0), dtype=complex)
        if self.kind == "circle":
            return (1j * t)[:, None, :]
        if self.kind == "torus":
            out = np.zeros((P, 2, 2), dtype=complex)
            out[:, 0, 0] = 1j * t[:, 0]
            out[:, 1, 1] = 1j * t[:, 1]
            return out
        a, b = t[:, 0], t[:, 1]
        w = np.stack([-np.conj(b), np.conj(a)], axis=-1)
        return np.stack([1j * t, w, 1j * w], axis=1)

    def fields(self, t: np.ndarray) -> np.ndarray:
        """Global vector fields used for the Jacobian, shape ``(P, F, m)``.

        On the circle and torus these are the coordinate-angle fields.  On the
        sphere they are the orthogonal projections of the four real unit
        vectors of C^2 onto the tangent spaces, ``x - Re<x, t> t``.
        """
        if self.kind != "sphere":
            return self.tangent_basis(t)
        P = t.shape[0]
        out = np.empty((P, 4, 2), dtype=complex)
        for j, x in enumerate(np.array([[1, 0], [1j, 0], [0, 1], [0, 1j]], dtype=complex)):
            out[:, j, :] = x[None, :] - _rdot(x[None, :], t)[:, None] * t
        return out

    def variables(self, t: np.ndarray) -> dict:
        """Expression variables for the points ``t`` (shape ``(P, m)``)."""
        if self.kind == "circle":
            return {"t": t[:, 0]}
        if self.kind in ("torus", "sphere"):
            return {"t1": t[:, 0], "t2": t[:, 1]}
        return {}

    @staticmethod
    def point() -> "ParamManifold":
        return ParamManifold("point", np.zeros((1, 0), dtype=complex), (1,), (np.zeros(1),), ("t",))

    @staticmethod
    def circle(M: int = 128) -> "ParamManifold":
        th = angles(M)
        return ParamManifold("circle", np.exp(1j * th)[:, None], (M,), (th,), ("theta",))

    @staticmethod
    def torus(M1: int = 32, M2: int = 32) -> "ParamManifold":
        a, b = angles(M1), angles(M2)
        A, B = np.meshgrid(a, b, indexing="ij")
        pts = np.stack([np.exp(1j * A).ravel(), np.exp(1j * B).ravel()], axis=-1)
        return ParamManifold("torus", pts, (M1, M2), (a, b), ("theta1", "theta2"))

    @staticmethod
    def sphere(n_eta: int = 8, n_xi: int = 16, radius: float = 1.0) -> "ParamManifold":
        """Hopf lattice ``(cos eta e^{i xi1}, sin eta e^{i xi2})`` with ``eta``
        spanning ``[0, pi/2]`` endpoints included, so both coordinate circles
        are on the lattice."""
        eta = np.linspace(0.0, np.pi / 2, n_eta)
        xi = angles(n_xi)
        E, X1, X2 = np.meshgrid(eta, xi, xi, indexing="ij")
        pts = radius * np.stack([np.cos(E) * np.exp(1j * X1), np.sin(E) * np.exp(1j * X2)], axis=-1)
        pts = pts.reshape(-1, 2)
        return ParamManifold("sphere", pts, (n_eta, n_xi, n_xi), (eta, xi, xi), ("eta", "xi1", "xi2"))


# --- the family ------------------------------------------------------------------------

PhiFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DiscFamily:
    """``phi(zeta, t)`` maps ``zeta`` of shape ``(P,)`` and ``t`` of shape
    ``(P, m)`` to ``(P, n)``.  The disc grid is the boundary circle with
    ``n_psi`` angles plus the interior circles of the given ``radii``."""

    phi: PhiFn
    manifold: ParamManifold
    n: int
    d: int
    n_psi: int = 256
    radii: tuple = (0.0, 0.25, 0.5, 0.75)
    name: str = ""
    holomorphy_defect: float = 0.0
    ambient_room: bool = True
    scale: float = 1.0
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def k(self) -> int:
        return self.manifold.k

    @property
    def all_radii(self) -> tuple:
        return tuple(self.radii) + (1.0,)

    @property
    def psi(self) -> np.ndarray:
        return angles(self.n_psi)

    def __call__(self, zeta, t) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=complex).reshape(-1)
        t = np.asarray(t, dtype=complex).reshape(zeta.shape[0], -1)
        return np.asarray(self.phi(zeta, t), dtype=complex).reshape(zeta.shape[0], self.n)

    def boundary_values(self) -> np.ndarray:
        """``Phi(e^{i psi}, t)`` with shape ``(n_psi, M, n)``."""
        return _on_grid(self, lambda z, t: self(z, t), (1.0,), self.n)[0]

    def fiber(self, j: int) -> Callable[[np.ndarray], np.ndarray]:
        t = self.manifold.points[j]

        def f(zeta):
            z = np.asarray(zeta, dtype=complex)
            return self(z.reshape(-1), np.broadcast_to(t, (z.size, self.manifold.m))).reshape(z.shape + (self.n,))
        return f


def _on_grid(f: DiscFamily, fn, radii: Sequence[float], width: int, dtype=complex) -> np.ndarray:
    """Evaluate ``fn(zeta, t) -> (P, width)`` on ``radii x psi x manifold``,
    batched, returning shape ``(R, n_psi, M, width)``."""
    psi = f.psi
    zrow = np.concatenate([r * np.exp(1j * psi) for r in radii])
    Z = zrow.size
    tp = f.manifold.points
    M = tp.shape[0]
    out = np.empty((Z, M, width), dtype=dtype)
    step = max(1, CHUNK // max(Z, 1))
    for s in range(0, M, step):
        tc = tp[s:s + step]
        zz = np.repeat(zrow, tc.shape[0])
        tt = np.tile(tc, (Z, 1))
        out[:, s:s + step] = np.asarray(fn(zz, tt)).reshape(Z, tc.shape[0], width)
    return out.reshape(len(radii), psi.size, M, width)


def build_family(phi: PhiFn, manifold: ParamManifold, d: int, *, n_psi: int = 256,
                 radii: Sequence[float] = (0.0, 0.25, 0.5, 0.75), name: str = "",
                 strict: bool = True) -> DiscFamily:
    """Validate and wrap a disc family.

    Holomorphy in ``zeta`` is checked through the negative Fourier modes of
    every boundary circle.  With ``strict`` the dimension constraints
    ``2n >= k + 2`` and ``d in {k, k+1}`` raise; otherwise the first is only
    recorded (planar curve families live in C and fail it by design).
    """
    if not is_power_of_two(n_psi) or n_psi < 16:
        raise FamilyError(f"n_psi must be a power of two >= 16, got {n_psi}")
    probe = np.asarray(phi(np.zeros(1, dtype=complex), manifold.points[:1]), dtype=complex)
    n = int(probe.reshape(1, -1).shape[1])
    fam = DiscFamily(phi, manifold, n, int(d), n_psi, tuple(float(r) for r in radii), name)
    k = manifold.k
    if d not in (k, k + 1):
        raise FamilyError(f"declared d={d} must be k={k} or k+1={k + 1}")
    room = 2 * n >= k + 2
    if strict and not room:
        raise FamilyError(f"ambient dimension too small: 2n={2 * n} < k+2={k + 2}")
    bv = fam.boundary_values()
    if not np.all(np.isfinite(bv)):
        raise FamilyError("family produced non-finite values on the boundary")
    scale = max(1.0, float(np.max(np.abs(bv))))
    coef = np.fft.fft(bv, axis=0) / n_psi
    neg = coef[n_psi // 2 + 1:]  # modes -N/2+1 .. -1
    defect = float(np.max(np.sqrt(np.sum(np.abs(neg) ** 2, axis=0)))) if neg.size else 0.0
    if defect > HOLOMORPHY_TOL * scale:
        raise FamilyError(f"family is not holomorphic in zeta: negative Fourier mass {defect:.3e}")
    return DiscFamily(phi, manifold, n, int(d), n_psi, tuple(float(r) for r in radii), name,
                      defect, room, scale)


# --- derivatives ------------------------------------------------------------------------

def _dzeta(f: DiscFamily, zeta: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Cauchy-integral derivative in zeta on a small circle."""
    w = np.exp(2j * np.pi * np.arange(CAUCHY_POINTS) / CAUCHY_POINTS)
    zz = (zeta[:, None] + CAUCHY_RADIUS * w[None, :]).reshape(-1)
    tt = np.repeat(t, CAUCHY_POINTS, axis=0)
    vals = f(zz, tt).reshape(zeta.size, CAUCHY_POINTS, f.n)
    return np.einsum("pjn,j->pn", vals, np.conj(w)) / (CAUCHY_POINTS * CAUCHY_RADIUS)


def _dt(f: DiscFamily, zeta: np.ndarray, t: np.ndarray, V: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """Derivative of Phi along the tangent vector V, fourth-order central
    differences through the manifold's retraction."""
    R = f.manifold.retract
    g = lambda s: f(zeta, R(t + s * V))
    return (-g(2 * h) + 8 * g(h) - 8 * g(-h) + g(-2 * h)) / (12 * h)


def _partials(f: DiscFamily, zeta: np.ndarray, t: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    cols = [_dzeta(f, zeta, t)]
    for j in range(vectors.shape[1]):
        cols.append(_dt(f, zeta, t, vectors[:, j, :]))
    return np.stack(cols, axis=-1)


def partials(f: DiscFamily, zeta, t, *, fields: Sequence[int] | None = None) -> np.ndarray:
    """``[d Phi/d zeta, T_1 Phi, ..., T_k Phi]`` with shape ``(P, n, k+1)``.

    The ``T_j`` are an orthonormal tangent basis (unit-speed angle fields on
    circles and tori) unless ``fields`` picks global fields by index.  The
    zeta-derivative is a Cauchy integral on a circle of radius 0.05 so the
    evaluator must accept points slightly outside the closed disc.
    """
    zeta = np.asarray(zeta, dtype=complex).reshape(-1)
    t = np.asarray(t, dtype=complex).reshape(zeta.size, -1)
    vecs = f.manifold.tangent_basis(t) if fields is None else f.manifold.fields(t)[:, list(fields), :]
    return _partials(f, zeta, t, vecs)


def _partials_grid(f: DiscFamily, radii) -> np.ndarray:
    key = ("partials", tuple(radii))
    if key not in f._cache:
        f._cache[key] = _compute_partials_grid(f, radii)
        f._cache[key].setflags(write=False)
    return f._cache[key]


def _compute_partials_grid(f: DiscFamily, radii) -> np.ndarray:
    k = f.k

    def fn(z, t):
        return _partials(f, z, t, f.manifold.tangent_basis(t)).reshape(z.size, -1)

    out = _on_grid(f, fn, radii, f.n * (k + 1))
    return out.reshape(out.shape[:3] + (f.n, k + 1))


# --- rank fields ------------------------------------------------------------------------

@dataclass(frozen=True)
class RankField:
    """Complex rank of ``dPhi`` on the grid ``radii x psi x manifold``."""

    values: np.ndarray
    sigma: np.ndarray
    tau: float
    radii: tuple
    d: int

    @property
    def max_rank(self) -> int:
        return int(np.max(self.values))

    @property
    def ratio(self) -> np.ndarray:
        """``sigma_d / sigma_1`` per point (0 where fewer than d values exist)."""
        if self.sigma.shape[-1] < self.d:
            return np.zeros(self.values.shape)
        s1 = self.sigma[..., 0]
        return np.where(s1 > 0, self.sigma[..., self.d - 1] / np.where(s1 > 0, s1, 1.0), 0.0)


def rank_field(f: DiscFamily, tau: float = RANK_TOL) -> RankField:
    """Complex rank by singular values: ``sigma_i`` counts when it exceeds
    ``tau * sigma_max``."""
    A = _partials_grid(f, f.all_radii)
    sigma = np.linalg.svd(A, compute_uv=False)
    values = _rank(sigma, tau, 1e-13 * f.scale)
    return RankField(values, sigma, tau, f.all_radii, f.d)


@dataclass(frozen=True)
class RegularityReport:
    passed: bool
    t_rank_passed: bool
    boundary_passed: bool
    t_rank_min: int
    t_rank_failures: int
    failure_samples: list
    boundary_rank_counts: dict
    grid_points: int


def regularity_check(f: DiscFamily, tau: float = RANK_TOL) -> RegularityReport:
    """Full real rank of the t-derivatives at every grid point, and real rank
    ``d`` (or ``d - 1`` on the preimage of the edge of the image) of the
    boundary differential ``[dPhi/dpsi, T_1 Phi, ...]``."""
    A = _partials_grid(f, f.all_radii)
    k = f.k
    floor = 1e-13 * f.scale
    if k:
        s_t = np.linalg.svd(realify(A[..., 1:]), compute_uv=False)
        t_rank = _rank(s_t, tau, floor)
    else:
        t_rank = np.zeros(A.shape[:3], dtype=int)
    bad = np.argwhere(t_rank < k)
    samples = [{"radius": float(f.all_radii[i]), "psi": float(f.psi[j]), "t_index": int(m)}
               for i, j, m in bad[:10]]
    zeta_b = np.exp(1j * f.psi)[:, None, None]
    B = A[-1].copy()
    B[..., 0] = 1j * zeta_b * B[..., 0]
    s_b = np.linalg.svd(realify(B), compute_uv=False)
    b_rank = _rank(s_b, tau, floor)
    vals, counts = np.unique(b_rank, return_counts=True)
    rc = {int(v): int(c) for v, c in zip(vals, counts)}
    b_ok = set(rc) <= {f.d, f.d - 1}
    return RegularityReport(bool(not bad.size and b_ok), bool(not bad.size), bool(b_ok),
                            int(np.min(t_rank)), int(len(bad)), samples, rc, int(t_rank.size))


def strip_regularity(f: DiscFamily, rel_tol: float = 1e-6, margin: float | None = None) -> dict:
    """Planar regularity: ``Im(dPhi/dt / dPhi/dpsi)`` must not vanish on the
    boundary circles except where the point lies on the edge of the covered
    domain.  Points where it vanishes are tested against every curve: a point
    strictly inside some other disc is an interior failure."""
    if f.n != 1 or f.k != 1:
        raise FamilyError("strip regularity applies to planar one-parameter families")
    A = _partials_grid(f, f.all_radii)[-1]
    zeta = np.exp(1j * f.psi)[:, None]
    dpsi = 1j * zeta * A[..., 0, 0]
    dt = A[..., 0, 1]
    ratio = dt / dpsi
    flat = np.abs(ratio.imag) <= rel_tol * np.maximum(np.abs(ratio), 1e-300)
    pts = f.boundary_values()[..., 0]
    cand = pts[flat]
    curves = pts.T  # (M, n_psi)
    if margin is None:
        margin = 3.0 * float(np.max(np.abs(np.roll(curves, -1, axis=1) - curves)))
    interior = np.zeros(cand.size, dtype=bool)
    if cand.size:
        w, dist = _winding_many(curves, cand)
        interior = np.any((np.rint(w) >= 1) & (dist > margin), axis=0)
    return {
        "passed": bool(not np.any(interior)),
        "flat_points": int(cand.size),
        "interior_flat_points": int(np.sum(interior)),
        "min_abs_im_ratio": float(np.min(np.abs(ratio.imag))),
    }


# --- Jacobian ------------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobianField:
    values: np.ndarray          # (R, n_psi, M) on radii x psi x manifold
    eta: tuple
    fields_used: tuple
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    t_points: np.ndarray
    radii: tuple
    center_max: float
    negative_mass: np.ndarray   # per fiber
    scale: float

    @property
    def boundary(self) -> np.ndarray:
        return self.values[-1]


def _jacobian_fn(f: DiscFamily, eta: tuple, fields: tuple):
    eta = list(eta)
    fields = list(fields)

    def J(zeta, t):
        zeta = np.asarray(zeta, dtype=complex).reshape(-1)
        t = np.asarray(t, dtype=complex).reshape(zeta.size, -1)
        vecs = f.manifold.fields(t)[:, fields, :] if fields else np.zeros((zeta.size, 0, f.manifold.m), complex)
        A = _partials(f, zeta, t, vecs)
        A[..., 0] = 1j * zeta[:, None] * A[..., 0]
        return np.linalg.det(A[:, eta, :])
    return J


def jacobian_field(f: DiscFamily, eta: Sequence[int] | None = None,
                   fields: Sequence[int] | None = None) -> JacobianField:
    """``J = eta(dPhi/dpsi, T_1 Phi, ..., T_{d-1} Phi)`` for a coordinate
    d-form ``eta = dz_{i1} ^ ... ^ dz_{id}`` (a d x d minor).

    Without ``eta`` the minor maximizing ``max |J|`` on a coarse probe grid is
    used, the lexicographically first one among ties.
    """
    d, n = f.d, f.n
    nf = f.manifold.fields(f.manifold.points[:1]).shape[1]
    fields = tuple(range(d - 1)) if fields is None else tuple(int(i) for i in fields)
    if len(fields) != d - 1 or len(set(fields)) != d - 1 or any(not 0 <= i < nf for i in fields):
        raise FamilyError(f"need {d - 1} distinct frame indices below {nf}, got {fields}")
    if eta is None:
        if d > n:
            raise FamilyError(f"no coordinate {d}-form exists in C^{n}")
        step_t = max(1, f.manifold.M // 16)
        tp = f.manifold.points[::step_t]
        zp = np.exp(1j * angles(32))
        zz = np.repeat(zp, tp.shape[0])
        tt = np.tile(tp, (zp.size, 1))
        scores = []
        for cand in itertools.combinations(range(n), d):
            scores.append((float(np.max(np.abs(_jacobian_fn(f, cand, fields)(zz, tt)))), cand))
        best = max(s for s, _ in scores)
        eta = next(c for s, c in scores if s >= best * (1 - 1e-9))
    eta = tuple(int(i) for i in eta)
    if len(eta) != d or len(set(eta)) != d or any(not 0 <= i < n for i in eta):
        raise FamilyError(f"invalid minor selection {eta} for d={d}, n={n}")
    Jf = _jacobian_fn(f, eta, fields)
    vals = _on_grid(f, lambda z, t: Jf(z, t)[:, None], f.all_radii, 1)[..., 0]
    center = float(np.max(np.abs(Jf(np.zeros(f.manifold.M, complex), f.manifold.points))))
    coef = np.fft.fft(vals[-1], axis=0) / f.n_psi
    neg = np.sqrt(np.sum(np.abs(coef[f.n_psi // 2 + 1:]) ** 2, axis=0))
    scale = max(1.0, float(np.max(np.abs(vals))))
    return JacobianField(vals, eta, fields, Jf, f.manifold.points, f.all_radii, center, neg, scale)


def fiber_ratio_test(jf: JacobianField, f: DiscFamily, coincidence_tol: float = 1e-9,
                     j_floor: float = 1e-3, tol: float = 1e-6,
                     multiplier: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None) -> dict:
    """Check that ``J / conj(J)`` takes one value on boundary points with the
    same image.  ``multiplier(zeta, t)`` rescales J before the test (for
    controls)."""
    bv = f.boundary_values()                         # (n_psi, M, n)
    J = jf.boundary.copy()
    if multiplier is not None:
        Z = np.broadcast_to(np.exp(1j * f.psi)[:, None], J.shape)
        T = np.broadcast_to(f.manifold.points[None, :, :], J.shape + (f.manifold.m,))
        J = J * np.asarray(multiplier(Z.reshape(-1), T.reshape(-1, f.manifold.m))).reshape(J.shape)
    pts = realify(bv.reshape(-1, f.n)[..., None])[..., 0]
    Jv = J.reshape(-1)
    tree = cKDTree(pts)
    pairs = tree.query_pairs(coincidence_tol * f.scale, output_type="ndarray")
    big = np.abs(Jv) > j_floor * float(np.max(np.abs(Jv)))
    if len(pairs):
        pairs = pairs[big[pairs[:, 0]] & big[pairs[:, 1]]]
    if not len(pairs):
        return {"status": "vacuous", "pairs": 0, "max_violation": 0.0, "passed": True}
    with np.errstate(invalid="ignore", divide="ignore"):
        g = Jv / np.conj(Jv)
    viol = np.abs(g[pairs[:, 0]] - g[pairs[:, 1]])
    mv = float(np.max(viol))
    return {"status": "tested", "pairs": int(len(pairs)), "max_violation": mv, "passed": bool(mv < tol)}


# --- zero tracking ---------------------------------------------------------------------------

@dataclass
class ZeroTracking:
    fibers: list                     # ZeroList or None (singular fiber) per t
    singular: list                   # indices of fibers with J identically zero
    chains: np.ndarray               # (M, S) sheet locations, nan on singular fibers
    counts: list                     # weighted zero count per fiber
    conserved: bool
    branching: list = field(default_factory=list)
    monodromy: list | None = None

    @property
    def nontrivial_monodromy(self) -> bool:
        return self.monodromy is not None and self.monodromy != sorted(self.monodromy)


def _taylor_fibers(jf: JacobianField) -> list:
    """Per-fiber Taylor coefficients of J from its boundary samples, with
    the negligible tail dropped; evaluating these is far cheaper than
    re-differentiating the family."""
    N = jf.boundary.shape[0]
    coef = (np.fft.fft(jf.boundary, axis=0) / N)[: N // 2]
    out = []
    for j in range(coef.shape[1]):
        c = coef[:, j]
        big = np.flatnonzero(np.abs(c) > 1e-14 * max(float(np.max(np.abs(c))), 1e-300))
        out.append(c[: big[-1] + 1] if big.size else c[:1])
    return out


def _horner(c: np.ndarray):
    def g(z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for a in c[::-1]:
            out = out * z + a
        return out
    return g


def _expand(zl: ZeroList) -> np.ndarray:
    return np.array([z.location for z in zl for _ in range(z.multiplicity)], dtype=complex)


def track_zeros(J, t_points: np.ndarray | None = None, *, periodic: bool = True,
                zero_tol: float = 1e-10, check_counts: bool = True) -> ZeroTracking:
    """Zeros of ``J(., t)`` in the closed disc for every lattice ``t``,
    stitched into sheets by optimal nearest matching between neighbours.

    ``J`` is a :class:`JacobianField` or a callable ``J(zeta, t)`` with
    ``t_points`` given.  Fibers where J vanishes identically are recorded as
    singular and skipped.  For a closed one-parameter lattice the sheet
    permutation after one loop is returned as ``monodromy``.
    """
    taylor = None
    if isinstance(J, JacobianField):
        fn, tp = J.evaluator, J.t_points
        taylor = _taylor_fibers(J)
    else:
        if t_points is None:
            raise ValueError("t_points required for a callable J")
        fn, tp = J, np.asarray(t_points, dtype=complex).reshape(len(t_points), -1)
    M = tp.shape[0]
    probe = np.exp(1j * angles(64))
    bvals = [np.asarray(fn(probe, np.broadcast_to(tp[j], (64, tp.shape[1]))), dtype=complex) for j in range(M)]
    scale = max(1.0, max(float(np.max(np.abs(v))) for v in bvals))
    fibers, singular, counts = [], [], []
    conserved = True
    for j in range(M):
        if np.max(np.abs(bvals[j])) < zero_tol * scale:
            fibers.append(None)
            singular.append(j)
            counts.append(None)
            continue
        if taylor is not None:
            g = _horner(taylor[j])
        else:
            g = lambda z, tj=tp[j]: fn(np.asarray(z, complex).reshape(-1),
                                       np.broadcast_to(tj, (np.size(z), tp.shape[1]))).reshape(np.shape(z))
        zl = locate_zeros(g)
        fibers.append(zl)
        counts.append(zl.weighted_count())
        if check_counts:
            try:
                conserved &= abs(zero_count(g, 0.0) - zl.weighted_count()) < 1e-9
            except ArgumentError:
                conserved = False
    S = max((sum(z.multiplicity for z in zl) for zl in fibers if zl is not None), default=0)
    chains = np.full((M, S), np.nan + 1j * np.nan)
    branching = []
    prev = None
    first = None
    for j in range(M):
        zl = fibers[j]
        if zl is None:
            continue
        cur = _expand(zl)
        if prev is not None and cur.size == prev.size and cur.size:
            cost = np.abs(prev[:, None] - cur[None, :])
            _, col = linear_sum_assignment(cost)
            cur = cur[col]
        elif prev is not None and cur.size != prev.size:
            branching.append(j)
        if prev is not None and len({z.location for z in zl}) != len(np.unique(np.round(prev, 9))):
            if j not in branching:
                branching.append(j)
        chains[j, :cur.size] = cur
        if first is None:
            first = cur
        prev = cur
    monodromy = None
    if periodic and first is not None and prev is not None and first.size == prev.size and not branching:
        cost = np.abs(prev[:, None] - first[None, :])
        _, col = linear_sum_assignment(cost)
        monodromy = [int(c) for c in col]
    return ZeroTracking(fibers, singular, chains, counts, bool(conserved), branching, monodromy)


# --- degeneracy ------------------------------------------------------------------------------

@dataclass(frozen=True)
class DegeneracyReport:
    branch: str          # DimensionDrop | ZeroDegree | NotDegenerate | Unknown
    degree: int | None
    verified: bool
    detail: str

    @property
    def degenerate(self) -> bool | None:
        if self.branch in ("DimensionDrop", "ZeroDegree"):
            return True
        if self.branch == "NotDegenerate":
            return False
        return None


def _boundary_real_rank(f: DiscFamily, tau: float) -> tuple[np.ndarray, np.ndarray]:
    A = _partials_grid(f, f.all_radii)[-1].copy()
    A[..., 0] = 1j * np.exp(1j * f.psi)[:, None, None] * A[..., 0]
    s = np.linalg.svd(realify(A), compute_uv=False)
    return _rank(s, tau, 1e-13 * f.scale), s


def degeneracy_check(f: DiscFamily, tau: float = RANK_TOL) -> DegeneracyReport:
    """Which degeneracy branch the boundary map ``S^1 x M -> Lambda`` takes.

    ``d < k + 1`` is a dimension drop, confirmed when the sampled real rank
    of the boundary differential never exceeds ``d``.  For ``d = k + 1 <= 2``
    the Brouwer degree is computed by signed preimage counting of a regular
    value; larger targets are reported as Unknown.
    """
    k, d = f.k, f.d
    if d < k + 1:
        ranks, _ = _boundary_real_rank(f, tau)
        ok = int(np.max(ranks)) <= d
        return DegeneracyReport("DimensionDrop", None, ok,
                                f"d={d} < k+1={k + 1}; max sampled boundary rank {int(np.max(ranks))}")
    if d > 2:
        return DegeneracyReport("Unknown", None, False, f"degree in dimension {d} is not computed")
    deg = _degree_1d(f) if d == 1 else _degree_2d(f, tau)
    return DegeneracyReport("ZeroDegree" if deg == 0 else "NotDegenerate", deg, True,
                            f"signed preimage count {deg}")


def _degree_1d(f: DiscFamily) -> int:
    psi = f.psi
    P = f.boundary_values()[:, 0, :]
    i0 = 0
    h = psi[1] - psi[0]
    s = psi[i0] + 0.37 * h
    t0 = f.manifold.points[:1]
    b = f(np.exp(1j * np.array([s])), t0)[0]
    tang = realify((1j * np.exp(1j * s) * _dzeta(f, np.exp(1j * np.array([s])), t0))[..., None])[0, :, 0]
    tang = tang / np.linalg.norm(tang)
    x = realify((P - b)[..., None])[..., 0] @ tang
    dist = np.linalg.norm(P - b, axis=1)
    rho = 4.0 * float(np.max(np.abs(np.roll(P, -1, axis=0) - P)))
    deg = 0
    for j in range(psi.size):
        jn = (j + 1) % psi.size
        if dist[j] < rho and dist[jn] < rho and (x[j] < 0) != (x[jn] < 0):
            deg += 1 if x[jn] > x[j] else -1
    return deg


def _degree_2d(f: DiscFamily, tau: float) -> int:
    if f.manifold.kind != "circle":
        raise FamilyError("two-dimensional degree needs a circle parameter")
    psi, th = f.psi, f.manifold.axes[0]
    P = f.boundary_values()                           # (Npsi, M, n)
    ranks, s = _boundary_real_rank(f, tau)
    cond = np.where(s[..., 0] > 0, s[..., 1] / np.where(s[..., 0] > 0, s[..., 0], 1), 0)
    i0, j0 = np.unravel_index(int(np.argmax(cond)), cond.shape)
    hp, ht = psi[1] - psi[0], th[1] - th[0]
    ps, ts = psi[i0] + 0.37 * hp, th[j0] + 0.29 * ht
    z1 = np.exp(1j * np.array([ps]))
    t1 = np.array([[np.exp(1j * ts)]])
    b = f(z1, t1)[0]
    A = _partials(f, z1, t1, f.manifold.tangent_basis(t1))
    A[..., 0] = 1j * z1[:, None] * A[..., 0]
    Q, _ = np.linalg.qr(realify(A)[0])
    X = realify((P - b)[..., None])[..., 0] @ Q          # (Npsi, M, 2)
    dist = np.linalg.norm(P - b, axis=-1)
    edges = max(float(np.max(np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=-1))),
                float(np.max(np.linalg.norm(np.roll(P, -1, axis=1) - P, axis=-1))))
    rho = 4.0 * edges
    near = dist < rho
    deg = 0
    I, Jn = P.shape[0], P.shape[1]
    for i, j in zip(*np.nonzero(near)):
        a = (i, j)
        bq = ((i + 1) % I, j)
        c = ((i + 1) % I, (j + 1) % Jn)
        dq = (i, (j + 1) % Jn)
        for tri in ((a, bq, c), (a, c, dq)):
            if not all(near[v] for v in tri):
                continue
            deg += _tri_sign(X[tri[0]], X[tri[1]], X[tri[2]])
    return deg


def _cross(u, v) -> float:
    return float(u[0] * v[1] - u[1] * v[0])


def _tri_sign(xa, xb, xc) -> int:
    """Orientation of the triangle if it contains the origin, else 0."""
    s = _cross(xb - xa, xc - xa)
    if s == 0:
        return 0
    e1 = _cross(xb - xa, -xa)
    e2 = _cross(xc - xb, -xb)
    e3 = _cross(xa - xc, -xc)
    if s > 0 and e1 > 0 and e2 > 0 and e3 > 0:
        return 1
    if s < 0 and e1 < 0 and e2 < 0 and e3 < 0:
        return -1
    return 0


# --- orbits ----------------------------------------------------------------------------------

def _winding_many(curves: np.ndarray, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Winding numbers and distances of ``pts`` with respect to each curve;
    returns arrays of shape ``(n_curves, n_pts)``."""
    N = curves.shape[1]
    dz = np.array([spectral_derivative(ClosedCurve(c)).z for c in curves])
    W = np.empty((curves.shape[0], pts.size))
    D = np.empty((curves.shape[0], pts.size))
    for i in range(curves.shape[0]):
        diff = curves[i][None, :] - pts[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            W[i] = np.real(np.sum(dz[i][None, :] / diff, axis=1) / (1j * N))
        D[i] = np.min(np.abs(diff), axis=1)
    return W, D


@dataclass(frozen=True)
class OrbitReport:
    mode: str
    status: str                   # trivial | nontrivial | inconclusive
    common_point: complex | None = None
    grid: int = 0
    margin: float = 0.0

    @property
    def nontrivial(self) -> bool | None:
        return {"trivial": False, "nontrivial": True}.get(self.status)


def common_point_search(curves: np.ndarray, grid: int = 200) -> OrbitReport:
    """Grid search for a point surrounded by every curve of ``curves``
    (shape ``(n_curves, N)``).

    Lattice points are screened with a polygon containment test and kept only
    at distance at least three sample spacings from every curve, where the
    sampled polygon and the curve agree.  The deepest surviving point is then
    confirmed by quadrature winding numbers.  If no lattice point is certainly
    inside all curves but some are inside-or-too-close for all of them, the
    search is inconclusive.
    """
    curves = np.asarray(curves, dtype=complex)
    # coincident curves impose the same condition once
    scale = max(1.0, float(np.max(np.abs(curves))))
    key = np.round(np.concatenate([curves.real, curves.imag], axis=1) / (1e-12 * scale))
    _, first = np.unique(key, axis=0, return_index=True)
    curves = curves[np.sort(first)]
    margin = 3.0 * float(np.max(np.abs(np.roll(curves, -1, axis=1) - curves)))
    x0, x1 = float(curves.real.min()), float(curves.real.max())
    y0, y1 = float(curves.imag.min()), float(curves.imag.max())
    X, Y = np.meshgrid(np.linspace(x0, x1, grid), np.linspace(y0, y1, grid))
    cand = np.column_stack([X.ravel(), Y.ravel()])
    sure = np.ones(len(cand), dtype=bool)
    depth = np.full(len(cand), np.inf)
    # small curves first: they prune the candidate set fastest
    area = 0.5 * np.abs(np.sum(np.imag(np.conj(curves) * np.roll(curves, -1, axis=1)), axis=1))
    for c in curves[np.argsort(area, kind="stable")]:
        if not len(cand):
            break
        xy = np.column_stack([c.real, c.imag])
        inside = Path(xy, closed=False).contains_points(cand)
        dist, _ = cKDTree(xy).query(cand)
        close = dist <= margin
        keep = inside | close
        sure = (sure & inside & ~close)[keep]
        depth = np.minimum(depth, dist)[keep]
        cand = cand[keep]
    if np.any(sure):
        idx = np.flatnonzero(sure)
        best = idx[int(np.argmax(depth[idx]))]
        b = complex(cand[best, 0], cand[best, 1])
        if all(round(winding_number(ClosedCurve(c), b)) >= 1 for c in curves):
            return OrbitReport("planar", "trivial", b, grid, margin)
        return OrbitReport("planar", "inconclusive", None, grid, margin)
    if len(cand):
        return OrbitReport("planar", "inconclusive", None, grid, margin)
    return OrbitReport("planar", "nontrivial", None, grid, margin)


def orbit_nontriviality(f: DiscFamily, mode: str = "planar", *, declared: str | None = None,
                        projection: int = 0, grid: int = 200) -> OrbitReport:
    """Planar mode: the boundary curves of the discs (projected to one
    coordinate when ``n > 1``) share a surrounded point exactly when the
    orbit is trivial.  Declared mode returns the scenario's declaration."""
    if mode == "declared":
        if declared not in ("trivial", "nontrivial"):
            raise FamilyError("declared orbit status must be 'trivial' or 'nontrivial'")
        return OrbitReport("declared", declared)
    if mode != "planar":
        raise FamilyError(f"unknown orbit mode {mode!r}")
    if f.k != 1:
        raise FamilyError("the planar orbit test needs a one-parameter family")
    if not 0 <= projection < f.n:
        raise FamilyError(f"projection index {projection} out of range for n={f.n}")
    curves = f.boundary_values()[..., projection].T
    return common_point_search(curves, grid)


# --- verdict ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    regular: bool
    degeneracy: str
    degenerate: bool | None
    orbit: str
    max_rank: int
    d: int
    collapsed: bool
    max_ratio: float
    dense_fraction: float
    hypotheses_hold: bool | None
    violated: tuple
    outcome: str


def parametric_ap_verdict(f: DiscFamily, orbit: OrbitReport, *,
                          regularity: RegularityReport | None = None,
                          degeneracy: DegeneracyReport | None = None,
                          rank: RankField | None = None, tau: float = RANK_TOL) -> Verdict:
    """Combine the hypotheses (regularity, boundary degeneracy, nontrivial
    orbit) with the measured rank of ``dPhi``.

    Outcomes: PASS / FAIL when every hypothesis holds (the rank must drop
    below d); counterexample-confirmed when a hypothesis fails and the rank
    does not drop; conclusion-holds-anyway when it drops regardless;
    undetermined when a hypothesis could not be decided; not-applicable for
    ``d < 2``, where the rank statement cannot hold for a regular family.
    """
    regularity = regularity or regularity_check(f, tau)
    degeneracy = degeneracy or degeneracy_check(f, tau)
    rank = rank or rank_field(f, tau)
    ratio = rank.ratio
    collapsed = rank.max_rank < f.d
    violated = []
    if not regularity.passed:
        violated.append("regularity")
    if degeneracy.degenerate is False:
        violated.append("degeneracy")
    if orbit.nontrivial is False:
        violated.append("orbit")
    unknown = degeneracy.degenerate is None or orbit.nontrivial is None
    if f.d < 2:
        hold, outcome = (None if unknown else not violated), "not-applicable"
    elif violated:
        hold = False
        outcome = "conclusion-holds-anyway" if collapsed else "counterexample-confirmed"
    elif unknown:
        hold, outcome = None, "undetermined"
    else:
        hold = True
        outcome = "PASS" if collapsed else "FAIL"
    return Verdict(regularity.passed, degeneracy.branch, degeneracy.degenerate, orbit.status,
                   rank.max_rank, f.d, bool(collapsed), float(np.max(ratio)),
                   float(np.mean(ratio > 1e-2)), hold, tuple(violated), outcome)
