"""Real submanifolds of C^n: tangent frames, CR dimension, classification
and graphs of functions over them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "CR_TOL",
    "PatchError",
    "ManifoldPatch",
    "CRField",
    "planar_patch",
    "annulus_patch",
    "box_patch",
    "sphere_patch",
    "graph_lift",
    "tangent_frame",
    "tangent_frames",
    "cr_dimension",
    "classify",
    "complex_tangent_pairs",
    "cr_verdict_from_rank",
]

CR_TOL = 1e-7
STEP_FACTOR = 1e-5

Chart = Callable[[np.ndarray, np.ndarray], np.ndarray]


class PatchError(ValueError):
    pass


@dataclass(frozen=True)
class ManifoldPatch:
    """A real ``d``-dimensional submanifold of C^n sampled at ``params``.

    ``chart(params, u)`` returns the ambient points of local coordinates
    ``u`` (shape ``(P, d)``) around each sample, with ``chart(params, 0)``
    the samples themselves.  Per-sample charts keep the differential
    well-defined where a global parametrization would be singular (the
    poles of Hopf coordinates on the sphere).  ``interior`` marks the points
    that are classified; points within one lattice cell of a declared edge
    are excluded.
    """

    chart: Chart
    params: np.ndarray
    d: int
    n: int
    grid_shape: tuple
    axes: tuple = ()
    axis_names: tuple = ()
    interior: np.ndarray | None = None
    name: str = ""
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def size(self) -> int:
        return self.params.shape[0]

    @property
    def points_ambient(self) -> np.ndarray:
        if "points" not in self._cache:
            u = np.zeros((self.size, self.d))
            self._cache["points"] = np.asarray(self.chart(self.params, u), dtype=complex).reshape(self.size, self.n)
        return self._cache["points"]

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.points_ambient))))

    @property
    def step(self) -> float:
        return STEP_FACTOR * self.scale

    @property
    def mask(self) -> np.ndarray:
        return np.ones(self.size, dtype=bool) if self.interior is None else np.asarray(self.interior, bool)


# --- patch constructors ------------------------------------------------------------

def _plane_chart(params, u):
    return (params[:, 0] + u[:, 0] + 1j * u[:, 1])[:, None]


def planar_patch(points: np.ndarray, grid_shape: tuple, interior=None, axes=(), axis_names=(),
                 name: str = "") -> ManifoldPatch:
    """Open subset of C sampled at ``points``, with the Cartesian chart."""
    pts = np.asarray(points, dtype=complex).reshape(-1, 1)
    return ManifoldPatch(_plane_chart, pts, 2, 1, tuple(grid_shape), tuple(axes), tuple(axis_names),
                         None if interior is None else np.asarray(interior, bool).reshape(-1), name)


def annulus_patch(r0: float, r1: float, n_r: int = 33, n_phi: int = 64, name: str = "annulus") -> ManifoldPatch:
    """Polar lattice on ``r0 <= |z| <= r1``; the two edge rings are excluded."""
    r = np.linspace(r0, r1, n_r)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    R, P = np.meshgrid(r, phi, indexing="ij")
    interior = np.zeros_like(R, dtype=bool)
    interior[1:-1] = True
    return planar_patch(R * np.exp(1j * P), (n_r, n_phi), interior, (r, phi), ("r", "phi"), name)


def box_patch(x0: float, x1: float, y0: float, y1: float, nx: int = 41, ny: int = 41,
              name: str = "box") -> ManifoldPatch:
    x = np.linspace(x0, x1, nx)
    y = np.linspace(y0, y1, ny)
    X, Y = np.meshgrid(x, y, indexing="ij")
    interior = np.zeros_like(X, dtype=bool)
    interior[1:-1, 1:-1] = True
    return planar_patch(X + 1j * Y, (nx, ny), interior, (x, y), ("x", "y"), name)


def _sphere_basis(p: np.ndarray) -> np.ndarray:
    """Orthonormal real tangent basis of the sphere at unit points p, (P, 3, 2)."""
    w = np.stack([-np.conj(p[:, 1]), np.conj(p[:, 0])], axis=-1)
    return np.stack([1j * p, w, 1j * w], axis=1)


def sphere_patch(n_eta: int = 8, n_xi: int = 16, radius: float = 1.0, name: str = "sphere") -> ManifoldPatch:
    """The 3-sphere ``|z1|^2 + |z2|^2 = radius^2`` on a Hopf lattice with
    ``eta`` in ``[0, pi/2]`` (both endpoints, so the coordinate circles are
    sampled) and two angles ``xi1, xi2``."""
    eta = np.linspace(0.0, np.pi / 2, n_eta)
    xi = 2 * np.pi * np.arange(n_xi) / n_xi
    E, X1, X2 = np.meshgrid(eta, xi, xi, indexing="ij")
    p = np.stack([np.cos(E) * np.exp(1j * X1), np.sin(E) * np.exp(1j * X2)], axis=-1).reshape(-1, 2)

    def chart(params, u):
        q = params + np.einsum("pj,pjm->pm", u, _sphere_basis(params))
        return radius * q / np.linalg.norm(q, axis=-1, keepdims=True)

    return ManifoldPatch(chart, p, 3, 2, (n_eta, n_xi, n_xi), (eta, xi, xi), ("eta", "xi1", "xi2"), None, name)


def graph_lift(omega: ManifoldPatch, f: Callable[[np.ndarray], np.ndarray], name: str = "") -> ManifoldPatch:
    """The graph ``u -> (x(u), f(x(u)))`` of ``f`` over ``omega`` in C^{n+1}.

    ``f`` is a callable on ambient points of shape ``(P, n)`` returning
    ``(P,)``; a callable is needed because the lift's differential is taken
    by finite differences through the chart.
    """
    base = omega.chart

    def chart(params, u):
        x = np.asarray(base(params, u), dtype=complex).reshape(params.shape[0], omega.n)
        return np.concatenate([x, np.asarray(f(x), dtype=complex).reshape(-1, 1)], axis=1)

    return ManifoldPatch(chart, omega.params, omega.d, omega.n + 1, omega.grid_shape, omega.axes,
                         omega.axis_names, omega.interior, name or f"graph over {omega.name}")


# --- frames and CR dimension -------------------------------------------------------------

def _raw_frames(p: ManifoldPatch, idx: np.ndarray) -> np.ndarray:
    h = p.step
    params = p.params[idx]
    cols = []
    for j in range(p.d):
        u = np.zeros((idx.size, p.d))
        u[:, j] = h
        plus = np.asarray(p.chart(params, u), dtype=complex).reshape(idx.size, p.n)
        minus = np.asarray(p.chart(params, -u), dtype=complex).reshape(idx.size, p.n)
        cols.append((plus - minus) / (2 * h))
    return np.stack(cols, axis=1)  # (P, d, n)


def tangent_frames(p: ManifoldPatch) -> tuple[np.ndarray, np.ndarray]:
    """Real-orthonormal tangent frames ``(P, d, n)`` at every sample and a
    flag array marking immersion failures."""
    if "frames" in p._cache:
        return p._cache["frames"]
    raw = _raw_frames(p, np.arange(p.size))
    real = np.concatenate([raw.real, raw.imag], axis=-1).transpose(0, 2, 1)  # (P, 2n, d)
    Q, R = np.linalg.qr(real)
    diag = np.abs(np.diagonal(R, axis1=-2, axis2=-1))
    ok = np.min(diag, axis=-1) > 1e-8 * np.maximum(np.max(diag, axis=-1), 1e-300)
    frames = (Q[:, : p.n, :] + 1j * Q[:, p.n:, :]).transpose(0, 2, 1)
    p._cache["frames"] = (frames, ok)
    return frames, ok


def tangent_frame(p: ManifoldPatch, i: int) -> np.ndarray:
    """The ``d`` tangent vectors at sample ``i``, orthonormal over R."""
    if not p.mask[i]:
        raise PatchError(f"point {i} is not an interior point")
    frames, ok = tangent_frames(p)
    if not ok[i]:
        raise PatchError(f"embedding differential is rank deficient at point {i}")
    return frames[i]


def cr_dimension(frame: np.ndarray, tau: float = CR_TOL) -> int | np.ndarray:
    """``c = d - rank_C(frame)`` for ``d`` real-independent vectors in C^n
    (``frame`` has shape ``(d, n)``, or ``(P, d, n)`` for a batch)."""
    F = np.asarray(frame, dtype=complex)
    s = np.linalg.svd(F, compute_uv=False)
    rank = np.sum(s > tau * s[..., :1], axis=-1)
    c = F.shape[-2] - rank
    return int(c) if np.ndim(c) == 0 else c


# --- classification ---------------------------------------------------------------------

@dataclass(frozen=True)
class CRField:
    c: np.ndarray                 # per sample, -1 where excluded
    sigma: np.ndarray
    labels: list
    d: int
    n: int
    grid_shape: tuple
    tau: float

    @property
    def valid(self) -> np.ndarray:
        return self.c >= 0

    @property
    def constant(self) -> bool:
        vals = np.unique(self.c[self.valid])
        return bool(vals.size == 1)

    @property
    def grid(self) -> np.ndarray:
        return self.c.reshape(self.grid_shape)

    def counts(self) -> dict:
        v, k = np.unique(self.c[self.valid], return_counts=True)
        return {int(a): int(b) for a, b in zip(v, k)}

    def label_counts(self) -> dict:
        out: dict = {}
        for lab, ok in zip(self.labels, self.valid):
            if ok:
                out[lab] = out.get(lab, 0) + 1
        return dict(sorted(out.items()))

    def flags(self) -> dict:
        """Global classification: each flag holds iff it holds at every
        classified point."""
        c = self.c[self.valid]
        d, n = self.d, self.n
        return {
            "totally_real": bool(np.all(c == 0)),
            "generic": bool(d >= n and np.all(c == d - n)),
            "complex": bool(d % 2 == 0 and np.all(c == d // 2)),
            "maximally_complex": bool(d % 2 == 1 and d > 1 and np.all(c == (d - 1) // 2)),
            "cr_manifold": self.constant,
        }


def _label(c: int, d: int, n: int) -> str:
    if c < 0:
        return "excluded"
    if d % 2 == 0 and c == d // 2 and c > 0:
        return "complex"
    if d % 2 == 1 and c == (d - 1) // 2 and c > 0:
        return "maximally-complex"
    if c == 0:
        return "totally-real"
    if d >= n and c == d - n:
        return "generic"
    return f"CR({c})"


def classify(p: ManifoldPatch, tau: float = CR_TOL) -> CRField:
    """CR dimension and its classification at every interior sample."""
    frames, ok = tangent_frames(p)
    s = np.linalg.svd(frames, compute_uv=False)
    rank = np.sum(s > tau * s[..., :1], axis=-1)
    c = p.d - rank
    c = np.where(p.mask & ok, c, -1)
    labels = [_label(int(v), p.d, p.n) for v in c]
    return CRField(c, s, labels, p.d, p.n, p.grid_shape, tau)


def complex_tangent_pairs(p: ManifoldPatch, tau: float = CR_TOL) -> list:
    """For every sample, pairs ``(X, iX)`` of unit vectors spanning the
    maximal complex subspace ``T ∩ iT`` (Hermitian-orthonormal in X)."""
    frames, ok = tangent_frames(p)
    out = []
    for i in range(p.size):
        if not (p.mask[i] and ok[i]):
            out.append([])
            continue
        F = frames[i]                                  # (d, n)
        B = np.concatenate([F.real, F.imag], axis=1).T  # (2n, d)
        iF = 1j * F
        iB = np.concatenate([iF.real, iF.imag], axis=1).T
        Mtx = np.concatenate([B, -iB], axis=1)          # (2n, 2d)
        _, s, Vh = np.linalg.svd(Mtx)
        s_full = np.zeros(Mtx.shape[1])
        s_full[: s.size] = s
        null = Vh[s_full <= tau * max(s_full[0], 1e-300)]
        H = null[:, : p.d] @ F                          # vectors in T with i*v in T
        basis: list = []
        for v in H:
            for b in basis:
                v = v - np.vdot(b, v) * b
            nv = np.linalg.norm(v)
            if nv > 1e-6:
                basis.append(v / nv)
        out.append([(b, 1j * b) for b in basis])
    return out


def cr_verdict_from_rank(collapse: bool | None, lift: ManifoldPatch, *, f: Callable | None = None,
                         base: ManifoldPatch | None = None, h: float | None = None,
                         tau: float = CR_TOL, dbar_tol: float = 1e-6) -> dict:
    """Turn the disc-family verdict into a statement about the lift.

    ``collapse`` is True when the family met every hypothesis and its rank
    dropped.  Then ``c >= 1`` must hold on the lift, and for graphs ``f`` must
    satisfy the tangential Cauchy-Riemann equations on ``base``; both are
    checked directly and any disagreement is reported, never resolved.
    Without a prediction the verdict is withheld but the measurements are
    still reported.
    """
    from .moments import dbar_residual

    field_ = classify(lift, tau)
    c = field_.c[field_.valid]
    min_c = int(np.min(c)) if c.size else -1
    out = {
        "predicted": collapse,
        "min_c": min_c,
        "positive_c_fraction": float(np.mean(c >= 1)) if c.size else 0.0,
    }
    resid = None
    if f is not None and base is not None:
        pts = base.points_ambient[base.mask]
        if base.n == 1 and base.d == 2:
            step = base.step if h is None else h
            resid = dbar_residual(lambda z: f(np.asarray(z)[:, None]), "planar", h=step, points=pts[:, 0])
        else:
            resid = dbar_residual(f, "tangential-CR", patch=base, tau=tau)[base.mask]
        out["max_dbar"] = float(np.max(resid))
        out["mean_dbar"] = float(np.mean(resid))
    cr_ok = min_c >= 1
    holo_ok = None if resid is None else bool(out["max_dbar"] < dbar_tol)
    if collapse:
        agree = cr_ok and (holo_ok is not False)
        word = "holomorphy certified" if base is not None and base.n == 1 else "CR certified"
        out["verdict"] = word if agree else "diagnostic-failure"
        out["agree"] = bool(agree)
    else:
        out["verdict"] = "withheld"
        out["agree"] = True if holo_ok is None else bool(cr_ok == holo_ok)
    return out
