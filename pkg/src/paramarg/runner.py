"""End-to-end pipelines: one per scenario kind, each producing a Report."""
from __future__ import annotations

import contextlib
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .argument import (ArgumentError, linking_number, locate_zeros, log_residue_pv, rounded,
                       winding_number, zero_count)
from .contour import ClosedCurve, angles, sample_curve
from .cr import classify, cr_verdict_from_rank, planar_patch, graph_lift
from .expressions import compile_expr, compile_vector
from .families import (DiscFamily, _partials_grid, degeneracy_check, fiber_ratio_test, jacobian_field,
                       orbit_nontriviality, parametric_ap_verdict, rank_field, realify, regularity_check,
                       strip_regularity, track_zeros, _rank)
from .moments import complex_moments, dbar_residual, disc_extension
from .report import Field, Report
from .scenarios import (ScenarioError, ambient_function, load_scenario, make_family, make_patch,
                        tolerances, _manifold_vars)

__all__ = ["RunError", "run", "run_ref", "run_many", "ANALYSES"]

ANALYSES = ("regularity", "degeneracy", "orbit", "rank", "jacobian", "fiber_ratio", "track_zeros",
            "fiberwise", "verdict", "cr")


class RunError(RuntimeError):
    """A module error raised inside a pipeline, tagged with the stage."""

    def __init__(self, stage: str, error: BaseException):
        super().__init__(f"[{stage}] {type(error).__name__}: {error}")
        self.stage = stage
        self.error = error


@contextlib.contextmanager
def _stage(name: str):
    try:
        yield
    except RunError:
        raise
    except Exception as exc:
        raise RunError(name, exc) from exc


def _versions() -> dict:
    import matplotlib
    import scipy
    return {"paramarg": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "matplotlib": matplotlib.__version__}


def run(data: dict) -> Report:
    """Run a validated scenario."""
    report = Report(scenario=data)
    report.provenance = {"scenario_id": data["id"], "kind": data["kind"], "tolerances": tolerances(data),
                         "versions": _versions()}
    pipeline = {
        "family-verdict": _family_verdict,
        "strip-problem": _strip_problem,
        "cr-field": _cr_field,
        "argument-principle": _argument_principle,
        "moment-check": _moment_check,
    }[data["kind"]]
    pipeline(data, report)
    with _stage("expectations"):
        _expectations(data, report)
    return report


def run_ref(ref: str, grid=None, tol=None) -> Report:
    from .scenarios import with_overrides
    data = load_scenario(ref)
    if grid is not None or tol:
        data = with_overrides(data, grid=grid, tolerances=tol)
    return run(data)


def run_many(refs: list[str], jobs: int = 1, grid=None, tol=None) -> list[Report]:
    """Independent scenario runs, optionally in worker processes; results
    keep the order of ``refs``."""
    if jobs <= 1 or len(refs) <= 1:
        return [run_ref(r, grid, tol) for r in refs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(run_ref, r, grid, tol) for r in refs]
        return [f.result() for f in futures]


# --- shared pieces ---------------------------------------------------------------------

def _lookup(d: dict, path: str):
    cur = d
    for part in path.split("."):
        if isinstance(cur, dict) and part in cur:
            cur = cur[part]
        else:
            raise KeyError(path)
    return cur


def _same(actual, expected) -> bool:
    if isinstance(expected, bool) or isinstance(actual, bool):
        return actual is expected or actual == expected
    if isinstance(expected, (int, float)) and isinstance(actual, (int, float)):
        return abs(actual - expected) <= 1e-9 * max(1.0, abs(expected))
    return actual == expected


def _expectations(data: dict, report: Report) -> None:
    if not data.get("expect"):
        return
    flat = report.to_dict(include_fields=False)
    for path, expected in sorted(data["expect"].items()):
        try:
            actual = _lookup(flat, path)
        except KeyError:
            report.check(f"expect {path}", False, "not present in the report", "expectation")
            continue
        report.check(f"expect {path}", _same(actual, expected), f"expected {expected!r}, got {actual!r}",
                     "expectation")


def _family_axes(f: DiscFamily) -> tuple:
    man = f.manifold
    if man.kind == "circle":
        return ("theta", man.axes[0])
    return ("t_index", np.arange(man.M, dtype=float))


def _cr_stage(data: dict, report: Report, collapse: bool | None) -> None:
    tol = tolerances(data)
    with _stage("patch"):
        base, lift, fgraph = make_patch(data)
    target = lift if lift is not None else base
    with _stage("cr"):
        crf = classify(target, tol["cr"])
    report.verdict["cr_flags"] = crf.flags()
    report.verdict["cr_constant"] = crf.constant
    report.summaries["cr_counts"] = crf.counts()
    report.summaries["cr_label_counts"] = crf.label_counts()
    report.provenance.setdefault("grid", {})["patch"] = list(target.grid_shape)
    values = np.where(crf.valid, crf.c, np.nan).reshape(target.grid_shape)
    report.fields.append(Field("cr_dimension", [(n, a) for n, a in zip(target.axis_names, target.axes)],
                               values, discrete=True, label="CR dimension c"))
    if lift is not None:
        h = data.get("dbar_step")
        if h is None and base.n == 1:
            pts = base.points_ambient[:, 0]
            h = float(np.hypot(np.ptp(pts.real), np.ptp(pts.imag))) / 40
        report.provenance["dbar_step"] = h
        with _stage("cr-verdict"):
            cv = cr_verdict_from_rank(collapse, lift, f=fgraph, base=base, h=h,
                                      tau=tol["cr"], dbar_tol=tol["dbar"])
        report.verdict["cr_verdict"] = cv["verdict"]
        report.verdict["cr_predicted"] = cv["predicted"]
        report.scalars["cr_min_c"] = cv["min_c"]
        for key in ("max_dbar", "mean_dbar", "positive_c_fraction"):
            if key in cv:
                report.summaries[f"cr_{key}"] = cv[key]
        report.check("CR dimension agrees with tangential Cauchy-Riemann residual", cv["agree"],
                     f"verdict {cv['verdict']}, min c {cv['min_c']}")


# --- family-verdict --------------------------------------------------------------------

def _family_verdict(data: dict, report: Report) -> None:
    tol = tolerances(data)
    tau = tol["rank"]
    analyses = set(data.get("analyses", ANALYSES))
    with _stage("family"):
        f = make_family(data, strict=True)
    man = f.manifold
    report.provenance["grid"] = {"n_psi": f.n_psi, "radii": list(f.all_radii), "manifold": man.kind,
                                 "manifold_shape": list(man.grid_shape)}
    report.scalars.update({"n": f.n, "k": f.k, "d": f.d})
    report.hypotheses["homology_condition"] = man.homology_condition
    report.hypotheses["ambient_room"] = f.ambient_room
    tname, taxis = _family_axes(f)
    reg = deg = orbit = rank = None

    if "regularity" in analyses or "verdict" in analyses:
        with _stage("regularity"):
            reg = regularity_check(f, tau)
        report.hypotheses["regularity"] = reg.passed
        report.hypotheses["regularity_detail"] = {"t_rank": reg.t_rank_passed, "boundary": reg.boundary_passed}
        report.scalars["t_rank_min"] = reg.t_rank_min
        report.summaries["regularity"] = {"t_rank_failures": reg.t_rank_failures,
                                          "failure_samples": reg.failure_samples,
                                          "boundary_rank_counts": reg.boundary_rank_counts,
                                          "grid_points": reg.grid_points}
    if "degeneracy" in analyses or "verdict" in analyses:
        with _stage("degeneracy"):
            deg = degeneracy_check(f, tau)
        report.hypotheses["degeneracy"] = deg.branch
        report.hypotheses["degenerate"] = deg.degenerate
        report.hypotheses["degeneracy_verified"] = deg.verified
        if deg.degree is not None:
            report.scalars["boundary_degree"] = deg.degree
    if "orbit" in analyses or "verdict" in analyses:
        spec = data.get("orbit") or {"mode": "planar"}
        with _stage("orbit"):
            orbit = orbit_nontriviality(f, spec["mode"], declared=spec.get("status"),
                                        projection=int(spec.get("projection", 0)), grid=int(spec.get("grid", 200)))
        report.hypotheses["orbit"] = orbit.status
        report.hypotheses["orbit_mode"] = orbit.mode
        if orbit.common_point is not None:
            report.summaries["orbit_common_point"] = orbit.common_point
    if "rank" in analyses or "verdict" in analyses:
        with _stage("rank"):
            rank = rank_field(f, tau)
        report.scalars["max_rank"] = rank.max_rank
        ratio = rank.ratio
        report.summaries["sigma_ratio_max"] = float(np.max(ratio))
        report.summaries["sigma_ratio_dense_fraction"] = float(np.mean(ratio > 1e-2))
        report.summaries["rank_counts"] = {int(v): int(c) for v, c in zip(*np.unique(rank.values, return_counts=True))}
        report.fields.append(Field("rank", [("psi", f.psi), (tname, taxis)], rank.values[-1],
                                   discrete=True, label="complex rank of dPhi on the boundary"))
        report.fields.append(Field("sigma_ratio", [("psi", f.psi), (tname, taxis)], ratio[-1],
                                   label=f"sigma_{f.d}/sigma_1 on the boundary"))
    if "verdict" in analyses:
        with _stage("verdict"):
            v = parametric_ap_verdict(f, orbit, regularity=reg, degeneracy=deg, rank=rank, tau=tau)
        report.verdict.update({"outcome": v.outcome, "hypotheses_hold": v.hypotheses_hold,
                               "violated": list(v.violated), "collapsed": v.collapsed})
        report.check("rank implication", v.outcome != "FAIL",
                     f"outcome {v.outcome}; max rank {v.max_rank}, d {v.d}", "theorem")
    bound = min(f.k + 1, f.n)
    if rank is not None:
        report.check("rank bounded by min(k+1, n)", rank.max_rank <= bound, f"max rank {rank.max_rank}, bound {bound}")

    if "jacobian" in analyses and 1 <= f.d <= f.n:
        jspec = data.get("jacobian", {})
        with _stage("jacobian"):
            jf = jacobian_field(f, jspec.get("eta"), jspec.get("fields"))
        nm = float(np.max(jf.negative_mass))
        report.verdict["jacobian_minor"] = list(jf.eta)
        report.scalars["jacobian_center_max"] = jf.center_max
        report.summaries["jacobian_negative_mass_max"] = nm
        report.summaries["jacobian_abs_max"] = float(np.max(np.abs(jf.values)))
        report.check("J vanishes at the disc centers", jf.center_max < tol["j_center"],
                     f"max |J(0,t)| = {jf.center_max:.3e}")
        report.check("J holomorphic on every fiber", nm < tol["j_holomorphy"], f"max negative Fourier mass {nm:.3e}")
        report.fields.append(Field("abs_jacobian", [("psi", f.psi), (tname, taxis)], np.abs(jf.boundary),
                                   label="|J| on the boundary"))
        if "fiber_ratio" in analyses:
            with _stage("fiber-ratio"):
                fr = fiber_ratio_test(jf, f, tol["coincidence"], tol=tol["fiber_ratio"])
            report.verdict["fiber_ratio_status"] = fr["status"]
            report.summaries["fiber_ratio"] = {"pairs": fr["pairs"], "max_violation": fr["max_violation"]}
            report.check("J/conj(J) constant on coincident boundary points", fr["passed"],
                         f"{fr['status']}, max violation {fr['max_violation']:.3e}")
            if "control_multiplier" in jspec and fr["status"] == "tested":
                g = compile_expr(jspec["control_multiplier"], ["zeta", *_manifold_vars(man.kind)])
                mult = lambda z, t: g(zeta=z, **man.variables(t))
                with _stage("fiber-ratio-control"):
                    ctl = fiber_ratio_test(jf, f, tol["coincidence"], tol=tol["fiber_ratio"], multiplier=mult)
                report.summaries["fiber_ratio_control_violation"] = ctl["max_violation"]
                report.check("perturbed-J control is flagged", ctl["max_violation"] > tol["control"],
                             f"control violation {ctl['max_violation']:.3e}")
        if "track_zeros" in analyses:
            with _stage("track-zeros"):
                tz = track_zeros(jf, periodic=man.kind == "circle")
            counts = sorted({c for c in tz.counts if c is not None})
            report.scalars["singular_fibers"] = len(tz.singular)
            report.scalars["zeros_per_regular_fiber"] = counts
            report.verdict["monodromy_nontrivial"] = tz.nontrivial_monodromy
            report.summaries["singular_fiber_points"] = [complex(man.points[j, 0]) for j in tz.singular][:16]
            report.check("zero counts conserved along the parameter", tz.conserved)
    elif "jacobian" in analyses:
        report.verdict["jacobian_minor"] = None
        report.summaries["jacobian"] = f"not defined: d={f.d}, n={f.n}"

    if "fiberwise" in analyses:
        with _stage("fiberwise"):
            _fiberwise(f, report, tau)
    if "cr" in analyses and "patch" in data:
        collapse = report.verdict.get("outcome") == "PASS"
        _cr_stage(data, report, collapse)


def _fiberwise(f: DiscFamily, report: Report, tau: float) -> None:
    """Per-parameter boundary curves: a curve surrounding no point forces
    the coordinate to be constant in zeta (open mapping), so the image is
    swept by the parameter alone."""
    bv = f.boundary_values()                         # (n_psi, M, n)
    centers = f(np.zeros(f.manifold.M, complex), f.manifold.points)
    trivial = np.zeros((f.manifold.M, f.n), dtype=bool)
    for j in range(f.manifold.M):
        for i in range(f.n):
            c = bv[:, j, i]
            diam = float(np.max(np.abs(c - c[0])))
            if diam <= 1e-12 * f.scale:
                trivial[j, i] = True
                continue
            try:
                w = winding_number(ClosedCurve(c), centers[j, i])
                trivial[j, i] = round(w) == 0
            except ArgumentError:
                trivial[j, i] = False
    A = _partials_grid(f, f.all_radii)
    dz = float(np.max(np.abs(A[..., 0])))
    cols = np.concatenate([A[..., :1], 1j * A[..., :1], A[..., 1:]], axis=-1)
    s = np.linalg.svd(realify(cols), compute_uv=False)
    image_dim = int(np.max(_rank(s, tau, 1e-13 * f.scale)))
    report.verdict["fiberwise_all_trivial"] = bool(np.all(trivial))
    report.verdict["constant_in_zeta"] = bool(dz < 1e-9)
    report.scalars["image_dimension"] = image_dim
    report.summaries["max_abs_dzeta"] = dz
    if np.all(trivial):
        report.check("trivial boundary curves force constancy in zeta", dz < 1e-9, f"max |dPhi/dzeta| = {dz:.3e}")
        report.check("image at most one-dimensional", image_dim <= max(1, f.k), f"real rank {image_dim}")


# --- strip problem ----------------------------------------------------------------------

def _strip_problem(data: dict, report: Report) -> None:
    tol = tolerances(data)
    k_max = int(data.get("k_max", 8))
    with _stage("family"):
        f = make_family(data, strict=False)
    if f.n != 1 or f.k != 1:
        raise RunError("family", ScenarioError("strip problems need a planar one-parameter family", "family"))
    with _stage("function"):
        g = ambient_function(data["function"], 1)
    man = f.manifold
    report.provenance["grid"] = {"n_psi": f.n_psi, "radii": list(f.all_radii), "manifold_shape": list(man.grid_shape)}
    bv = f.boundary_values()[..., 0]                 # (n_psi, M)
    with _stage("moments"):
        mom = np.zeros(man.M)
        neg = np.zeros(man.M)
        vanish = extends = True
        for j in range(man.M):
            c = ClosedCurve(bv[:, j])
            mr = complex_moments(c, g, k_max, tol=tol["moment"])
            ex = disc_extension(c, g, tol["extension"])
            mom[j], neg[j] = mr.max_abs, ex.negative_mass
            vanish &= mr.vanish
            extends &= ex.extends
    report.summaries["moment_max"] = float(np.max(mom))
    report.summaries["extension_negative_mass_max"] = float(np.max(neg))
    report.verdict["moments_vanish"] = bool(vanish)
    report.verdict["extends_on_every_disc"] = bool(extends)
    report.check("moments vanish iff boundary values extend", vanish == extends,
                 f"moments {vanish}, extension {extends}")
    report.fields.append(Field("moment_max", [("theta", man.axes[0])], mom, label="max |moment| per curve"))
    with _stage("regularity"):
        sr = strip_regularity(f)
    report.hypotheses["regularity"] = sr["passed"]
    report.summaries["regularity"] = {k: v for k, v in sr.items() if k != "passed"}
    spec = data.get("orbit") or {"mode": "planar"}
    with _stage("orbit"):
        orbit = orbit_nontriviality(f, spec["mode"], declared=spec.get("status"),
                                    projection=int(spec.get("projection", 0)), grid=int(spec.get("grid", 200)))
    report.hypotheses["orbit"] = orbit.status
    report.hypotheses["orbit_mode"] = orbit.mode
    if orbit.common_point is not None:
        report.summaries["orbit_common_point"] = orbit.common_point
    collapse = bool(vanish and sr["passed"] and orbit.nontrivial)
    # the covered domain: the closed discs, without centers where |z| type data is singular
    radii = [r for r in f.all_radii if r > 0]
    pts = np.concatenate([f(np.full(man.M, r) * np.exp(1j * p), man.points)[:, 0]
                          for r in radii for p in f.psi[:: max(1, f.n_psi // 64)]])
    shape = (len(radii), min(64, f.n_psi), man.M)
    base = planar_patch(pts, shape, axes=(np.array(radii), f.psi[:: max(1, f.n_psi // 64)], man.axes[0]),
                        axis_names=("radius", "psi", "theta"), name="covered domain")
    lift = graph_lift(base, g, name=f"graph of {data['function']}")
    h = float(data.get("dbar_step", 1e-4))
    with _stage("cr-verdict"):
        cv = cr_verdict_from_rank(collapse, lift, f=g, base=base, h=h, tau=tol["cr"], dbar_tol=tol["dbar"])
    report.verdict["verdict"] = cv["verdict"]
    report.verdict["hypotheses_hold"] = collapse
    report.scalars["cr_min_c"] = cv["min_c"]
    report.summaries["dbar_max"] = cv["max_dbar"]
    report.summaries["dbar_mean"] = cv["mean_dbar"]
    report.check("CR dimension agrees with d-bar residual", cv["agree"], f"verdict {cv['verdict']}")
    report.check("certified verdict is consistent", cv["verdict"] != "diagnostic-failure", cv["verdict"])
    resid = _stencil_field(g, pts, h).reshape(shape)
    report.fields.append(Field("dbar_residual", [("psi", base.axes[1]), ("theta", base.axes[2]),
                                                 ("radius", base.axes[0])],
                               np.transpose(resid, (1, 2, 0)), label="|df/dzbar| on the covered domain"))


def _stencil_field(g, pts, h):
    return dbar_residual(lambda z: g(np.asarray(z)[:, None]), "planar", h=h, points=pts)


# --- cr-field ---------------------------------------------------------------------------

def _cr_field(data: dict, report: Report) -> None:
    _cr_stage(data, report, None)


# --- argument principle ------------------------------------------------------------------

def _argument_principle(data: dict, report: Report) -> None:
    spec = data["argument"]
    out_counts, out_links, out_res, rand = [], [], [], {}
    for i, item in enumerate(spec.get("zero_counts", [])):
        b = complex(*item.get("b", [0.0, 0.0]))
        fn = compile_expr(item["phi"], ["zeta"])
        phi = lambda z, fn=fn: np.broadcast_to(fn(zeta=z), np.shape(z))
        with _stage(f"zero-count[{i}]"):
            N = zero_count(phi, b)
            zl = locate_zeros(lambda z, b=b, phi=phi: phi(z) - b)
        row = {"phi": item["phi"], "b": b, "count": N, "located": zl.weighted_count(),
               "zeros": [{"location": z.location, "multiplicity": z.multiplicity, "on_boundary": z.on_boundary}
                         for z in zl]}
        report.check(f"zero count {item['phi']} - ({b}): located zeros agree", N == zl.weighted_count(),
                     f"count {N}, located {zl.weighted_count()}")
        if float(N).is_integer() and not any(z.on_boundary for z in zl):
            with _stage(f"winding[{i}]"):
                W = winding_number(sample_curve(phi_on_circle(phi), 256), b)
            row["winding"] = W
            report.check(f"zero count {item['phi']} equals winding number", N == rounded(W), f"W = {W:.12g}")
        out_counts.append(row)
    for i, item in enumerate(spec.get("linking", [])):
        disc = compile_vector(item["disc"], ["zeta"])
        n = len(item["disc"])
        P = ambient_function(item["P"], n)
        with _stage(f"linking[{i}]"):
            c = ClosedCurve(disc(zeta=np.exp(1j * angles(256))))
            L = linking_number(c, P)
            N = zero_count(lambda z: P(disc(zeta=np.asarray(z).reshape(-1))).reshape(np.shape(z)), 0.0)
        out_links.append({"disc": item["disc"], "P": item["P"], "linking": L, "zero_count": N})
        report.check(f"link({item['disc']}, {item['P']} = 0) equals zero count", rounded(L) == N, f"{L:.12g} vs {N}")
    for i, src in enumerate(spec.get("residues", [])):
        fn = compile_expr(src, ["zeta"])
        J = lambda z, fn=fn: np.broadcast_to(fn(zeta=z), np.shape(z))
        with _stage(f"residue[{i}]"):
            I = log_residue_pv(J)
            N = zero_count(J, 0.0)
        out_res.append({"J": src, "value": I.value, "zero_count": N, "pv_windows": list(I.pv_windows)})
        report.check(f"log residue of {src} is twice the zero count", abs(I.value - 2 * N) < 1e-6,
                     f"I = {I.value.real:.10g}, N = {N}")
    if "random" in spec:
        with _stage("random-suite"):
            rand = _random_suite(spec["random"], report)
    report.scalars["zero_counts"] = out_counts
    report.scalars["linking"] = out_links
    report.scalars["residues"] = out_res
    if rand:
        report.scalars["random_suite"] = rand


def phi_on_circle(phi):
    return lambda psi: phi(np.exp(1j * np.asarray(psi)))


def _random_suite(spec: dict, report: Report) -> dict:
    rng = np.random.default_rng(int(spec.get("seed", 0)))
    n_poly, n_tgt = int(spec.get("polynomials", 20)), int(spec.get("targets", 5))
    max_deg = int(spec.get("max_degree", 5))
    agree = 0
    rows = []
    for _ in range(n_poly):
        deg = int(rng.integers(1, max_deg + 1))
        roots = 1.6 * np.sqrt(rng.uniform(0, 1, deg)) * np.exp(2j * np.pi * rng.uniform(0, 1, deg))
        lead = complex(rng.normal(), rng.normal())
        coef = lead * np.poly(roots)
        phi = lambda z, coef=coef: np.polyval(coef, z)
        curve = ClosedCurve(phi(np.exp(1j * angles(256))))
        for _ in range(n_tgt):
            b = complex(*rng.uniform(-1.5, 1.5, 2)) * abs(lead)
            N = zero_count(phi, b)
            W = winding_number(curve, b)
            ok = N == rounded(W)
            agree += ok
            rows.append({"degree": deg, "b": b, "count": N, "winding": round(W)})
    total = n_poly * n_tgt
    report.check("random polynomials: zero count equals rounded winding number", agree == total,
                 f"{agree}/{total} agree")
    return {"cases": total, "agree": agree, "rows": rows}


# --- moment check ------------------------------------------------------------------------

def _moment_check(data: dict, report: Report) -> None:
    tol = tolerances(data)
    k_max = int(data.get("k_max", 3))
    with _stage("family"):
        f = make_family(data, strict=False)
    man = f.manifold
    report.provenance["grid"] = {"n_psi": f.n_psi, "manifold_shape": list(man.grid_shape)}
    bv = f.boundary_values()
    base = None
    if "patch" in data:
        with _stage("patch"):
            base, _, _ = make_patch(data)
    results = {}
    for item in data["functions"]:
        with _stage(f"function {item['name']}"):
            g = ambient_function(item["expr"], f.n)
        mom = np.zeros(man.M)
        neg = np.zeros(man.M)
        vanish = extends = True
        with _stage(f"moments {item['name']}"):
            for j in range(man.M):
                c = ClosedCurve(bv[:, j, :])
                mr = complex_moments(c, g, k_max, tol=tol["moment"])
                ex = disc_extension(c, g, tol["extension"])
                mom[j], neg[j] = mr.max_abs, ex.negative_mass
                vanish &= mr.vanish
                extends &= ex.extends
        res = {"moments_vanish": bool(vanish), "extends": bool(extends)}
        report.summaries[f"{item['name']}_moment_max"] = float(np.max(mom))
        report.summaries[f"{item['name']}_negative_mass_max"] = float(np.max(neg))
        report.check(f"{item['name']}: moments vanish iff extension", vanish == extends)
        if base is not None:
            with _stage(f"tangential d-bar {item['name']}"):
                r = dbar_residual(g, "tangential-CR", patch=base, tau=tol["cr"])[base.mask]
            res["tangential_cr"] = bool(np.max(r) < tol["dbar"])
            report.summaries[f"{item['name']}_tangential_dbar_max"] = float(np.max(r))
            report.check(f"{item['name']}: moments vanish iff tangential CR", vanish == res["tangential_cr"],
                         f"max residual {np.max(r):.3e}")
        if "expect_extends" in item:
            report.check(f"{item['name']}: extension as declared", extends == item["expect_extends"], "",
                         "expectation")
        results[item["name"]] = res
    report.verdict["functions"] = results
    if base is not None:
        _cr_stage(data, report, None)
