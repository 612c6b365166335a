"""Acceptance criteria, one test each.  Every test prints a single
``criterion N: PASS|FAIL`` line; the lines are repeated in the terminal
summary by conftest."""
import itertools
import time

import numpy as np
import pytest

from paramarg.argument import log_residue_pv, rounded
from paramarg.cr import classify
from paramarg.report import to_json
from paramarg.runner import _random_suite, run, run_ref
from paramarg.report import Report
from paramarg.families import rank_field
from paramarg.scenarios import load_scenario, make_family, make_patch, refine

RESULTS: dict[int, str] = {}

FAMILIES = ["example1", "example2", "example3", "example4", "model_counter", "model_torus", "torus_identity"]
CHEAP = ["argument_principle", "example1", "example2", "model_counter", "model_torus", "strip_concentric",
         "strip_translating", "torus_identity"]

_cache: dict = {}


def report(name):
    if name not in _cache:
        _cache[name] = run_ref(f"builtin:{name}")
    return _cache[name]


def verdict(n, failures, detail):
    ok = not failures
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})"
    if failures:
        line += " -- " + "; ".join(failures)
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_criterion_1_random_suite():
    spec = load_scenario("builtin:argument_principle")["argument"]["random"]
    t0 = time.perf_counter()
    out = _random_suite(spec, Report({"id": "random"}))
    dt = time.perf_counter() - t0
    fails = []
    if out["cases"] != 100 or out["agree"] != 100:
        fails.append(f"{out['agree']}/{out['cases']} agree")
    if dt >= 5:
        fails.append(f"runtime {dt:.2f} s")
    verdict(1, fails, f"{out['agree']}/{out['cases']} zero counts equal winding numbers in {dt:.2f} s")


def test_criterion_2_linking():
    rows = report("argument_principle").scalars["linking"]
    fails = [f"{r['P']}: link {r['linking']} vs count {r['zero_count']}" for r in rows
             if rounded(r["linking"], 1e-8) != r["zero_count"]]
    if len(rows) != 3:
        fails.append(f"{len(rows)} fixtures instead of 3")
    verdict(2, fails, "links " + ", ".join(f"{r['P']}={rounded(r['linking'], 1e-8):g}" for r in rows))


def test_criterion_3_residues(oracle):
    cases = [(lambda z: 2j * z ** 2, oracle["residue_2izeta2"], 1e-5),
             (lambda z: z, oracle["residue_zeta"], 1e-6),
             (lambda z: 2 + z, 0.0, 1e-8)]
    t0 = time.perf_counter()
    vals = [log_residue_pv(J).value for J, _, _ in cases]
    dt = time.perf_counter() - t0
    fails = [f"I = {v} vs {want}" for v, (_, want, tol) in zip(vals, cases) if abs(v - want) > tol]
    if dt >= 2:
        fails.append(f"runtime {dt:.2f} s")
    verdict(3, fails, f"I = {', '.join(f'{v.real:.10g}' for v in vals)} in {dt:.2f} s")


def dense_on_lattice(mask, manifold):
    """Lattice version of density: every point outside ``mask`` has a
    neighbour (diagonals included) inside it.  ``mask`` has shape (radii, psi, manifold lattice)."""
    m = mask.reshape(mask.shape[:2] + tuple(manifold.grid_shape))
    # radius and the sphere's eta are intervals; angles wrap around
    open_axes = {0} | ({2} if manifold.kind == "sphere" else set())
    near = np.zeros_like(m)
    for steps in itertools.product((-1, 0, 1), repeat=m.ndim):
        shifted = m
        for ax, step in enumerate(steps):
            if step:
                shifted = np.roll(shifted, step, axis=ax)
                if ax in open_axes:
                    edge = [slice(None)] * m.ndim
                    edge[ax] = 0 if step == 1 else -1
                    shifted[tuple(edge)] = False
        near |= shifted
    return bool(np.all(near))


def test_criterion_4_rank_implication():
    fails = []
    r2 = report("example2")
    if not r2.verdict["hypotheses_hold"] or r2.scalars["max_rank"] != 1 or r2.summaries["sigma_ratio_max"] >= 1e-10:
        fails.append(f"example2: hypotheses {r2.verdict['hypotheses_hold']}, rank {r2.scalars['max_rank']}, "
                     f"ratio {r2.summaries['sigma_ratio_max']:.2e}")
    for name in ("example1", "example3"):
        r = report(name)
        fam = make_family(load_scenario(f"builtin:{name}"))
        big = rank_field(fam).ratio > 1e-2
        dense = dense_on_lattice(big, fam.manifold)
        if (r.hypotheses["orbit"] != "trivial" or "orbit" not in r.verdict["violated"] or r.verdict["collapsed"]
                or not dense or r.verdict["outcome"] != "counterexample-confirmed"):
            fails.append(f"{name}: orbit {r.hypotheses['orbit']}, collapsed {r.verdict['collapsed']}, "
                         f"ratio > 1e-2 dense on the lattice: {dense}")
    verdict(4, fails, f"example2 ratio {r2.summaries['sigma_ratio_max']:.1e}; example1/3 dense fractions "
                      f"{report('example1').summaries['sigma_ratio_dense_fraction']:.3f}/"
                      f"{report('example3').summaries['sigma_ratio_dense_fraction']:.3f}, small ratios confined to "
                      f"nowhere-dense lattice sets")


def test_criterion_5_model_torus():
    r = report("model_torus")
    m = r.summaries["max_abs_dzeta"]
    fails = [] if m < 1e-9 and r.verdict["constant_in_zeta"] else [f"max |d Phi/d zeta| = {m}"]
    verdict(5, fails, f"max |dPhi/dzeta| = {m:.1e}, image dimension {r.scalars['image_dimension']}")


def test_criterion_6_cr_fields():
    fields, t0 = {}, time.perf_counter()
    for name in ("example1", "example2", "example3", "example4"):
        base, lift, _ = make_patch(load_scenario(f"builtin:{name}"))
        fields[name] = (base, classify(lift))
    dt = time.perf_counter() - t0
    fails = []
    for name, c_want, flag in (("example1", 0, "totally_real"), ("example2", 1, "complex"),
                               ("example4", 1, "maximally_complex")):
        f = fields[name][1]
        c = f.c[f.valid]
        if not np.all(c == c_want):
            fails.append(f"{name}: c={c_want} at {np.mean(c == c_want):.1%}")
        if not (f.flags()[flag] and f.constant):
            fails.append(f"{name}: flags {f.flags()}")
    base, f3 = fields["example3"]
    eta = base.axes[0]
    eta_pt = np.broadcast_to(eta[:, None, None], base.grid_shape).reshape(-1)
    near = np.abs(eta_pt - np.pi / 2) <= (eta[1] - eta[0]) + 1e-12      # within one cell of z1 = 0
    c1 = f3.c == 1
    if np.any(c1 & ~near):
        stray = np.unique(np.round(np.abs(base.points_ambient[c1 & ~near]), 12), axis=0)
        fails.append(f"example3: c=1 at {int(np.sum(c1 & ~near))} points away from z1=0, "
                     f"(|z1|, |z2|) = {stray.tolist()}")
    if not np.all(f3.c[~c1] == 0) or f3.constant:
        fails.append("example3: expected c=0 elsewhere and a non-constant field")
    if dt >= 30:
        fails.append(f"runtime {dt:.1f} s")
    verdict(6, fails, f"four c-fields classified in {dt:.2f} s")


def test_criterion_7_strips():
    fails = []
    tr, co = report("strip_translating"), report("strip_concentric")
    if tr.summaries["moment_max"] >= 1e-8:
        fails.append(f"translating moments {tr.summaries['moment_max']:.1e}")
    if tr.hypotheses["orbit"] != "nontrivial" or tr.scenario["orbit"]["grid"] != 200:
        fails.append(f"translating orbit {tr.hypotheses['orbit']}")
    if tr.verdict["verdict"] != "holomorphy certified" or tr.summaries["dbar_max"] >= 1e-6:
        fails.append(f"translating verdict {tr.verdict['verdict']}, dbar {tr.summaries['dbar_max']:.1e}")
    if co.summaries["moment_max"] >= 1e-10:
        fails.append(f"concentric moments {co.summaries['moment_max']:.1e}")
    b = co.summaries.get("orbit_common_point")
    cell = 2 * 2.0 * np.sqrt(2) / 199   # lattice diagonal over the bounding box [-2, 2]^2
    if co.hypotheses["orbit"] != "trivial" or b is None or abs(b) > cell:
        fails.append(f"concentric common point {b}")
    if co.verdict["verdict"] != "withheld" or abs(co.summaries["dbar_max"] - 0.5) > 1e-3 \
            or abs(co.summaries["dbar_mean"] - 0.5) > 1e-3:
        fails.append(f"concentric verdict {co.verdict['verdict']}, dbar {co.summaries['dbar_max']}")
    verdict(7, fails, f"moments {tr.summaries['moment_max']:.1e}/{co.summaries['moment_max']:.1e}, "
                      f"dbar {tr.summaries['dbar_max']:.1e}/{co.summaries['dbar_max']:.6f}, common point {b}")


def test_criterion_8_jacobian():
    fails = []
    worst_c = worst_m = 0.0
    for name in FAMILIES:
        r = report(name)
        if r.scalars["d"] > r.scalars["n"]:
            continue
        c, m = r.scalars.get("jacobian_center_max"), r.summaries.get("jacobian_negative_mass_max")
        if c is None or m is None:
            fails.append(f"{name}: no Jacobian reported")
            continue
        worst_c, worst_m = max(worst_c, c), max(worst_m, m)
        if c >= 1e-10 or m >= 1e-9:
            fails.append(f"{name}: |J(0,t)| {c:.1e}, negative mass {m:.1e}")
    r1 = report("example1")
    fr, ctrl = r1.summaries["fiber_ratio"]["max_violation"], r1.summaries["fiber_ratio_control_violation"]
    if fr >= 1e-6 or ctrl <= 1e-2:
        fails.append(f"example1 fiber ratio {fr:.1e}, control {ctrl:.1e}")
    verdict(8, fails, f"max |J(0,t)| {worst_c:.1e}, negative mass {worst_m:.1e}, "
                      f"fiber ratio {fr:.1e}, control {ctrl:.2f}")


def _scalar_diffs(a, b, path=""):
    if isinstance(a, dict):
        if set(a) != set(b):
            return [f"{path}: keys differ"]
        return [d for k in a for d in _scalar_diffs(a[k], b[k], f"{path}.{k}")]
    if isinstance(a, list):
        if len(a) != len(b):
            return [f"{path}: lengths differ"]
        return [d for i, (x, y) in enumerate(zip(a, b)) for d in _scalar_diffs(x, y, f"{path}[{i}]")]
    if isinstance(a, (int, float)) and not isinstance(a, bool) and isinstance(b, (int, float)):
        # relative change, measured against max(|a|, |b|, 1) so zeros do not divide
        return [] if abs(a - b) <= 1e-8 * max(abs(a), abs(b), 1.0) else [f"{path}: {a} -> {b}"]
    return [] if a == b else [f"{path}: {a!r} -> {b!r}"]


def test_criterion_9_determinism_and_convergence():
    fails = []
    for name in ("argument_principle", "example2", "strip_translating", "model_torus"):
        if to_json(run_ref(f"builtin:{name}")) != to_json(report(name)):
            fails.append(f"{name}: repeated run differs")
    for name in CHEAP:
        coarse = report(name).to_dict(include_fields=False)
        fine = run(refine(load_scenario(f"builtin:{name}"))).to_dict(include_fields=False)
        for key in ("scalars", "hypotheses", "verdict"):
            fails += [f"{name}: {d}" for d in _scalar_diffs(coarse[key], fine[key], key)]
    verdict(9, fails, f"reports byte-identical; {len(CHEAP)} scenarios stable under grid doubling")
