"""Scenario files: loading, schema validation, built-ins and compilation of
their expressions into families, patches and functions."""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from .cr import ManifoldPatch, annulus_patch, box_patch, graph_lift, sphere_patch
from .expressions import ExpressionError, compile_expr, compile_vector
from .families import DiscFamily, FamilyError, ParamManifold, build_family

__all__ = [
    "ScenarioError",
    "BUILTIN_PREFIX",
    "schema",
    "list_builtins",
    "load_scenario",
    "validate",
    "with_overrides",
    "refine",
    "make_manifold",
    "make_family",
    "make_patch",
    "ambient_function",
    "DEFAULT_TOLERANCES",
]

BUILTIN_PREFIX = "builtin:"

DEFAULT_TOLERANCES = {
    "rank": 1e-7,
    "cr": 1e-7,
    "integer": 1e-8,
    "moment": 1e-8,
    "extension": 1e-8,
    "coincidence": 1e-9,
    "fiber_ratio": 1e-6,
    "control": 1e-2,
    "j_center": 1e-10,
    "j_holomorphy": 1e-9,
    "dbar": 1e-6,
    "constancy": 1e-9,
}


class ScenarioError(ValueError):
    """Invalid scenario: parse error, schema violation or bad expression.
    ``field`` names the offending location when known."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


def schema() -> dict:
    text = resources.files("paramarg").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def list_builtins() -> list[str]:
    root = resources.files("paramarg").joinpath("builtins")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _path_str(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def validate(data: Any) -> dict:
    """Schema validation plus the semantic checks the schema cannot express."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ScenarioError(e.message, _path_str(e.absolute_path))
    need = {
        "family-verdict": ["family"],
        "strip-problem": ["family", "function"],
        "cr-field": ["patch"],
        "argument-principle": ["argument"],
        "moment-check": ["family", "functions"],
    }[data["kind"]]
    for key in need:
        if key not in data:
            raise ScenarioError(f"required for kind {data['kind']!r}", key)
    for name in data.get("tolerances", {}):
        if name not in DEFAULT_TOLERANCES:
            raise ScenarioError(f"unknown tolerance; known: {sorted(DEFAULT_TOLERANCES)}", f"tolerances.{name}")
    fam = data.get("family")
    if fam:
        k = {"point": 0, "circle": 1, "torus": 2, "sphere": 3}[fam["manifold"]["kind"]]
        if fam["d"] not in (k, k + 1):
            raise ScenarioError(f"d must be k={k} or k+1={k + 1}", "family.d")
        n_psi = fam.get("n_psi", 256)
        if n_psi < 16 or n_psi & (n_psi - 1):
            raise ScenarioError(f"must be a power of two >= 16, got {n_psi}", "family.n_psi")
        _check_exprs(fam["phi"], ["zeta", *_manifold_vars(fam["manifold"]["kind"])], "family.phi")
    if data.get("orbit", {}).get("mode") == "declared" and "status" not in data["orbit"]:
        raise ScenarioError("declared mode needs a status", "orbit.status")
    if "patch" in data and "graph" in data["patch"]:
        n = 2 if data["patch"]["base"]["kind"] == "sphere" else 1
        _check_exprs(data["patch"]["graph"], _ambient_vars(n), "patch.graph")
    if "function" in data:
        _check_exprs(data["function"], ["z"], "function")
    for i, fn in enumerate(data.get("functions", [])):
        _check_exprs(fn["expr"], ["z", "z1", "z2", "z3"], f"functions[{i}].expr")
    return data


def _manifold_vars(kind: str) -> list[str]:
    return {"point": [], "circle": ["t"], "torus": ["t1", "t2"], "sphere": ["t1", "t2"]}[kind]


def _ambient_vars(n: int) -> list[str]:
    return ["z"] if n == 1 else [f"z{i + 1}" for i in range(n)]


def _check_exprs(src, names, where):
    srcs = [src] if isinstance(src, str) else src
    for i, s in enumerate(srcs):
        try:
            compile_expr(s, names)
        except ExpressionError as exc:
            raise ScenarioError(str(exc), where if isinstance(src, str) else f"{where}[{i}]") from exc


def load_scenario(ref: str | Path) -> dict:
    """Load ``builtin:<id>`` or a JSON file and validate it."""
    ref = str(ref)
    if ref.startswith(BUILTIN_PREFIX):
        name = ref[len(BUILTIN_PREFIX):]
        if name not in list_builtins():
            raise ScenarioError(f"unknown built-in {name!r}; available: {', '.join(list_builtins())}")
        text = resources.files("paramarg").joinpath(f"builtins/{name}.json").read_text()
        source = ref
    else:
        path = Path(ref)
        if not path.is_file():
            raise ScenarioError(f"no such scenario file: {ref}")
        text = path.read_text()
        source = str(path)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                            source) from exc
    return validate(data)


# --- overrides --------------------------------------------------------------------------

def with_overrides(data: dict, *, grid: tuple[int, int] | None = None,
                   tolerances: dict[str, float] | None = None) -> dict:
    """Copy of the scenario with ``--grid N,M`` (boundary angles, samples
    per circle factor) and ``--tol`` overrides applied."""
    out = copy.deepcopy(data)
    if grid is not None:
        n_psi, m = grid
        fam = out.get("family")
        if fam:
            fam["n_psi"] = int(n_psi)
            man = fam["manifold"]
            if man["kind"] == "sphere":
                man["n_xi"] = int(m)
            elif man["kind"] != "point":
                man["samples"] = int(m)
    if tolerances:
        for name, value in tolerances.items():
            if name not in DEFAULT_TOLERANCES:
                raise ScenarioError(f"unknown tolerance; known: {sorted(DEFAULT_TOLERANCES)}", f"tolerances.{name}")
            out.setdefault("tolerances", {})[name] = float(value)
    return validate(out)


def refine(data: dict, factor: int = 2) -> dict:
    """Scenario with every grid size multiplied by ``factor``; lattices that
    include both endpoints go from n to factor*(n-1)+1 points so the old
    lattice stays a sublattice."""
    out = copy.deepcopy(data)
    fam = out.get("family")
    if fam:
        man = fam["manifold"]
        fam["n_psi"] = factor * _n_psi(out)
        if man["kind"] == "sphere":
            man["n_xi"] = factor * man.get("n_xi", 16)
            man["n_eta"] = factor * (man.get("n_eta", 8) - 1) + 1
        elif man["kind"] in ("circle", "torus"):
            man["samples"] = factor * man.get("samples", 128 if man["kind"] == "circle" else 32)
    base = out.get("patch", {}).get("base")
    if base:
        if base["kind"] == "annulus":
            base["n_r"] = factor * (base.get("n_r", 33) - 1) + 1
            base["n_phi"] = factor * base.get("n_phi", 64)
        elif base["kind"] == "box":
            base["nx"] = factor * (base.get("nx", 41) - 1) + 1
            base["ny"] = factor * (base.get("ny", 41) - 1) + 1
        else:
            base["n_xi"] = factor * base.get("n_xi", 16)
            base["n_eta"] = factor * (base.get("n_eta", 8) - 1) + 1
    if "orbit" in out and out["orbit"].get("mode") == "planar":
        out["orbit"]["grid"] = factor * out["orbit"].get("grid", 200)
    return validate(out)


# --- compilation ---------------------------------------------------------------------------

def _n_psi(data: dict) -> int:
    fam = data["family"]
    default = 64 if fam["manifold"]["kind"] == "sphere" else 256
    return int(fam.get("n_psi", default))


def make_manifold(spec: dict) -> ParamManifold:
    kind = spec["kind"]
    if kind == "point":
        return ParamManifold.point()
    if kind == "circle":
        return ParamManifold.circle(int(spec.get("samples", 128)))
    if kind == "torus":
        m = int(spec.get("samples", 32))
        return ParamManifold.torus(m, m)
    return ParamManifold.sphere(int(spec.get("n_eta", 8)), int(spec.get("n_xi", 16)))


def make_family(data: dict, *, strict: bool = True) -> DiscFamily:
    fam = data["family"]
    man = make_manifold(fam["manifold"])
    names = ["zeta", *_manifold_vars(man.kind)]
    vec = compile_vector(fam["phi"], names)

    def phi(zeta, t):
        return vec(zeta=zeta, **man.variables(t))

    default_radii = (0.0, 0.5) if man.kind == "sphere" else (0.0, 0.25, 0.5, 0.75)
    try:
        return build_family(phi, man, int(fam["d"]), n_psi=_n_psi(data),
                            radii=tuple(fam.get("radii", default_radii)), name=data["id"], strict=strict)
    except FamilyError as exc:
        raise ScenarioError(str(exc), "family") from exc


def ambient_function(src: str, n: int) -> Callable[[np.ndarray], np.ndarray]:
    """Compile an expression in ``z`` (n = 1) or ``z1..zn`` into a callable on
    ambient points of shape ``(P, n)``."""
    names = _ambient_vars(n)
    fn = compile_expr(src, names)

    def f(x):
        x = np.asarray(x, dtype=complex).reshape(-1, n)
        out = fn(**{name: x[:, i] for i, name in enumerate(names)})
        return np.broadcast_to(out, (x.shape[0],)).copy()

    f.source = src
    return f


def make_patch(data: dict) -> tuple[ManifoldPatch, ManifoldPatch | None, Callable | None]:
    """The base patch, its graph lift (if a graph function is given) and the
    compiled graph function."""
    spec = data["patch"]
    b = spec["base"]
    if b["kind"] == "annulus":
        base = annulus_patch(float(b.get("r0", 1.0)), float(b.get("r1", 3.0)),
                             int(b.get("n_r", 33)), int(b.get("n_phi", 64)))
    elif b["kind"] == "box":
        x0, x1 = b.get("x", [-1.0, 1.0])
        y0, y1 = b.get("y", [-1.0, 1.0])
        base = box_patch(x0, x1, y0, y1, int(b.get("nx", 41)), int(b.get("ny", 41)))
    else:
        base = sphere_patch(int(b.get("n_eta", 8)), int(b.get("n_xi", 16)), float(b.get("radius", 1.0)))
    if "graph" not in spec:
        return base, None, None
    f = ambient_function(spec["graph"], base.n)
    return base, graph_lift(base, f, name=f"graph of {spec['graph']}"), f


def tolerances(data: dict) -> dict:
    return {**DEFAULT_TOLERANCES, **data.get("tolerances", {})}
