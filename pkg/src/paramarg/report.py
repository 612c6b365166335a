"""Report model and deterministic emitters (JSON, CSV, SVG)."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

import numpy as np

__all__ = ["Field", "Report", "canonical", "to_json", "emit", "FORMATS", "DISPLAY_CELLS", "EmitError"]

FORMATS = ("json", "csv", "svg")
DISPLAY_CELLS = 64     # max cells per axis in an SVG map
SIG_DIGITS = 15


class EmitError(OSError):
    pass


@dataclass
class Field:
    """A sampled scalar field; ``axes`` are ``(name, coordinates)`` pairs in
    the order of ``values``' dimensions."""

    name: str
    axes: list
    values: np.ndarray
    discrete: bool = False
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values)
        shape = tuple(len(a[1]) for a in self.axes)
        if self.values.shape != shape:
            raise ValueError(f"field {self.name}: values {self.values.shape} vs axes {shape}")


@dataclass
class Report:
    scenario: dict
    provenance: dict = field(default_factory=dict)
    hypotheses: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)
    scalars: dict = field(default_factory=dict)
    summaries: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)
    fields: list = field(default_factory=list)

    @property
    def id(self) -> str:
        return self.scenario["id"]

    def check(self, name: str, passed: bool, detail: str = "", kind: str = "cross-check") -> bool:
        """Record a pass/fail check. ``kind`` is cross-check, theorem or expectation."""
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail, "kind": kind})
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def field(self, name: str) -> Field:
        for f in self.fields:
            if f.name == name:
                return f
        raise KeyError(name)

    def to_dict(self, *, include_fields: bool = True) -> dict:
        out = {
            "scenario": self.scenario,
            "provenance": self.provenance,
            "hypotheses": self.hypotheses,
            "verdict": self.verdict,
            "scalars": self.scalars,
            "summaries": self.summaries,
            "checks": self.checks,
            "status": "pass" if self.passed else "fail",
        }
        if include_fields:
            out["fields"] = {f.name: {
                "label": f.label,
                "discrete": f.discrete,
                "axes": {name: coords for name, coords in f.axes},
                "axis_order": [name for name, _ in f.axes],
                "values": f.values,
            } for f in self.fields}
        return canonical(out)


def _num(x: float):
    if not math.isfinite(x):
        return None
    return float(f"{x:.{SIG_DIGITS}g}")


def canonical(obj: Any) -> Any:
    """JSON-ready copy: numpy types unwrapped, floats rounded to 15
    significant digits, complex numbers as ``{"re", "im"}``, tuples as lists."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return canonical(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"im": _num(obj.imag), "re": _num(obj.real)}
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(report: Report) -> str:
    return json.dumps(report.to_dict(), sort_keys=True, indent=1, allow_nan=False) + "\n"


def to_csv(f: Field) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["point_index", *[name for name, _ in f.axes], "value"])
    grids = np.meshgrid(*[np.asarray(c, dtype=float) for _, c in f.axes], indexing="ij")
    flat = [g.ravel() for g in grids]
    vals = f.values.ravel()
    for i in range(vals.size):
        v = float(vals[i])
        if not math.isfinite(v):
            cell = ""
        else:
            cell = int(v) if f.discrete else repr(_num(v))
        w.writerow([i, *[repr(_num(float(g[i]))) for g in flat], cell])
    return buf.getvalue()


def _display(f: Field) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """2-D view: extra axes reduced by max, each axis block-maxed to at most
    DISPLAY_CELLS cells."""
    v = np.asarray(f.values, dtype=float)
    axes = [np.asarray(c, dtype=float) for _, c in f.axes]
    if v.ndim == 1:
        v, axes = v[:, None], [axes[0], np.zeros(1)]
    while v.ndim > 2:
        v = np.nanmax(v, axis=-1)
        axes = axes[:-1]
    for ax in range(2):
        n = v.shape[ax]
        if n > DISPLAY_CELLS:
            b = -(-n // DISPLAY_CELLS)
            m = n // b
            v = np.moveaxis(v, ax, 0)[: m * b]
            v = np.nanmax(v.reshape(m, b, *v.shape[1:]), axis=1)
            v = np.moveaxis(v, 0, ax)
            axes[ax] = axes[ax][: m * b: b]
    return axes[0], axes[1], v


def to_svg(f: Field, title: str) -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    from matplotlib.colors import BoundaryNorm, ListedColormap

    x, y, v = _display(f)
    with matplotlib.rc_context({"svg.hashsalt": "paramarg", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(6.4, 4.8))
        masked = np.ma.masked_invalid(v.T)
        if f.discrete:
            lo, hi = int(np.nanmin(v)), int(np.nanmax(v))
            levels = np.arange(lo, hi + 2) - 0.5
            base = plt.get_cmap("viridis", max(hi - lo + 1, 2))
            cmap = ListedColormap([base(i) for i in range(hi - lo + 1)])
            mesh = ax.pcolormesh(x, y, masked, shading="nearest", cmap=cmap, norm=BoundaryNorm(levels, cmap.N))
            cb = fig.colorbar(mesh, ax=ax, ticks=np.arange(lo, hi + 1))
        else:
            mesh = ax.pcolormesh(x, y, masked, shading="nearest", cmap="viridis")
            cb = fig.colorbar(mesh, ax=ax)
        cb.set_label(f.label or f.name)
        ax.set_xlabel(f.axes[0][0])
        ax.set_ylabel(f.axes[1][0] if len(f.axes) > 1 else "")
        ax.set_title(title)
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buf.getvalue()


def emit(report: Report, out_dir: str | Path, formats: Iterable[str] = FORMATS) -> list[Path]:
    """Write the report; returns the written paths in a fixed order."""
    formats = list(formats)
    bad = [x for x in formats if x not in FORMATS]
    if bad:
        raise ValueError(f"unknown formats {bad}; choose from {list(FORMATS)}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = []
        if "json" in formats:
            p = out / f"{report.id}.json"
            p.write_text(to_json(report))
            written.append(p)
        for f in report.fields:
            if "csv" in formats:
                p = out / f"{report.id}.{f.name}.csv"
                p.write_text(to_csv(f))
                written.append(p)
            if "svg" in formats:
                p = out / f"{report.id}.{f.name}.svg"
                p.write_text(to_svg(f, f"{report.id}: {f.label or f.name}"))
                written.append(p)
    except OSError as exc:
        raise EmitError(f"cannot write report to {out}: {exc}") from exc
    return written
