"""Convergence-experiment runner: test functions, mesh sequences, CSV
reports, and gnuplot script emission.

L1 errors are reported as unnormalized integrals of |f - field| over the
mesh domain (no division by the domain area); built-in test functions live
on the unit square.
"""
from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, UnknownFunction
from .elements import make_element, parse_functional
from .geometry import Mesh, parse_mesh, structured_mesh
from .quadrature import RuleSet, triangle_rule
from .approximation import global_interpolate, l1_error

CSV_HEADER = "function,element,n_triangles,h_max,l1_error,order"

SUPPORTED_QUAD_DEGREES = (2, 5, 8, 10)


@dataclass(frozen=True)
class TestFunction:
    """Named scalar field on the closed unit square."""

    name: str
    evaluator: object  # callable f(x, y), vectorized over arrays

    def __call__(self, x, y):
        return self.evaluator(x, y)


def _f1(x, y):
    return np.exp(x + y)


def _f2(x, y):
    return 1.0 / (x * x + y * y + 8.0)


def _f3(x, y):
    return np.cos(x + y + 1.0)


def _f4(x, y):
    # radicand stays >= 23.5 on [0,1]^2
    return np.sqrt(64.0 - 81.0 * ((x - 0.5) ** 2 + (y - 0.5) ** 2)) / 9.0 - 0.5


TEST_FUNCTIONS = {
    "f1": TestFunction("f1", _f1),
    "f2": TestFunction("f2", _f2),
    "f3": TestFunction("f3", _f3),
    "f4": TestFunction("f4", _f4),
}


def test_function(name: str) -> TestFunction:
    """Look up a registered test function by name."""
    try:
        return TEST_FUNCTIONS[name]
    except KeyError:
        raise UnknownFunction(f"unknown test function {name!r}; known: {sorted(TEST_FUNCTIONS)}") from None


@dataclass(frozen=True)
class RunConfig:
    """Everything a convergence run needs; see validate() for constraints."""

    functions: tuple[str, ...] = ("f1", "f2", "f3", "f4")
    elements: tuple[str, ...] = ("cr", "gn:2", "pn:2")
    mesh_kind: str = "structured"
    mesh_sizes: tuple[int, ...] = (4, 8, 16, 32)
    mesh_files: tuple[str, ...] = ()
    quad_degree: int = 8
    quad_order: int = 20
    subdivide: bool = False
    custom_functionals: tuple = ()
    out: str | None = None
    plot: str | None = None

    def validate(self):
        if not self.functions:
            raise ConfigError("no test functions configured")
        if not self.elements:
            raise ConfigError("no elements configured")
        if self.mesh_kind == "structured":
            if not self.mesh_sizes:
                raise ConfigError("empty mesh list")
            if any(n < 1 for n in self.mesh_sizes):
                raise ConfigError(f"structured sizes must be >= 1, got {self.mesh_sizes}")
        elif self.mesh_kind == "files":
            if not self.mesh_files:
                raise ConfigError("empty mesh list")
        else:
            raise ConfigError(f"mesh kind must be 'structured' or 'files', got {self.mesh_kind!r}")
        if self.quad_degree not in SUPPORTED_QUAD_DEGREES:
            raise ConfigError(f"quad degree must be one of {SUPPORTED_QUAD_DEGREES}, got {self.quad_degree}")
        if not 1 <= self.quad_order <= 64:
            raise ConfigError(f"quad order must be in 1..64, got {self.quad_order}")
        for spec in self.elements:
            _check_element_spec(spec, self)

    def canonical(self) -> str:
        pairs = [
            ("functions", ",".join(self.functions)),
            ("elements", ",".join(self.elements)),
            ("mesh_kind", self.mesh_kind),
            ("mesh_sizes", ",".join(map(str, self.mesh_sizes))),
            ("mesh_files", ",".join(self.mesh_files)),
            ("quad_degree", str(self.quad_degree)),
            ("quad_order", str(self.quad_order)),
            ("subdivide", str(self.subdivide)),
            ("custom", ";".join(f"{f.kind}:{f.j}:{f.parameter}" for f in self.custom_functionals)),
        ]
        return "\n".join(f"{k}={v}" for k, v in pairs)


def _check_element_spec(spec: str, config: RunConfig):
    spec = spec.strip()
    if spec in ("cr", "af3"):
        return
    if spec == "custom":
        if len(config.custom_functionals) != 3:
            raise ConfigError("element 'custom' requires exactly 3 functionals in the config")
        return
    head, sep, tail = spec.partition(":")
    if head in ("gn", "pn") and sep:
        try:
            float(tail)
            return
        except ValueError:
            pass
    raise ConfigError(f"bad element spec {spec!r}; expected cr, af3, gn:<gamma>, pn:<mu> or custom")


@dataclass(frozen=True)
class ReportRow:
    function: str
    element: str
    n_triangles: int
    h_max: float
    l1_error: float | None
    order: float | None
    status: str = "ok"


@dataclass(frozen=True)
class ConvergenceReport:
    """Rows sorted by (function, element, n_triangles), plus run metadata.

    The timestamp lives only here; the CSV stays byte-identical across
    reruns of the same configuration.
    """

    rows: tuple[ReportRow, ...]
    metadata: dict = field(default_factory=dict)


def _load_meshes(config: RunConfig) -> list[Mesh]:
    if config.mesh_kind == "structured":
        meshes = [structured_mesh(n) for n in sorted(set(config.mesh_sizes))]
    else:
        meshes = []
        for prefix in config.mesh_files:
            stem = prefix[:-5] if prefix.endswith(".node") else prefix
            node = Path(stem + ".node").read_text()
            ele = Path(stem + ".ele").read_text()
            meshes.append(parse_mesh(node, ele))
    return sorted(meshes, key=lambda m: m.n_triangles)


def run_convergence(config: RunConfig) -> ConvergenceReport:
    """Run the full (function x element x mesh) grid and estimate orders.

    Failures of a single (function, element) combination are recorded in
    the affected rows' status and the run continues. Identical configs
    yield identical numeric cells.
    """
    config.validate()
    functions = [test_function(n) for n in sorted(dict.fromkeys(config.functions))]
    element_specs = sorted(dict.fromkeys(config.elements))
    meshes = _load_meshes(config)
    rule = triangle_rule(config.quad_degree)
    rules = RuleSet(order=config.quad_order)

    rows: list[ReportRow] = []
    for fn in functions:
        for spec in element_specs:
            try:
                element = make_element(spec, rules, custom_functionals=config.custom_functionals or None)
            except Exception as e:
                rows.extend(
                    ReportRow(fn.name, spec, m.n_triangles, m.h_max, None, None, type(e).__name__)
                    for m in meshes
                )
                continue
            prev: tuple[float, float] | None = None
            for mesh in meshes:
                try:
                    field_ = global_interpolate(mesh, fn.evaluator, element, rules)
                    rep = l1_error(field_, fn.evaluator, rule, config.subdivide)
                except Exception as e:
                    rows.append(
                        ReportRow(fn.name, spec, mesh.n_triangles, mesh.h_max, None, None, type(e).__name__)
                    )
                    prev = None
                    continue
                order = None
                if prev is not None and rep.l1 > 0.0 and prev[1] > 0.0:
                    order = math.log(prev[1] / rep.l1) / math.log(prev[0] / rep.h_max)
                rows.append(ReportRow(fn.name, spec, mesh.n_triangles, mesh.h_max, rep.l1, order))
                prev = (rep.h_max, rep.l1) if rep.l1 > 0.0 else None

    rows.sort(key=lambda r: (r.function, r.element, r.n_triangles))
    metadata = {
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "quad_degree": config.quad_degree,
        "quad_order": config.quad_order,
        "subdivide": config.subdivide,
        "domain": "[0,1]^2" if config.mesh_kind == "structured" else "external mesh files",
        "l1_convention": "unnormalized integral of |f - field| over the mesh",
        "config_hash": hashlib.sha256(config.canonical().encode()).hexdigest()[:16],
    }
    return ConvergenceReport(tuple(rows), metadata)


def _cell(v) -> str:
    return "" if v is None else repr(v)


def csv_text(report: ConvergenceReport) -> str:
    """Render the report as CSV ('.' decimals, blank order on the coarsest
    level, blank l1_error on failed rows)."""
    lines = [CSV_HEADER]
    for r in report.rows:
        lines.append(
            f"{r.function},{r.element},{r.n_triangles},{_cell(r.h_max)},{_cell(r.l1_error)},{_cell(r.order)}"
        )
    return "\n".join(lines) + "\n"


def emit_csv(report: ConvergenceReport, path) -> Path:
    """Write the CSV report; rerunning an identical config reproduces the
    file byte for byte."""
    p = Path(path)
    p.write_text(csv_text(report))
    return p


def read_csv(text: str) -> tuple[ReportRow, ...]:
    """Parse csv_text output back into numeric rows (status not encoded)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header: {lines[:1]}")
    rows = []
    for ln in lines[1:]:
        fn, el, ntri, hmax, l1, order = ln.split(",")
        rows.append(
            ReportRow(
                fn,
                el,
                int(ntri),
                float(hmax),
                float(l1) if l1 else None,
                float(order) if order else None,
                "ok" if l1 else "failed",
            )
        )
    return tuple(rows)


def _block_name(function: str, element: str) -> str:
    safe = "".join(ch if ch.isalnum() else "_" for ch in element)
    return f"d_{function}_{safe}"


def emit_plot_script(report: ConvergenceReport, path) -> Path:
    """Write a gnuplot script: one loglog panel per test function, one
    curve per element, plus order-2 and order-3 guide lines.

    Data is embedded in the script as datablocks, so the script is
    self-contained. On structured refinements the error of an order-p
    method scales like (triangle count)^(-p/2).
    """
    ok_rows = [r for r in report.rows if r.l1_error is not None and r.l1_error > 0.0]
    if len({r.n_triangles for r in ok_rows}) < 2:
        raise ConfigError("plot needs at least 2 mesh levels with nonzero errors")
    functions = sorted({r.function for r in ok_rows})
    p = Path(path)

    lines = [
        "# Loglog L1 interpolation error vs triangle count.",
        "# Errors are unnormalized integrals of |f - field| over the mesh domain.",
        "set terminal pngcairo size 1200,900",
        f"set output '{p.with_suffix('.png').name}'",
        "set logscale xy",
        "set key bottom left",
        "set xlabel 'triangles'",
        "set ylabel 'L1 error'",
    ]
    for fn in functions:
        for el in sorted({r.element for r in ok_rows if r.function == fn}):
            lines.append(f"${_block_name(fn, el)} << EOD")
            for r in ok_rows:
                if r.function == fn and r.element == el:
                    lines.append(f"{r.n_triangles} {r.l1_error!r}")
            lines.append("EOD")

    ncols = 2 if len(functions) > 1 else 1
    nrows = (len(functions) + ncols - 1) // ncols
    lines.append(f"set multiplot layout {nrows},{ncols}")
    for fn in functions:
        fn_rows = [r for r in ok_rows if r.function == fn]
        anchor = max(fn_rows, key=lambda r: r.l1_error)
        curves = [
            f"${_block_name(fn, el)} using 1:2 with linespoints title '{el}'"
            for el in sorted({r.element for r in fn_rows})
        ]
        n0, e0 = anchor.n_triangles, anchor.l1_error
        curves.append(f"{e0!r}*(x/{n0})**(-1.0) with lines dashtype 2 title 'order 2'")
        curves.append(f"{e0!r}*(x/{n0})**(-1.5) with lines dashtype 3 title 'order 3'")
        lines.append(f"set title '{fn}'")
        lines.append("plot " + ", \\\n     ".join(curves))
    lines.append("unset multiplot")
    p.write_text("\n".join(lines) + "\n")
    return p


def config_from_mapping(kv: dict) -> RunConfig:
    """Build a RunConfig from string key/value pairs (config file or CLI).

    Keys mirror the CLI flags: functions, elements, mesh, quad-degree,
    quad-order, subdivide, custom, out, plot.
    """
    cfg = RunConfig()
    known = {"functions", "elements", "mesh", "quad-degree", "quad-order", "subdivide", "custom", "out", "plot"}
    unknown = set(kv) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    updates = {}
    if "functions" in kv:
        updates["functions"] = tuple(s.strip() for s in kv["functions"].split(",") if s.strip())
    if "elements" in kv:
        updates["elements"] = tuple(s.strip() for s in kv["elements"].split(",") if s.strip())
    if "mesh" in kv:
        head, sep, tail = kv["mesh"].partition(":")
        items = tuple(s.strip() for s in tail.split(",") if s.strip())
        if head == "structured" and sep:
            try:
                updates["mesh_kind"] = "structured"
                updates["mesh_sizes"] = tuple(int(s) for s in items)
            except ValueError:
                raise ConfigError(f"bad structured mesh sizes {tail!r}") from None
        elif head == "files" and sep:
            updates["mesh_kind"] = "files"
            updates["mesh_files"] = items
        else:
            raise ConfigError(f"mesh must be structured:<sizes> or files:<prefixes>, got {kv['mesh']!r}")
    if "quad-degree" in kv:
        try:
            updates["quad_degree"] = int(kv["quad-degree"])
        except ValueError:
            raise ConfigError(f"bad quad-degree {kv['quad-degree']!r}") from None
    if "quad-order" in kv:
        try:
            updates["quad_order"] = int(kv["quad-order"])
        except ValueError:
            raise ConfigError(f"bad quad-order {kv['quad-order']!r}") from None
    if "subdivide" in kv:
        val = str(kv["subdivide"]).strip().lower()
        if val not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"bad subdivide flag {kv['subdivide']!r}")
        updates["subdivide"] = val in ("true", "1", "yes")
    if "custom" in kv:
        try:
            updates["custom_functionals"] = tuple(
                parse_functional(s) for s in kv["custom"].split(";") if s.strip()
            )
        except Exception as e:
            raise ConfigError(f"bad custom functional triple: {e}") from None
    if "out" in kv:
        updates["out"] = kv["out"]
    if "plot" in kv:
        updates["plot"] = kv["plot"]
    return replace(cfg, **updates)
