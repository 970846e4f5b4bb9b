"""Command-line interface.

Subcommands:
  converge   run an L1 convergence study and emit CSV (and a gnuplot script)
  check      run the invariant self-check suite
  info       print the duality matrices and constants of an element

Exit codes: 0 success, 1 validation error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .checks import run_all
from .elements import CRElement, admissibility, family_constants, make_element
from .errors import ConfigError, CrenrichError, DomainError, UnknownFunction, UnsupportedDegree
from .harness import config_from_mapping, emit_csv, emit_plot_script, run_convergence


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crenrich", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    conv = sub.add_parser("converge", help="run a convergence study")
    conv.add_argument("--functions", help="comma list of test functions (f1,f2,f3,f4)")
    conv.add_argument("--elements", help="comma list of elements (cr,af3,gn:<g>,pn:<m>,custom)")
    conv.add_argument("--mesh", help="structured:<n1,n2,...> or files:<prefix1,prefix2,...>")
    conv.add_argument("--quad-degree", dest="quad_degree", help="triangle rule degree (2,5,8,10)")
    conv.add_argument("--quad-order", dest="quad_order", help="1-D quadrature point count")
    conv.add_argument("--subdivide", action="store_true", default=None, help="4-way subdivision for error integration")
    conv.add_argument("--custom", help="semicolon list of kind:j[:param] for element 'custom'")
    conv.add_argument("--out", help="CSV output path (default report.csv)")
    conv.add_argument("--plot", help="gnuplot script output path")
    conv.add_argument("--config", help="key=value config file mirroring these flags")
    conv.set_defaults(func=cmd_converge)

    chk = sub.add_parser("check", help="run the invariant suite")
    chk.set_defaults(func=cmd_check)

    info = sub.add_parser("info", help="print element matrices and constants")
    info.add_argument("--element", required=True, help="cr, af3, gn:<gamma> or pn:<mu>")
    info.set_defaults(func=cmd_info)
    return parser


def parse_config_file(path: str) -> dict:
    """Read a plain key=value file; '#' starts a comment."""
    kv = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()
    return kv


def cmd_converge(args) -> int:
    kv = parse_config_file(args.config) if args.config else {}
    for key in ("functions", "elements", "mesh", "quad_degree", "quad_order", "custom", "out", "plot"):
        val = getattr(args, key, None)
        if val is not None:
            kv[key.replace("_", "-")] = val
    if args.subdivide is not None:
        kv["subdivide"] = "true"
    config = config_from_mapping(kv)
    report = run_convergence(config)

    md = report.metadata
    print(f"# domain: {md['domain']}; L1 convention: {md['l1_convention']}")
    print(f"# triangle rule degree {md['quad_degree']}, 1-D order {md['quad_order']}, subdivide={md['subdivide']}")
    print(f"{'function':<9} {'element':<8} {'triangles':>9} {'h_max':>12} {'l1_error':>14} {'order':>7}  status")
    for r in report.rows:
        l1 = f"{r.l1_error:.6e}" if r.l1_error is not None else "-"
        order = f"{r.order:.3f}" if r.order is not None else "-"
        print(f"{r.function:<9} {r.element:<8} {r.n_triangles:>9} {r.h_max:>12.6f} {l1:>14} {order:>7}  {r.status}")

    out = config.out or "report.csv"
    emit_csv(report, out)
    print(f"wrote {out}")
    if config.plot:
        emit_plot_script(report, config.plot)
        print(f"wrote {config.plot}")
    return 0


def cmd_check(args) -> int:
    results = run_all()
    ok = True
    for name, passed, detail in results:
        print(f"{'PASS' if passed else 'FAIL'} {name}: {detail}")
        ok = ok and passed
    print(f"{sum(p for _, p, _ in results)}/{len(results)} checks passed")
    return 0 if ok else 2


def cmd_info(args) -> int:
    element = make_element(args.element)
    if isinstance(element, CRElement):
        print("element cr: piecewise linear, 3 edge-mean degrees of freedom, no enrichment matrix")
        return 0
    det, admissible = admissibility(element.N)
    with np.printoptions(precision=12, suppress=False):
        print(f"element {element.label}")
        print(f"functionals: {[f'{F.kind}:{F.j}' + (f':{F.parameter:g}' if F.parameter is not None else '') for F in element.functionals]}")
        print("N =")
        print(element.N)
        print("N_inv =")
        print(element.N_inv)
        print(f"det(N) = {det!r} (admissible: {admissible})")
    head = element.label.split(":")[0]
    if head in ("gn", "pn"):
        cst = family_constants(head, element.functionals[0].parameter)
        print("constants:")
        for name, value in sorted(vars(cst).items()):
            print(f"  {name} = {value!r}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else 1
    try:
        return args.func(args)
    except (ConfigError, UnknownFunction, DomainError, UnsupportedDegree, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except CrenrichError as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"runtime failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
