"""Command-line interface.

Commands:
    classify   label one design and print its metrics (optionally JSON)
    analyze    write report.json and cross_section.svg for one design
    sweep      map a 2-D slice of the design space into zones
    verify     re-measure the 21 reference designs and check the results
    table      print the group-property table

Exit codes: 0 success, 1 invalid input, 2 design outside the ten cases,
3 output path not writable, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from ..classify import (
    GROUP_TABLE,
    NoSignatureMatch,
    class_rank,
    numeric_verdict,
)
from ..model import DesignParams, OutOfFamily
from ..workspace import GridSpec
from . import figures
from .report import build_report, report_json, with_params
from .sweep import Axis, SweepSpec, SweepSpecError, PARAM_NAMES as _PARAM_NAMES
from .verify import run_verification


class _Parser(argparse.ArgumentParser):
    """Argument errors exit with code 1 (invalid input)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_param_flags(sub):
    for name in _PARAM_NAMES:
        sub.add_argument(f"--{name}", type=float, required=True,
                         help=f"DH length {name} (nonnegative)")


def _design(args) -> DesignParams:
    try:
        return DesignParams(args.d2, args.d3, args.d4, args.r2, args.r3)
    except ValueError as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        raise SystemExit(1) from None


def _fmt(x: float) -> str:
    return f"{x:.9g}" if math.isfinite(x) else "nan"


def cmd_classify(args) -> int:
    p = _design(args)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = GridSpec.for_design(p, n=args.grid)
            verdict = numeric_verdict(p, g, keep_analysis=True)
    except OutOfFamily as exc:
        print(f"out of family: {exc}", file=sys.stderr)
        return 2
    if args.json:
        rep = with_params(build_report(verdict, g), p.d2, p.d3, p.d4, p.r2, p.r3)
        sys.stdout.write(report_json(rep))
        return 0
    m = verdict.metrics
    print(f"label: {verdict.label}")
    print(f"class_rank: {class_rank(verdict.label)}")
    print(f"family_case: {verdict.case}")
    print(f"analytic_label: {verdict.analytic.label}"
          + (" (provisional)" if verdict.analytic.provisional else ""))
    print(f"node_count: {m.node_count}")
    print(f"cusp_count: {m.cusp_count}")
    print(f"void_count: {m.void_count}")
    print(f"quaternary_ratio: {_fmt(m.quaternary_ratio)}")
    print(f"hole_ratio: {_fmt(m.hole_ratio)}")
    print(f"feasible_ratio: {_fmt(m.feasible_ratio)}")
    for w in verdict.warnings:
        print(f"warning: {w}")
    return 0


def cmd_analyze(args) -> int:
    p = _design(args)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            g = GridSpec.for_design(p, n=args.grid)
            verdict = numeric_verdict(p, g, keep_analysis=True)
    except OutOfFamily as exc:
        print(f"out of family: {exc}", file=sys.stderr)
        return 2
    rep = with_params(build_report(verdict, g), p.d2, p.d3, p.d4, p.r2, p.r3)
    svg = figures.cross_section_svg(verdict.analysis)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report_json(rep), encoding="utf-8")
        (out / "cross_section.svg").write_text(svg, encoding="utf-8")
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out / 'report.json'} and {out / 'cross_section.svg'}")
    return 0


def _parse_axis(spec: str):
    """PARAM:LO..HI:STEPS -> (name, lo, hi, steps)."""
    try:
        name, rng, steps = spec.split(":")
        lo, hi = rng.split("..")
        name = name.strip()
        lo, hi, steps = float(lo), float(hi), int(steps)
    except ValueError:
        print(f"bad axis spec {spec!r}; expected PARAM:LO..HI:STEPS", file=sys.stderr)
        raise SystemExit(1) from None
    if name not in _PARAM_NAMES or steps < 1 or not (0 <= lo < hi):
        print(f"bad axis spec {spec!r}", file=sys.stderr)
        raise SystemExit(1)
    return name, lo, hi, steps


def cmd_sweep(args) -> int:
    xname, xlo, xhi, xsteps = _parse_axis(args.x)
    yname, ylo, yhi, ysteps = _parse_axis(args.y)
    fixed: dict[str, float] = {}
    for item in args.fixed or []:
        try:
            k, v = item.split("=")
            fixed[k.strip()] = float(v)
        except ValueError:
            print(f"bad --fixed entry {item!r}; expected NAME=VAL", file=sys.stderr)
            return 1
    try:
        spec = SweepSpec(case=args.case.upper(),
                         x=Axis(xname, xlo, xhi, xsteps),
                         y=Axis(yname, ylo, yhi, ysteps), fixed=fixed)
    except SweepSpecError as exc:
        print(f"invalid sweep: {exc}", file=sys.stderr)
        return 1

    xs = spec.x.centers()
    ys = spec.y.centers()
    labels = [["" for _ in range(ysteps)] for _ in range(xsteps)]
    hatched = [[False for _ in range(ysteps)] for _ in range(xsteps)]
    rows = []
    for i, xv in enumerate(xs):
        for j, yv in enumerate(ys):
            p = spec.design_at(xv, yv)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                try:
                    g = GridSpec.for_design(p, n=args.grid)
                    v = numeric_verdict(p, g, with_aspects=False,
                                        trace_n=args.trace)
                    label, nodes, voids = v.label, v.metrics.node_count, v.metrics.void_count
                    indet = v.analytic.indeterminate
                except NoSignatureMatch as exc:
                    label, nodes, voids = "Indeterminate", exc.metrics.node_count, \
                        exc.metrics.void_count
                    indet = True
            labels[i][j] = label
            hatched[i][j] = indet
            rows.append((float(xv), float(yv), label, nodes, voids))

    values = {name: 0.0 for name in _PARAM_NAMES}
    values.update(spec.fixed)
    transitions = _transition_overlays(spec.case, xname, yname, values, xs)
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with (out / "zone_map.csv").open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([xname, yname, "label", "node_count", "void_count"])
            for xv, yv, label, nodes, voids in rows:
                w.writerow([f"{xv:.9g}", f"{yv:.9g}", label, nodes, voids])
        svg = figures.zone_map_svg(xname, xs, yname, ys, labels, hatched, transitions)
        (out / "zone_map.svg").write_text(svg, encoding="utf-8")
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {out / 'zone_map.csv'} and {out / 'zone_map.svg'}")
    return 0


def _transition_overlays(case, xname, yname, values, xs):
    """Analytic transition curves in the swept plane (d3-d4 planes only)."""
    if (xname, yname) != ("d3", "d4"):
        return []
    dense = np.linspace(float(xs[0]), float(xs[-1]), 257)
    out = []
    r2 = values.get("r2", 0.0)
    d2 = values.get("d2", 0.0)
    r3 = values.get("r3", 0.0)
    if case == "A":
        out.append(("d4 = d3", dense, dense.copy()))
        out.append(("d4 = sqrt(d3^2 + r2^2)", dense, np.hypot(dense, r2)))
    elif case == "B":
        out.append(("d4 = d3", dense, dense.copy()))
    elif case == "D":
        out.append(("d4 = d3", dense, dense.copy()))
        out.append(("d4 = d2", dense, np.full_like(dense, d2)))
        big = np.linspace(0.0, float(np.max(dense)) * 2.0, 65)
        out.append(("d3 = d2", np.full_like(big, d2), big))
    elif case == "F":
        out.append(("d4 = sqrt(d3^2 + r2^2)", dense, np.hypot(dense, r2)))
    elif case == "I" and d2 > 0.0:
        d3n = dense / d2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = 1.0 + (r3 / d2) ** 2 / (d3n ** 2 - 1.0)
        delta = np.where((d3n > 1.0) & (val >= 0.0), np.sqrt(np.abs(val)), np.nan) * d2
        out.append(("d4 = delta", dense, delta))
        big = np.linspace(0.0, float(np.max(dense)) * 2.0, 65)
        out.append(("d3 = d2", np.full_like(big, d2), big))
    return out


def cmd_verify(args) -> int:
    rows = run_verification(grid_n=args.grid, only=args.only)
    if not rows:
        print("no reference rows selected", file=sys.stderr)
        return 1
    all_pass = True
    print(f"{'params':34s} {'expect':>6s} {'got':>6s} {'nodes':>9s} "
          f"{'voids':>9s} {'time':>7s}  result")
    for r in rows:
        all_pass &= r.passed
        pstr = "(" + ", ".join(f"{v:g}" for v in r.params) + ")"
        print(f"{pstr:34s} {r.expected_label:>6s} {r.label:>6s} "
              f"{r.nodes:>4d}/{r.expected_nodes:<4d} "
              f"{r.voids:>4d}/{r.expected_voids:<4d} "
              f"{r.seconds:6.1f}s  {'pass' if r.passed else 'FAIL'}")
    print(f"{sum(r.passed for r in rows)}/{len(rows)} passed")
    return 0 if all_pass else 4


def cmd_table(_args) -> int:
    print(f"{'group':>5s} {'voids':>5s} {'nodes':>5s} {'4-solution zone':>18s} "
          f"{'holes':>13s} {'feasible paths':>18s} {'rank':>4s}")
    for label, rec in GROUP_TABLE.items():
        print(f"{label:>5s} {rec.voids:>5d} {rec.nodes:>5d} {rec.iks4_zone:>18s} "
              f"{rec.holes:>13s} {rec.feasible:>18s} {class_rank(label):>4d}")
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="ortho3r",
                     description="Workspace analysis and classification of 3R "
                                 "orthogonal manipulators with a null DH parameter")
    sub = parser.add_subparsers(dest="command", required=True)

    p_cls = sub.add_parser("classify", help="classify one design",
                           parents=[], add_help=True)
    _add_param_flags(p_cls)
    p_cls.add_argument("--grid", type=int, default=512, help="raster resolution")
    p_cls.add_argument("--json", action="store_true", help="emit a JSON report")
    p_cls.set_defaults(func=cmd_classify)

    p_an = sub.add_parser("analyze", help="write report.json and cross_section.svg")
    _add_param_flags(p_an)
    p_an.add_argument("--grid", type=int, default=512)
    p_an.add_argument("--out", required=True, help="output directory")
    p_an.set_defaults(func=cmd_analyze)

    p_sw = sub.add_parser("sweep", help="zone map over a design-plane")
    p_sw.add_argument("--case", required=True, help="family case A..J")
    p_sw.add_argument("--x", required=True, help="PARAM:LO..HI:STEPS")
    p_sw.add_argument("--y", required=True, help="PARAM:LO..HI:STEPS")
    p_sw.add_argument("--fixed", nargs="*", default=[], help="NAME=VAL ...")
    p_sw.add_argument("--grid", type=int, default=256)
    p_sw.add_argument("--trace", type=int, default=512,
                      help="singularity trace resolution per cell")
    p_sw.add_argument("--out", required=True, help="output directory")
    p_sw.set_defaults(func=cmd_sweep)

    p_ver = sub.add_parser("verify", help="check the 21 reference designs")
    p_ver.add_argument("--grid", type=int, default=512)
    p_ver.add_argument("--only", default=None, help="restrict to one case prefix")
    p_ver.set_defaults(func=cmd_verify)

    p_tab = sub.add_parser("table", help="print the group-property table")
    p_tab.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OutOfFamily as exc:
        print(f"out of family: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
