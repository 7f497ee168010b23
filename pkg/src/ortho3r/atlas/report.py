"""Machine-readable classification reports.

Reports are plain dictionaries with lower_snake_case keys, serialized as a
single JSON document.  Output is deterministic: floats are rounded to nine
significant digits, keys keep insertion order, and no timestamp is emitted,
so re-running with identical inputs reproduces the bytes exactly.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .. import __version__
from ..classify import Verdict, class_rank
from ..workspace import GridSpec, WorkspaceAnalysis


def _round9(x: float) -> float | None:
    if not math.isfinite(x):
        return None
    return float(f"{x:.9g}")


def build_report(verdict: Verdict, grid: GridSpec) -> dict[str, Any]:
    """Assemble the report dictionary for one classified design."""
    analysis: WorkspaceAnalysis | None = verdict.analysis
    m = verdict.metrics
    nodes = []
    cusps = []
    if analysis is not None:
        nodes = [{"rho": _round9(nd.location.rho), "z": _round9(nd.location.z)}
                 for nd in analysis.nodes]
        cusps = [{"rho": _round9(c.location.rho), "z": _round9(c.location.z)}
                 for c in analysis.cusps]
    return {
        "tool_version": __version__,
        "params": None,   # filled by caller via with_params
        "family_case": verdict.case,
        "label": verdict.label,
        "class_rank": class_rank(verdict.label),
        "analytic": {
            "label": verdict.analytic.label,
            "provisional": verdict.analytic.provisional,
            "detail": verdict.analytic.detail,
        },
        "numeric_label": verdict.numeric_label,
        "agreement": verdict.agreement,
        "warnings": list(verdict.warnings),
        "metrics": {
            "node_count": m.node_count,
            "cusp_count": m.cusp_count,
            "void_count": m.void_count,
            "quaternary_ratio": _round9(m.quaternary_ratio),
            "hole_ratio": _round9(m.hole_ratio),
            "feasible_ratio": _round9(m.feasible_ratio),
        },
        "nodes": nodes,
        "cusps": cusps,
        "grid": {"rmax": _round9(grid.rmax), "resolution": grid.n},
    }


def with_params(report: dict[str, Any], d2, d3, d4, r2, r3) -> dict[str, Any]:
    report["params"] = {"d2": _round9(d2), "d3": _round9(d3), "d4": _round9(d4),
                        "r2": _round9(r2), "r3": _round9(r3)}
    return report


def report_json(report: dict[str, Any]) -> str:
    return json.dumps(report, indent=2, allow_nan=False) + "\n"
