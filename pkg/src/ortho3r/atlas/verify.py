"""Reference designs and the verification harness.

`PAPER_EXAMPLES` lists one worked design per group (twenty-one in total)
with its expected group label, node count and void count; `run_verification`
re-measures them and reports a pass/fail row each.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from ..classify import numeric_verdict
from ..model import DesignParams
from ..workspace import GridSpec

#: (d2, d3, d4, r2, r3) -> expected (label, nodes, voids).
PAPER_EXAMPLES: tuple[tuple[tuple[float, float, float, float, float], str, int, int], ...] = (
    ((0.0, 2.0, 1.5, 1.0, 0.0), "A1", 0, 0),
    ((0.0, 2.0, 2.2, 1.5, 0.0), "A2", 2, 0),
    ((0.0, 2.0, 3.0, 1.0, 0.0), "A3", 4, 0),
    ((0.0, 2.0, 1.0, 0.0, 0.0), "B1", 0, 0),
    ((0.0, 2.0, 3.0, 0.0, 0.0), "B2", 1, 0),
    ((0.0, 0.0, 2.0, 1.5, 0.0), "C", 0, 0),
    ((1.0, 1.4, 0.7, 0.0, 0.0), "D1", 2, 1),
    ((1.0, 2.0, 1.5, 0.0, 0.0), "D2", 0, 0),
    ((1.0, 2.0, 2.5, 0.0, 0.0), "D3", 1, 0),
    ((1.0, 0.5, 2.0, 0.0, 0.0), "D4", 2, 0),
    ((1.0, 0.6, 0.7, 0.0, 0.0), "D5", 0, 0),
    ((1.0, 0.0, 1.5, 0.0, 0.0), "E", 0, 0),
    ((0.0, 2.0, 1.5, 1.0, 1.0), "F1", 0, 0),
    ((0.0, 1.0, 2.0, 1.0, 1.0), "F2", 2, 0),
    ((0.0, 1.0, 3.0, 0.0, 1.0), "G", 0, 0),
    ((0.0, 0.0, 1.0, 3.0, 1.0), "H", 0, 0),
    ((1.0, 2.5, 1.5, 0.0, 0.5), "I1", 0, 0),
    ((1.0, 3.0, 0.7, 0.0, 0.5), "I2", 2, 1),
    ((1.0, 0.5, 0.7, 0.0, 0.5), "I3", 0, 1),
    ((1.0, 0.3, 2.0, 0.0, 0.5), "I4", 2, 1),
    ((1.0, 0.0, 2.0, 0.0, 1.0), "J", 0, 1),
)


@dataclass
class VerifyRow:
    params: tuple[float, float, float, float, float]
    expected_label: str
    expected_nodes: int
    expected_voids: int
    label: str
    nodes: int
    voids: int
    seconds: float

    @property
    def passed(self) -> bool:
        return (self.label == self.expected_label
                and self.nodes == self.expected_nodes
                and self.voids == self.expected_voids)


def run_verification(grid_n: int = 512, only: str | None = None) -> list[VerifyRow]:
    """Re-measure the reference designs; one row per design."""
    import time

    rows: list[VerifyRow] = []
    for params, label, nodes, voids in PAPER_EXAMPLES:
        if only is not None and not label.startswith(only):
            continue
        p = DesignParams(*params)
        g = GridSpec.for_design(p, n=grid_n)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            v = numeric_verdict(p, g, with_aspects=False)
        rows.append(VerifyRow(
            params=params, expected_label=label, expected_nodes=nodes,
            expected_voids=voids, label=v.label, nodes=v.metrics.node_count,
            voids=v.metrics.void_count, seconds=time.perf_counter() - t0))
    return rows
