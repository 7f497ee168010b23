"""SVG figures: workspace cross-sections and design-space zone maps.

Hand-assembled SVG 1.1.  Figure conventions: four-solution regions dark
gray, two-solution regions light gray, singularity image curves stroked in
blue (one polyline element per traced curve), node points as circles, cusp
points as cross markers; axes labelled rho and z.
"""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

from ..workspace import WorkspaceAnalysis

DARK = "#404040"      # four solutions
LIGHT = "#C0C0C0"     # two solutions
CURVE = "#0000CC"

#: Deterministic zone-map palette, one colour per group label.
LABEL_COLORS = {
    "A1": "#4C72B0", "A2": "#DD8452", "A3": "#55A868",
    "B1": "#4C72B0", "B2": "#DD8452",
    "C": "#4C72B0",
    "D1": "#4C72B0", "D2": "#DD8452", "D3": "#55A868", "D4": "#C44E52", "D5": "#8172B3",
    "E": "#4C72B0",
    "F1": "#4C72B0", "F2": "#DD8452",
    "G": "#4C72B0", "H": "#4C72B0",
    "I1": "#4C72B0", "I2": "#DD8452", "I3": "#55A868", "I4": "#C44E52",
    "J": "#4C72B0",
    "Indeterminate": "#FFFFFF",
}


def _fmt(x: float) -> str:
    return f"{x:.6g}"


class _Canvas:
    def __init__(self, width: float, height: float):
        self.width = width
        self.height = height
        self.parts: list[str] = []

    def add(self, element: str):
        self.parts.append(element)

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_fmt(self.width)}" height="{_fmt(self.height)}" '
            f'viewBox="0 0 {_fmt(self.width)} {_fmt(self.height)}">\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _axes(c: _Canvas, x0, y0, x1, y1, xlabel, ylabel):
    c.add(f'<rect x="{_fmt(x0)}" y="{_fmt(y1)}" width="{_fmt(x1 - x0)}" '
          f'height="{_fmt(y0 - y1)}" fill="none" stroke="black" stroke-width="1"/>')
    c.add(f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(y0 + 28)}" '
          f'font-size="14" text-anchor="middle">{escape(xlabel)}</text>')
    c.add(f'<text x="{_fmt(x0 - 28)}" y="{_fmt((y0 + y1) / 2)}" font-size="14" '
          f'text-anchor="middle" transform="rotate(-90 {_fmt(x0 - 28)} '
          f'{_fmt((y0 + y1) / 2)})">{escape(ylabel)}</text>')


def cross_section_svg(analysis: WorkspaceAnalysis) -> str:
    """Workspace half cross-section with curves, nodes and cusp markers."""
    g = analysis.fieldv.grid
    counts = analysis.fieldv.counts
    margin = 46.0
    plot_w, plot_h = 360.0, 720.0
    c = _Canvas(plot_w + 2 * margin, plot_h + 2 * margin)
    sx = plot_w / g.rmax
    sy = plot_h / (2 * g.rmax)

    def to_px(rho, z):
        return margin + rho * sx, margin + (g.rmax - z) * sy

    # Count cells, merged into horizontal runs per z row.
    h = g.cell
    cw, ch = h * sx, h * sy
    for j in range(counts.shape[1]):
        z_lo = -g.rmax + j * h
        row = counts[:, j]
        i = 0
        n = len(row)
        while i < n:
            v = row[i]
            if v == 0:
                i += 1
                continue
            k = i
            while k + 1 < n and row[k + 1] == v:
                k += 1
            color = DARK if v >= 3 else LIGHT
            x_px, y_px = to_px(i * h, z_lo + h)
            c.add(f'<rect x="{_fmt(x_px)}" y="{_fmt(y_px)}" '
                  f'width="{_fmt((k - i + 1) * cw)}" height="{_fmt(ch)}" '
                  f'fill="{color}" stroke="none"/>')
            i = k + 1

    # One polyline per traced section curve.
    for sc in analysis.curves:
        pts = " ".join(f"{_fmt(to_px(r, z)[0])},{_fmt(to_px(r, z)[1])}"
                       for r, z in sc.points)
        c.add(f'<polyline points="{pts}" fill="none" stroke="{CURVE}" '
              f'stroke-width="1.4"/>')

    for nd in analysis.nodes:
        x_px, y_px = to_px(nd.location.rho, nd.location.z)
        c.add(f'<circle cx="{_fmt(x_px)}" cy="{_fmt(y_px)}" r="4.5" '
              f'fill="white" stroke="#CC0000" stroke-width="1.6"/>')
    for cp in analysis.cusps:
        x_px, y_px = to_px(cp.location.rho, cp.location.z)
        c.add(f'<path d="M {_fmt(x_px - 4)} {_fmt(y_px - 4)} L {_fmt(x_px + 4)} '
              f'{_fmt(y_px + 4)} M {_fmt(x_px - 4)} {_fmt(y_px + 4)} '
              f'L {_fmt(x_px + 4)} {_fmt(y_px - 4)}" stroke="#CC0000" '
              f'stroke-width="2" fill="none"/>')

    _axes(c, margin, margin + plot_h, margin + plot_w, margin, "rho", "z")
    return c.render()


def zone_map_svg(xname: str, xs: np.ndarray, yname: str, ys: np.ndarray,
                 labels: list[list[str]], hatched: list[list[bool]],
                 transition_curves: list[tuple[str, np.ndarray, np.ndarray]]) -> str:
    """Design-space zone map: one coloured cell per sweep sample.

    ``labels[i][j]`` is the group at (xs[i], ys[j]); hatched cells sit on a
    transition curve.  ``transition_curves`` holds (name, x array, y array)
    polylines of the analytic transition loci, drawn on top.
    """
    margin = 50.0
    plot = 480.0
    c = _Canvas(plot + 2 * margin, plot + 2 * margin)
    c.add('<defs><pattern id="hatch" width="6" height="6" '
          'patternUnits="userSpaceOnUse" patternTransform="rotate(45)">'
          '<line x1="0" y1="0" x2="0" y2="6" stroke="#666666" stroke-width="1.5"/>'
          "</pattern></defs>")
    x_lo, x_hi = float(xs[0]), float(xs[-1])
    y_lo, y_hi = float(ys[0]), float(ys[-1])
    dx = (x_hi - x_lo) / max(len(xs) - 1, 1) if len(xs) > 1 else 1.0
    dy = (y_hi - y_lo) / max(len(ys) - 1, 1) if len(ys) > 1 else 1.0
    span_x = x_hi - x_lo + dx
    span_y = y_hi - y_lo + dy

    def to_px(x, y):
        px = margin + (x - (x_lo - dx / 2)) / span_x * plot
        py = margin + plot - (y - (y_lo - dy / 2)) / span_y * plot
        return px, py

    cw = dx / span_x * plot
    ch = dy / span_y * plot
    for i, xv in enumerate(xs):
        for j, yv in enumerate(ys):
            color = LABEL_COLORS.get(labels[i][j], "#999999")
            px, py = to_px(xv - dx / 2, yv + dy / 2)
            c.add(f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(cw)}" '
                  f'height="{_fmt(ch)}" fill="{color}" stroke="none"/>')
            if hatched[i][j]:
                c.add(f'<rect x="{_fmt(px)}" y="{_fmt(py)}" width="{_fmt(cw)}" '
                      f'height="{_fmt(ch)}" fill="url(#hatch)" stroke="none"/>')

    for name, tx, ty in transition_curves:
        inside = (ty >= y_lo - dy / 2) & (ty <= y_hi + dy / 2) & np.isfinite(ty)
        pts = [f"{_fmt(to_px(x, y)[0])},{_fmt(to_px(x, y)[1])}"
               for x, y, ok in zip(tx, ty, inside) if ok]
        if len(pts) >= 2:
            c.add(f'<polyline points="{" ".join(pts)}" fill="none" '
                  f'stroke="black" stroke-width="1.6" stroke-dasharray="7 3">'
                  f'<title>{escape(name)}</title></polyline>')

    _axes(c, margin, margin + plot, margin + plot, margin, xname, yname)
    return c.render()
