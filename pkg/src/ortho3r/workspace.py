"""
Raster analysis of the workspace cross-section.

The half cross-section rho in [0, Rmax], z in [-Rmax, Rmax] is sampled on a
square-cell grid (N cells across rho, 2N across z) with the solution count
at every cell centre.  On top of the count field this module measures:

* voids: zero-count components enclosed by reachable cells.  The component
  connectivity is 4-neighbour; components touching the outer boundary ring
  (rho = Rmax or |z| = Rmax, but not the rho = 0 axis edge, which is the
  interior of the solid of revolution) form the exterior;
* the hole profile rho_min(z): the clearance between the base axis and the
  nearest reachable cell per z level, summarized by its maximum relative to
  Rmax;
* the quaternary ratio: the area fraction of the reachable cross-section
  with four solutions.  Cells within half a cell diagonal of a singularity
  image curve are excluded from both numerator and denominator, since
  counts on the curves themselves are measure-zero artifacts;
* aspects: connected components of the singularity-free joint torus, split
  by the sign of the reduced singularity function with periodic stitching,
  and their image coverage of the reachable cross-section.  The best
  coverage is the feasible-path ratio: inside one aspect any continuous
  path avoids singularities.

Grid extent defaults to 2 percent above the sum of the DH lengths: the sum
itself is attained by designs with r2 = r3 = 0, which would place reachable
cells on the boundary ring and trip the extent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .model import DesignParams, reduced_singularity, section_coords
from .ikquartic import count_grid
from .singular import SectionCurve, find_cusps, find_nodes, trace_section_curves, CuspPoint, NodePoint

#: Default raster resolution (cells across the rho axis).
DEFAULT_GRID_N = 512
#: Default trace resolution for the singularity curves.
DEFAULT_TRACE_N = 1024
#: Default joint-grid resolution per axis for aspect analysis.
DEFAULT_ASPECT_M = 256
#: Coarse comparison grid used for aspect image coverage.
_COVERAGE_N = 96

#: Qualitative buckets (artifact conventions, used for table comparison).
HOLE_BUCKETS = ((0.15, "Small"), (0.35, "Intermediate"), (math.inf, "Big"))
ZONE_BUCKETS = ((0.25, "Small"), (0.60, "Intermediate"), (0.99, "Big"),
                (math.inf, "All the workspace"))


class GridTooSmall(ValueError):
    """Reachable cells reached the boundary ring; enlarge the grid extent."""


def hole_bucket(ratio: float) -> str:
    for limit, name in HOLE_BUCKETS:
        if ratio < limit:
            return name
    return HOLE_BUCKETS[-1][1]


def zone_bucket(ratio: float) -> str:
    for limit, name in ZONE_BUCKETS:
        if ratio < limit:
            return name
    return ZONE_BUCKETS[-1][1]


@dataclass(frozen=True)
class GridSpec:
    """Raster of the half cross-section with square cells."""

    rmax: float
    n: int = DEFAULT_GRID_N

    def __post_init__(self):
        if self.n < 64:
            raise ValueError("grid resolution n must be at least 64")
        if not (math.isfinite(self.rmax) and self.rmax > 0.0):
            raise ValueError("rmax must be positive and finite")

    @classmethod
    def for_design(cls, p: DesignParams, n: int = DEFAULT_GRID_N) -> "GridSpec":
        return cls(rmax=1.02 * p.length_sum, n=n)

    @property
    def cell(self) -> float:
        return self.rmax / self.n

    def rho_centers(self) -> np.ndarray:
        return (np.arange(self.n) + 0.5) * self.cell

    def z_centers(self) -> np.ndarray:
        return -self.rmax + (np.arange(2 * self.n) + 0.5) * self.cell


@dataclass
class IksField:
    """Solution counts at cell centres; shape (n, 2n) indexed [rho, z]."""

    counts: np.ndarray
    grid: GridSpec

    @property
    def reachable(self) -> np.ndarray:
        return self.counts > 0


@dataclass
class Void:
    area: float
    cell: tuple[int, int]       # a representative (rho, z) cell index
    cells: int


@dataclass
class Cavities:
    voids: list[Void]
    rho_min: np.ndarray         # per z row; NaN where the row is empty
    hole_ratio: float

    @property
    def void_count(self) -> int:
        return len(self.voids)


@dataclass
class AspectSummary:
    count: int
    area_fractions: list[float]
    coverages: list[float]
    feasible_ratio: float


@dataclass
class WorkspaceMetrics:
    node_count: int
    cusp_count: int
    void_count: int
    quaternary_ratio: float
    hole_ratio: float
    feasible_ratio: float


def iks_field(p: DesignParams, g: GridSpec) -> IksField:
    """Solution-count raster; raises GridTooSmall if reach hits the ring."""
    rho = g.rho_centers()
    z = g.z_centers()
    counts = count_grid(p, (rho ** 2)[:, None], z[None, :])
    ring = np.concatenate([counts[-1, :], counts[:, 0], counts[:, -1]])
    if np.any(ring > 0):
        raise GridTooSmall(
            f"reachable cells on the boundary ring; rmax={g.rmax} is below the reach"
        )
    return IksField(counts=counts.astype(np.int8), grid=g)


def cavities(fieldv: IksField) -> Cavities:
    """Voids, axis-clearance profile, and hole ratio of a count field."""
    counts = fieldv.counts
    g = fieldv.grid
    empty = counts == 0
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    labels, nlab = ndimage.label(empty, structure=structure)
    # The border includes the rho = 0 edge: cavities pinched against the
    # base axis surround it in 3-D and are holes, not voids.
    exterior = set(np.unique(labels[0, :])) | set(np.unique(labels[-1, :])) \
        | set(np.unique(labels[:, 0])) | set(np.unique(labels[:, -1]))
    exterior.discard(0)
    voids: list[Void] = []
    cell_area = g.cell ** 2
    for lab in range(1, nlab + 1):
        if lab in exterior:
            continue
        mask = labels == lab
        ncells = int(mask.sum())
        ix = np.argwhere(mask)
        rep = tuple(int(v) for v in ix[len(ix) // 2])
        voids.append(Void(area=ncells * cell_area, cell=rep, cells=ncells))
    voids.sort(key=lambda v: (-v.cells, v.cell))

    nonzero = ~empty
    rho_idx = np.argmax(nonzero, axis=0).astype(float)
    has_any = nonzero.any(axis=0)
    rho_min = np.where(has_any, (rho_idx + 0.5) * g.cell, np.nan)
    hole_ratio = float(np.nanmax(rho_min) / g.rmax) if has_any.any() else 0.0
    return Cavities(voids=voids, rho_min=rho_min, hole_ratio=hole_ratio)


def _near_curve_mask(curves: list[SectionCurve], g: GridSpec) -> np.ndarray:
    """Cells whose centre lies within half a cell diagonal of a curve."""
    mask = np.zeros((g.n, 2 * g.n), dtype=bool)
    radius = g.cell * math.sqrt(2.0) / 2.0
    step = g.cell / 8.0
    samples = []
    for sc in curves:
        pts = sc.points
        if len(pts) < 2:
            if len(pts):
                samples.append(pts)
            continue
        a, b = pts[:-1], pts[1:]
        lens = np.linalg.norm(b - a, axis=1)
        nsub = np.maximum(1, np.ceil(lens / step).astype(int))
        for k in range(len(a)):
            ts = np.linspace(0.0, 1.0, nsub[k] + 1)[:-1, None]
            samples.append(a[k] + ts * (b[k] - a[k]))
        samples.append(pts[-1:])
    if not samples:
        return mask
    pts = np.vstack(samples)
    h = g.cell
    fi = pts[:, 0] / h - 0.5                  # fractional rho index
    fj = (pts[:, 1] + g.rmax) / h - 0.5
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            ii = np.round(fi).astype(int) + di
            jj = np.round(fj).astype(int) + dj
            ok = (ii >= 0) & (ii < g.n) & (jj >= 0) & (jj < 2 * g.n)
            if not np.any(ok):
                continue
            ci = (ii[ok] + 0.5) * h
            cj = (jj[ok] + 0.5) * h - g.rmax
            close = (ci - pts[ok, 0]) ** 2 + (cj - pts[ok, 1]) ** 2 <= radius ** 2
            mask[ii[ok][close], jj[ok][close]] = True
    return mask


def quaternary_ratio(fieldv: IksField, curves: list[SectionCurve]) -> float:
    """Area fraction of the reachable section with four solutions."""
    excluded = _near_curve_mask(curves, fieldv.grid)
    counts = fieldv.counts
    reach = (counts > 0) & ~excluded
    total = int(reach.sum())
    if total == 0:
        return 0.0
    return float(((counts == 4) & ~excluded).sum() / total)


def aspects(p: DesignParams, m: int = DEFAULT_ASPECT_M) -> AspectSummary:
    """Singularity-free components of the joint torus and their coverage.

    Components are labelled on the sign of the reduced singularity function
    (a sign-changing curve always separates cells), with the torus wrap
    stitched through union-find.  Coverage is measured against a coarse
    raster of the reachable cross-section.
    """
    if m < 128:
        raise ValueError("aspect grid resolution m must be at least 128")
    from .singular import _OFFSET_2, _OFFSET_3

    step = 2.0 * math.pi / m
    t2 = -math.pi + (np.arange(m) + _OFFSET_2) * step
    t3 = -math.pi + (np.arange(m) + _OFFSET_3) * step
    S = reduced_singularity(p, t2[:, None], t3[None, :])
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    pos, npos = ndimage.label(S > 0.0, structure=structure)
    negl, nneg = ndimage.label(S < 0.0, structure=structure)
    labels = np.where(S > 0.0, pos, 0) + np.where(S < 0.0, negl + npos, 0)
    ntot = npos + nneg

    # Periodic stitching.
    parent = list(range(ntot + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    sign = np.sign(S)
    for a, b, sa, sb in ((labels[0, :], labels[-1, :], sign[0, :], sign[-1, :]),
                         (labels[:, 0], labels[:, -1], sign[:, 0], sign[:, -1])):
        same = (sa == sb) & (a > 0) & (b > 0)
        for la, lb in set(zip(a[same].tolist(), b[same].tolist())):
            union(la, lb)

    roots = {}
    flat = labels.ravel()
    canon = np.zeros(ntot + 1, dtype=int)
    nxt = 0
    for lab in range(1, ntot + 1):
        r = find(lab)
        if r not in roots:
            nxt += 1
            roots[r] = nxt
        canon[lab] = roots[r]
    merged = canon[flat].reshape(labels.shape)
    count = nxt

    # Image coverage on a coarse raster.  The joint grid is subsampled 3x
    # for the forward map so that a full-coverage aspect actually hits
    # nearly every reachable coarse cell (the map is far from uniform).
    gc = GridSpec(rmax=1.02 * p.length_sum, n=_COVERAGE_N)
    coarse = count_grid(p, (gc.rho_centers() ** 2)[:, None], gc.z_centers()[None, :])
    reach_cells = coarse > 0
    n_reach = int(reach_cells.sum())
    sub = 3
    mf = sub * m
    t2f = -math.pi + (np.arange(mf) + _OFFSET_2) * (2.0 * math.pi / mf)
    t3f = -math.pi + (np.arange(mf) + _OFFSET_3) * (2.0 * math.pi / mf)
    rho_img, z_img = section_coords(p, t2f[:, None] + 0.0 * t3f[None, :],
                                    0.0 * t2f[:, None] + t3f[None, :])
    ii = np.clip((rho_img / gc.cell - 0.5).round().astype(int), 0, gc.n - 1)
    jj = np.clip(((z_img + gc.rmax) / gc.cell - 0.5).round().astype(int), 0, 2 * gc.n - 1)
    lin = ii * (2 * gc.n) + jj
    reach_lin = reach_cells.ravel()
    fine_owner = merged[np.minimum(np.arange(mf) // sub, m - 1)][:, np.minimum(np.arange(mf) // sub, m - 1)]

    area_fractions: list[float] = []
    coverages: list[float] = []
    total_cells = m * m
    for lab in range(1, count + 1):
        area_fractions.append(float((merged == lab).sum() / total_cells))
        if n_reach == 0:
            coverages.append(0.0)
            continue
        hit = np.unique(lin[fine_owner == lab])
        hit = hit[reach_lin[hit]]
        coverages.append(float(len(hit) / n_reach))
    feasible = max(coverages, default=0.0)
    return AspectSummary(count=count, area_fractions=area_fractions,
                         coverages=coverages, feasible_ratio=feasible)


@dataclass
class WorkspaceAnalysis:
    """Everything the raster and curve pipelines produce for one design."""

    fieldv: IksField
    cav: Cavities
    curves: list[SectionCurve]
    nodes: list[NodePoint]
    cusps: list[CuspPoint]
    aspect_summary: AspectSummary
    metrics: WorkspaceMetrics


def analyze(p: DesignParams, g: GridSpec | None = None,
            trace_n: int = DEFAULT_TRACE_N,
            aspect_m: int = DEFAULT_ASPECT_M,
            with_aspects: bool = True) -> WorkspaceAnalysis:
    """Run the full measurement pipeline for one design."""
    if g is None:
        g = GridSpec.for_design(p)
    fieldv = iks_field(p, g)
    cav = cavities(fieldv)
    curves = trace_section_curves(p, trace_n)
    nodes = find_nodes(p, curves)
    cusps = find_cusps(p, curves)
    quat = quaternary_ratio(fieldv, curves)
    if with_aspects:
        summary = aspects(p, aspect_m)
    else:
        summary = AspectSummary(count=0, area_fractions=[], coverages=[],
                                feasible_ratio=math.nan)
    met = WorkspaceMetrics(
        node_count=len(nodes),
        cusp_count=len(cusps),
        void_count=cav.void_count,
        quaternary_ratio=quat,
        hole_ratio=cav.hole_ratio,
        feasible_ratio=summary.feasible_ratio,
    )
    return WorkspaceAnalysis(fieldv=fieldv, cav=cav, curves=curves, nodes=nodes,
                             cusps=cusps, aspect_summary=summary, metrics=met)


def metrics(p: DesignParams, g: GridSpec | None = None) -> WorkspaceMetrics:
    """Aggregate workspace measurements for one design."""
    return analyze(p, g).metrics
