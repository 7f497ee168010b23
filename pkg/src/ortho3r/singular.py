"""
Singularity curves of the cross-section, with node and cusp detection.

The zero set of `reduced_singularity` on the (theta2, theta3) torus is
extracted by marching squares on a uniform grid, every grid-edge crossing
refined by bisection, and the crossing points chained into polyline
branches.  The grid is offset from the symmetric angles {0, +-pi/2, pi}
because several families have entire grid-aligned lines of singular
configurations (e.g. sin(theta3) = 0); with the offset those lines fall
between samples and are traced like any other sign change.

Pushing a branch through the (rho, z) projection gives a section curve.
Two kinds of degeneracy matter here:

* self-motion branches (r3 = 0 and d3 + d4*cos(theta3) = 0) map to a single
  point; they are flagged and excluded from crossing geometry, but the
  points they land on are genuine node locations whenever two regular
  branches also cross there;
* mirror or folded branches can cover the same image curve twice.  Such
  coincident images never cross transversally, so they contribute no
  spurious nodes, but a probe segment crossing them meets two singular
  branches at once (the solution count jumps by 4, not 2).

A node is a transversal crossing of section curves with two distinct
joint-space preimages, confirmed by the coincidence structure of the
inverse kinematics: two separate solution groups of multiplicity >= 2, or a
theta2 self-motion circle.  A cusp would be a group of exactly three
coincident solutions; the families handled here never produce one, so
`find_cusps` screens velocity minima with tangent reversal and rejects them
all through the triple-root check.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .model import DesignParams, SectionPoint, section_coords, reduced_singularity, singularity_scale
from .ikquartic import CoincidenceGroup, coincidence_groups, count_grid, self_motion_points

TWO_PI = 2.0 * math.pi

#: Grid offsets (fractions of a cell) keeping samples off symmetric angles.
_OFFSET_2 = 0.6180339887498949
_OFFSET_3 = 0.3819660112501051

#: Image diameter below this fraction of the reach marks a point-image branch.
_POINT_IMAGE_REL = 1e-5

#: Minimum |sin| of the crossing angle for a transversal intersection.
_TRANSVERSAL_MIN_SIN = 0.02

#: Minimum joint-space separation of node preimages (radians).
_PREIMAGE_MIN_SEP = 1e-5


class ResolutionWarning(UserWarning):
    """Two node candidates closer than a few trace steps; raise n to resolve."""


@dataclass
class JointCurve:
    """Polyline on the zero set of the reduced singularity function.

    Vertices are unwrapped along the walk (values may leave (-pi, pi]) so
    consecutive samples are always close; `closed` marks a loop on the torus.
    """

    theta: np.ndarray           # (k, 2) columns theta2, theta3
    branch_id: int
    closed: bool

    def __len__(self) -> int:
        return len(self.theta)


@dataclass
class SectionCurve:
    """Image of a JointCurve in the (rho, z) half cross-section."""

    points: np.ndarray          # (k, 2) columns rho, z
    source: JointCurve
    degenerate_point: bool      # image collapsed to a single point

    def __len__(self) -> int:
        return len(self.points)

    @property
    def closed(self) -> bool:
        return self.source.closed


@dataclass
class NodePoint:
    """Self-intersection of the singularity image: two coincident IK pairs."""

    location: SectionPoint
    preimages: np.ndarray       # (2, 2): the two (theta2, theta3) preimages
    residual: float             # image mismatch of the two refined preimages
    groups: list[CoincidenceGroup] = field(default_factory=list)
    self_motion: bool = False


@dataclass
class CuspPoint:
    """Point with three coincident inverse kinematic solutions."""

    location: SectionPoint
    preimage: tuple[float, float]
    groups: list[CoincidenceGroup] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Tracing
# ---------------------------------------------------------------------------

def _refine_edges(p: DesignParams, fixed: np.ndarray, lo: np.ndarray,
                  f_lo_neg: np.ndarray, step: float, axis: int,
                  iters: int = 34) -> np.ndarray:
    """Bisect S = 0 along grid edges; returns the moving coordinate."""
    lo = lo.copy()
    hi = lo + step
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if axis == 0:
            fm = reduced_singularity(p, mid, fixed)
        else:
            fm = reduced_singularity(p, fixed, mid)
        mneg = fm < 0.0
        take_lo = mneg == f_lo_neg      # root in upper half
        lo = np.where(take_lo, mid, lo)
        hi = np.where(take_lo, hi, mid)
    return 0.5 * (lo + hi)


def singular_branches(p: DesignParams, n: int = 1024) -> list[JointCurve]:
    """Trace all branches of the singular set on the joint torus.

    ``n`` controls the sampling density (grid step pi/n per axis); each
    crossing is refined by bisection to an interval below 1e-10.
    """
    if n < 64:
        raise ValueError("trace resolution n must be at least 64")
    m = 2 * n
    step = TWO_PI / m
    t2 = -math.pi + (np.arange(m) + _OFFSET_2) * step
    t3 = -math.pi + (np.arange(m) + _OFFSET_3) * step
    S = reduced_singularity(p, t2[:, None], t3[None, :])
    neg = S < 0.0

    # Edge crossings; 'h' edges vary theta2 at fixed theta3, 'v' vice versa.
    h_cross = neg != np.roll(neg, -1, axis=0)
    v_cross = neg != np.roll(neg, -1, axis=1)

    hi_idx = np.argwhere(h_cross)
    vi_idx = np.argwhere(v_cross)
    h_pos: dict[tuple[int, int], tuple[float, float]] = {}
    v_pos: dict[tuple[int, int], tuple[float, float]] = {}
    if len(hi_idx):
        i, j = hi_idx[:, 0], hi_idx[:, 1]
        roots = _refine_edges(p, t3[j], t2[i], neg[i, j], step, axis=0)
        for k in range(len(i)):
            h_pos[(int(i[k]), int(j[k]))] = (float(roots[k]), float(t3[j[k]]))
    if len(vi_idx):
        i, j = vi_idx[:, 0], vi_idx[:, 1]
        roots = _refine_edges(p, t2[i], t3[j], neg[i, j], step, axis=1)
        for k in range(len(i)):
            v_pos[(int(i[k]), int(j[k]))] = (float(t2[i[k]]), float(roots[k]))

    # Cells with crossings; connect their edge points into segments.
    cell_count = (h_cross.astype(np.int8) + np.roll(h_cross, -1, axis=1)
                  + v_cross + np.roll(v_cross, -1, axis=0))
    adjacency: dict[tuple, list[tuple]] = {}

    def link(a, b):
        adjacency.setdefault(a, []).append(b)
        adjacency.setdefault(b, []).append(a)

    for i, j in np.argwhere(cell_count >= 2):
        i, j = int(i), int(j)
        ip, jp = (i + 1) % m, (j + 1) % m
        edges = []
        if h_cross[i, j]:
            edges.append(("h", i, j))
        if h_cross[i, jp]:
            edges.append(("h", i, jp))
        if v_cross[i, j]:
            edges.append(("v", i, j))
        if v_cross[ip, j]:
            edges.append(("v", ip, j))
        if len(edges) == 2:
            link(edges[0], edges[1])
        elif len(edges) == 4:
            # Saddle cell: the centre sample decides the pairing.
            c = reduced_singularity(p, t2[i] + 0.5 * step, t3[j] + 0.5 * step)
            corner_neg = neg[i, j]
            bottom, top = ("h", i, j), ("h", i, jp)
            left, right = ("v", i, j), ("v", ip, j)
            if (c < 0.0) == corner_neg:
                # Centre joins the (i, j) corner region: curve separates the
                # two opposite corners.
                link(bottom, right)
                link(top, left)
            else:
                link(bottom, left)
                link(top, right)

    def position(key):
        return h_pos[key[1:]] if key[0] == "h" else v_pos[key[1:]]

    # Walk chains: open paths first (degree-1 endpoints), then loops.
    visited: set[tuple] = set()
    curves: list[JointCurve] = []

    def walk(start, closed_hint):
        path = [start]
        visited.add(start)
        prev = None
        cur = start
        while True:
            nxt = None
            for cand in adjacency[cur]:
                if cand is not prev and cand != prev and cand not in visited:
                    nxt = cand
                    break
            if nxt is None:
                # Loop closes if start is adjacent to the current key.
                is_closed = start in adjacency.get(cur, ()) and len(path) > 2
                return path, is_closed
            path.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt

    endpoints = [k for k, nb in adjacency.items() if len(nb) == 1]
    seeds = endpoints + [k for k in adjacency if len(adjacency[k]) >= 2]
    branch_id = 0
    for seed in seeds:
        if seed in visited:
            continue
        path, is_closed = walk(seed, False)
        if len(path) < 2:
            continue
        pts = np.array([position(k) for k in path])
        # Unwrap so consecutive vertices differ by less than pi.
        d = np.diff(pts, axis=0)
        d -= TWO_PI * np.round(d / TWO_PI)
        unwrapped = np.vstack([pts[0], pts[0] + np.cumsum(d, axis=0)])
        curves.append(JointCurve(theta=unwrapped, branch_id=branch_id, closed=is_closed))
        branch_id += 1
    return curves


def section_image(curve: JointCurve, p: DesignParams) -> SectionCurve:
    """Vertex-wise image of a joint curve in the half cross-section."""
    rho, z = section_coords(p, curve.theta[:, 0], curve.theta[:, 1])
    pts = np.column_stack([rho, z])
    diam = float(np.linalg.norm(np.ptp(pts, axis=0))) if len(pts) else 0.0
    degenerate = diam < _POINT_IMAGE_REL * p.length_sum
    return SectionCurve(points=pts, source=curve, degenerate_point=degenerate)


def trace_section_curves(p: DesignParams, n: int = 1024) -> list[SectionCurve]:
    """Convenience: trace branches and push them to the cross-section."""
    return [section_image(c, p) for c in singular_branches(p, n)]


# ---------------------------------------------------------------------------
# Node detection
# ---------------------------------------------------------------------------

def _segment_arrays(curves: list[SectionCurve], min_len: float = 0.0):
    """Flatten non-degenerate curves into segment arrays with provenance.

    Segments whose image is shorter than ``min_len`` are dropped: pieces of
    self-motion lines (whole joint-space intervals mapping to one point)
    otherwise pile thousands of spurious zero-length segments onto a single
    location.
    """
    segs_a, segs_b, joints_a, joints_b, curve_ix, seg_ix = [], [], [], [], [], []
    for ci, sc in enumerate(curves):
        if sc.degenerate_point or len(sc) < 2:
            continue
        pts = sc.points
        th = sc.source.theta
        a, b = pts[:-1], pts[1:]
        keep = np.linalg.norm(b - a, axis=1) > min_len
        if not np.any(keep):
            continue
        segs_a.append(a[keep])
        segs_b.append(b[keep])
        joints_a.append(th[:-1][keep])
        joints_b.append(th[1:][keep])
        curve_ix.append(np.full(int(keep.sum()), ci))
        seg_ix.append(np.flatnonzero(keep))
    if not segs_a:
        z = np.zeros((0, 2))
        return z, z, z, z, np.zeros(0, int), np.zeros(0, int)
    return (np.vstack(segs_a), np.vstack(segs_b), np.vstack(joints_a),
            np.vstack(joints_b), np.concatenate(curve_ix), np.concatenate(seg_ix))


def _candidate_pairs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Index pairs of segments whose neighbourhoods overlap."""
    if len(a) == 0:
        return np.zeros((0, 2), dtype=int)
    mid = 0.5 * (a + b)
    lengths = np.linalg.norm(b - a, axis=1)
    radius = float(np.max(lengths)) * 1.01 if len(lengths) else 0.0
    tree = cKDTree(mid)
    pairs = tree.query_pairs(r=max(radius, 1e-12), output_type="ndarray")
    return pairs


def _intersect_pairs(a0, a1, b0, b1):
    """Vectorized segment intersection; returns (mask, t, u)."""
    r = a1 - a0
    s = b1 - b0
    qp = b0 - a0
    denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    rnorm = np.linalg.norm(r, axis=1)
    snorm = np.linalg.norm(s, axis=1)
    ok = np.abs(denom) > 1e-12 * rnorm * snorm
    denom_safe = np.where(ok, denom, 1.0)
    t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom_safe
    u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / denom_safe
    eps = 1e-9
    hit = ok & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
    return hit, t, u


def _project_to_curve(p: DesignParams, theta: np.ndarray, scale: float) -> np.ndarray:
    """Pull a joint-space point back onto S = 0 along the gradient."""
    th = theta.copy()
    h = 1e-6
    for _ in range(3):
        s0 = reduced_singularity(p, th[0], th[1])
        g = np.array([
            (reduced_singularity(p, th[0] + h, th[1]) - reduced_singularity(p, th[0] - h, th[1])) / (2 * h),
            (reduced_singularity(p, th[0], th[1] + h) - reduced_singularity(p, th[0], th[1] - h)) / (2 * h),
        ])
        g2 = float(g @ g)
        if g2 < 1e-12 * scale * scale:
            break
        th = th - s0 * g / g2
    return th


def _local_polyline(p: DesignParams, j0: np.ndarray, j1: np.ndarray,
                    lo: float, hi: float, samples: int, scale: float):
    """Refined curve points for parameters in [lo, hi] of one segment."""
    ts = np.linspace(lo, hi, samples)
    joints = np.array([_project_to_curve(p, j0 + t * (j1 - j0), scale) for t in ts])
    rho, z = section_coords(p, joints[:, 0], joints[:, 1])
    return ts, joints, np.column_stack([rho, z])


def _refine_crossing(p: DesignParams, jA0, jA1, tA, jB0, jB1, tB, scale):
    """Sharpen one polyline crossing by local subdivision on both branches.

    Returns (image point, joint A, joint B, residual, dirA, dirB) or None if
    the crossing dissolves (tangential contact).
    """
    loA, hiA = 0.0, 1.0
    loB, hiB = 0.0, 1.0
    best = None
    for _ in range(3):
        tsA, jsA, imA = _local_polyline(p, jA0, jA1, loA, hiA, 9, scale)
        tsB, jsB, imB = _local_polyline(p, jB0, jB1, loB, hiB, 9, scale)
        nA = len(tsA) - 1
        ia, ib = np.meshgrid(np.arange(nA), np.arange(nA), indexing="ij")
        ia, ib = ia.ravel(), ib.ravel()
        hit, t, u = _intersect_pairs(imA[ia], imA[ia + 1], imB[ib], imB[ib + 1])
        if not np.any(hit):
            return best
        k = int(np.argmax(hit))
        ka, kb = int(ia[k]), int(ib[k])
        tk, uk = float(np.clip(t[k], 0, 1)), float(np.clip(u[k], 0, 1))
        jA = jsA[ka] + tk * (jsA[ka + 1] - jsA[ka])
        jB = jsB[kb] + uk * (jsB[kb + 1] - jsB[kb])
        imA_pt = imA[ka] + tk * (imA[ka + 1] - imA[ka])
        imB_pt = imB[kb] + uk * (imB[kb + 1] - imB[kb])
        dirA = imA[ka + 1] - imA[ka]
        dirB = imB[kb + 1] - imB[kb]
        jA = _project_to_curve(p, jA, scale)
        jB = _project_to_curve(p, jB, scale)
        rhoA, zA = section_coords(p, jA[0], jA[1])
        rhoB, zB = section_coords(p, jB[0], jB[1])
        residual = math.hypot(float(rhoA - rhoB), float(zA - zB))
        best = (0.5 * (imA_pt + imB_pt), jA, jB, residual, dirA, dirB)
        loA, hiA = tsA[ka], tsA[ka + 1]
        loB, hiB = tsB[kb], tsB[kb + 1]
    return best


def _torus_dist(a: np.ndarray, b: np.ndarray) -> float:
    d = np.abs(a - b)
    d = np.minimum(d % TWO_PI, TWO_PI - (d % TWO_PI))
    return float(np.max(d))


def find_nodes(p: DesignParams, curves: list[SectionCurve],
               tol: float | None = None) -> list[NodePoint]:
    """Transversal self- and pairwise intersections of the section curves.

    Candidates come from polyline segment crossings, are refined by local
    subdivision, and must pass: distinct joint-space preimages, a transversal
    crossing angle, an off-axis location, and the coincidence witness (two
    solution groups of multiplicity >= 2, or a self-motion circle).
    Confirmed nodes are deduplicated within ``tol``.
    """
    scale = p.length_sum
    if tol is None:
        tol = 1e-4 * 2.0 * scale
    s_scale = singularity_scale(p)
    a0, a1, j0, j1, curve_ix, seg_ix = _segment_arrays(curves, min_len=1e-8 * scale)
    if len(a0) == 0:
        return []
    pairs = _candidate_pairs(a0, a1)
    if len(pairs) == 0:
        return []
    ia, ib = pairs[:, 0], pairs[:, 1]
    same_curve = curve_ix[ia] == curve_ix[ib]
    gap = np.abs(seg_ix[ia] - seg_ix[ib])
    adjacent = same_curve & (gap <= 1)
    keep = ~adjacent
    ia, ib = ia[keep], ib[keep]
    if len(ia) == 0:
        return []
    hit, t, u = _intersect_pairs(a0[ia], a1[ia], a0[ib], a1[ib])

    # Pre-filter: doubly covered branch images produce floods of near-parallel
    # overlap hits; drop shallow-angle pairs before the expensive refinement,
    # and refine only one raw candidate per location cluster.
    dA = a1[ia] - a0[ia]
    dB = a1[ib] - a0[ib]
    cross = np.abs(dA[:, 0] * dB[:, 1] - dA[:, 1] * dB[:, 0])
    norms = np.linalg.norm(dA, axis=1) * np.linalg.norm(dB, axis=1)
    hit &= cross > _TRANSVERSAL_MIN_SIN * np.where(norms > 0, norms, 1.0)

    # Group the raw hits by location; within each cluster, try candidates
    # until one survives refinement (a hit right at a segment corner can
    # defeat the local subdivision, but a duplicate pair at the same spot
    # then provides the crossing).
    raw_pts = a0[ia] + t[:, None] * dA
    order = np.flatnonzero(hit)
    order = order[np.lexsort((raw_pts[order, 1], raw_pts[order, 0]))]
    clusters: list[list[int]] = []
    reps: list[np.ndarray] = []
    for k in order:
        pt = raw_pts[k]
        for ci, rep in enumerate(reps):
            if np.hypot(*(pt - rep)) <= 0.5 * tol:
                clusters[ci].append(int(k))
                break
        else:
            reps.append(pt)
            clusters.append([int(k)])

    def corner_score(k: int) -> float:
        tk, uk = float(t[k]), float(u[k])
        return min(tk, 1.0 - tk) * min(uk, 1.0 - uk)

    sm_points = self_motion_points(p)
    candidates: list[NodePoint] = []
    for members in clusters:
        members.sort(key=corner_score, reverse=True)
        for k in members[:8]:
            iA, iB = int(ia[k]), int(ib[k])
            refined = _refine_crossing(p, j0[iA], j1[iA], float(t[k]),
                                       j0[iB], j1[iB], float(u[k]), s_scale)
            if refined is None:
                continue
            loc, jA, jB, residual, dirA, dirB = refined
            rho, z = float(loc[0]), float(loc[1])
            if rho <= tol:
                break                      # axis intersection, not a node
            if _torus_dist(jA, jB) <= _PREIMAGE_MIN_SEP:
                continue                   # same singular configuration
            na, nb = np.linalg.norm(dirA), np.linalg.norm(dirB)
            if na == 0.0 or nb == 0.0:
                continue
            sin_angle = abs(dirA[0] * dirB[1] - dirA[1] * dirB[0]) / (na * nb)
            if sin_angle < _TRANSVERSAL_MIN_SIN:
                continue                   # tangential contact
            if residual > 10.0 * tol:
                continue
            groups = coincidence_groups(p, rho * rho, z)
            on_self_motion = any(math.hypot(rho - q[0], z - q[1]) <= max(tol, 1e-6 * scale)
                                 for q in sm_points)
            if len(groups) < 2 and not on_self_motion:
                continue
            candidates.append(NodePoint(
                location=SectionPoint(max(rho, 0.0), z),
                preimages=np.vstack([jA, jB]),
                residual=residual,
                groups=groups,
                self_motion=on_self_motion,
            ))
            break

    # Deduplicate by location, deterministically.
    candidates.sort(key=lambda nd: (nd.location.rho, nd.location.z))
    nodes: list[NodePoint] = []
    for cand in candidates:
        if any(math.hypot(cand.location.rho - nd.location.rho,
                          cand.location.z - nd.location.z) <= tol for nd in nodes):
            continue
        nodes.append(cand)

    # Warn when surviving nodes are barely resolved by the trace step.
    if len(nodes) >= 2:
        steps = [float(np.median(np.linalg.norm(np.diff(c.source.theta, axis=0), axis=1)))
                 for c in curves if not c.degenerate_point and len(c) > 2]
        if steps:
            step_img = float(np.median(steps)) * scale
            for i in range(len(nodes)):
                for j in range(i + 1, len(nodes)):
                    d = math.hypot(nodes[i].location.rho - nodes[j].location.rho,
                                   nodes[i].location.z - nodes[j].location.z)
                    if d < 3.0 * step_img:
                        warnings.warn(
                            f"node candidates {d:.3e} apart, below 3 trace steps",
                            ResolutionWarning, stacklevel=2)
    return nodes


# ---------------------------------------------------------------------------
# Cusp detection
# ---------------------------------------------------------------------------

def find_cusps(p: DesignParams, curves: list[SectionCurve],
               tol: float | None = None) -> list[CuspPoint]:
    """Triple-coincidence points on the section curves.

    Screens for image-velocity minima with tangent reversal (the signature a
    cusp would leave on a polyline) and keeps only candidates whose inverse
    kinematics shows a group of exactly three coincident solutions.  The
    families treated here cannot produce one: fold points of doubly covered
    images reverse tangent too, but carry groups of two or four and are
    discarded.
    """
    scale = p.length_sum
    if tol is None:
        tol = 0.1 * p.d4
    cusps: list[CuspPoint] = []
    for sc in curves:
        if sc.degenerate_point or len(sc) < 5:
            continue
        pts = sc.points
        th = sc.source.theta
        seg = np.diff(pts, axis=0)
        dth = np.linalg.norm(np.diff(th, axis=0), axis=1)
        dth = np.where(dth > 0, dth, 1.0)
        speed = np.linalg.norm(seg, axis=1) / dth
        for k in range(1, len(speed)):
            if speed[k - 1] > tol and speed[k] > tol:
                continue
            dot = float(seg[k - 1] @ seg[k])
            if dot >= 0.0:
                continue                   # no tangent reversal
            rho, z = pts[k]
            if rho < 0.0:
                continue
            groups = coincidence_groups(p, float(rho * rho), float(z))
            if any(g.size == 3 for g in groups):
                cusps.append(CuspPoint(
                    location=SectionPoint(float(max(rho, 0.0)), float(z)),
                    preimage=(float(th[k, 0]), float(th[k, 1])),
                    groups=groups,
                ))
    # Deduplicate.
    out: list[CuspPoint] = []
    for c in sorted(cusps, key=lambda c: (c.location.rho, c.location.z)):
        if not any(math.hypot(c.location.rho - o.location.rho,
                              c.location.z - o.location.z) < 1e-6 * scale for o in out):
            out.append(c)
    return out


# ---------------------------------------------------------------------------
# Crossing probes (parity checks)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrossingProbe:
    """One transversal probe across a section curve."""

    point: SectionPoint
    delta: int                  # iks_count(after) - iks_count(before)
    branch_multiplicity: int    # coincident groups at the curve point


def sample_crossings(p: DesignParams, curves: list[SectionCurve],
                     count: int, offset: float | None = None,
                     seed: int = 0,
                     nodes: list[NodePoint] | None = None) -> list[CrossingProbe]:
    """Probe the solution-count jump across random transversal crossings.

    Each probe steps ``offset`` to both sides of a random curve point along
    the local normal; points too close to another curve, a node, or the
    symmetry axis are rejected so the probe crosses exactly one image curve.
    The jump is 2 per singular branch covering the curve there.
    """
    rng = np.random.default_rng(seed)
    scale = p.length_sum
    if offset is None:
        offset = 5e-3 * scale
    usable = [c for c in curves if not c.degenerate_point and len(c) >= 4]
    if not usable:
        return []
    cloud = np.vstack([c.points for c in usable])
    tree = cKDTree(cloud)
    if nodes is None:
        nodes = find_nodes(p, curves)
    node_xy = np.array([[nd.location.rho, nd.location.z] for nd in nodes]) if nodes else None

    a0, a1, _, _, curve_ix, seg_ix = _segment_arrays(curves, min_len=1e-8 * scale)
    lengths = np.linalg.norm(a1 - a0, axis=1)
    wts = lengths / lengths.sum()

    def crossings_through(pa: np.ndarray, pb: np.ndarray) -> int:
        """Polyline crossings of segment pa-pb, shared vertices counted once."""
        r = pb - pa
        s = a1 - a0
        qp = a0 - pa
        denom = r[0] * s[:, 1] - r[1] * s[:, 0]
        ok = np.abs(denom) > 1e-14
        denom = np.where(ok, denom, 1.0)
        t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
        u = (qp[:, 0] * r[1] - qp[:, 1] * r[0]) / denom
        hit = ok & (t >= 0.0) & (t <= 1.0) & (u >= -1e-12) & (u < 1.0 - 1e-12)
        idx = np.flatnonzero(hit)
        seen = set()
        n = 0
        for k in idx:
            key = (int(curve_ix[k]), int(seg_ix[k]))
            if (key[0], key[1] - 1) in seen or (key[0], key[1] + 1) in seen:
                continue
            seen.add(key)
            n += 1
        return n

    probes: list[CrossingProbe] = []
    attempts = 0
    while len(probes) < count and attempts < 300 * count:
        attempts += 1
        k = int(rng.choice(len(a0), p=wts))
        t = float(rng.uniform(0.2, 0.8))
        a, b = a0[k], a1[k]
        mid = a + t * (b - a)
        d = b - a
        nrm = np.array([-d[1], d[0]])
        nn = np.linalg.norm(nrm)
        if nn == 0:
            continue
        nrm /= nn
        p_plus = mid + offset * nrm
        p_minus = mid - offset * nrm
        if min(p_plus[0], p_minus[0]) <= offset:
            continue                        # too close to the axis
        # Both probe ends must sit about one offset from the curve set and
        # away from nodes, so exactly one image curve is being crossed.
        d_plus, _ = tree.query(p_plus)
        d_minus, _ = tree.query(p_minus)
        if min(d_plus, d_minus) < 0.6 * offset:
            continue
        if node_xy is not None and len(node_xy):
            if np.min(np.linalg.norm(node_xy - mid, axis=1)) < 5.0 * offset:
                continue
        groups = coincidence_groups(p, float(mid[0] ** 2), float(mid[1]))
        mult = len(groups)
        if mult == 0:
            continue
        # The probe must pierce exactly the branch sheets the witness sees:
        # near tangencies or folds an extra sheet sneaks into the span.
        if crossings_through(p_minus, p_plus) != mult:
            continue
        c_plus = int(count_grid(p, np.array(p_plus[0] ** 2), np.array(p_plus[1]))[()])
        c_minus = int(count_grid(p, np.array(p_minus[0] ** 2), np.array(p_minus[1]))[()])
        probes.append(CrossingProbe(
            point=SectionPoint(float(mid[0]), float(mid[1])),
            delta=c_plus - c_minus,
            branch_multiplicity=mult,
        ))
    return probes
