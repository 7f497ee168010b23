"""
Inverse kinematics through the tan-half-angle quartic.

For a query point with cross-section coordinates (rho, z) the distance and
height equations

    rho^2 + z^2 = d2^2 + L^2 + r3^2 + Y^2 + 2*d2*(c2*L + s2*r3)
    z           = c2*r3 - s2*L

are linear in (cos theta2, sin theta2).  With d2 > 0 they can be solved for
(c2, s2) as functions of theta3; imposing c2^2 + s2^2 = 1 and substituting
t = tan(theta3/2) yields the quartic

    P(t) = a*t^4 + b*t^3 + c*t^2 + d*t + e.

Writing K = rho^2 + z^2 - (d2^2 + d3^2 + d4^2 + r2^2 + r3^2), A = 2*d3*d4,
B = 2*r2*d4, the underlying trigonometric form is

    F(theta3) = (K - A*c3 - B*s3)^2 + 4*d2^2*(z^2 - L^2 - r3^2)

and P is F cleared of the (1 + t^2)^2 denominator.  Every theta3 root of F
corresponds to exactly one full solution (theta2 is recovered uniquely from
the linear system, theta1 from the base rotation), so the number of inverse
kinematic solutions equals the number of real roots of P, with theta3 = pi
appearing as a degree drop (root at infinity).

With d2 = 0 the elimination degenerates: theta3 then satisfies the linear
trigonometric equation A*c3 + B*s3 + C = 0 with
C = d3^2 + d4^2 + r2^2 + r3^2 - rho^2 - z^2, and each theta3 root yields up
to two solutions (the two signs of the rotating-frame coordinate X).

Solutions come in coincident pairs on the singularity curves; root clusters
are merged within a relative tolerance and reported with multiplicities so
that node points (two double roots) and would-be cusps (triple roots) can be
recognized downstream.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .model import (
    CartesianPoint,
    DesignParams,
    JointConfig,
    SectionPoint,
    fk,
    frame_coords,
    normalize_angle,
)

#: Roots closer than this (relative to 1 + |t|) are merged into one cluster.
ROOT_CLUSTER_TOL = 1e-7
#: |leading coefficient| below this fraction of max|coeff| means degree drop.
DEGENERATE_LEADING_TOL = 1e-10
#: Default relative residual for accepting an inverse kinematic solution.
DEFAULT_IK_TOL = 1e-9
#: theta3 samples used by the counting routines (shared by scalar and grid
#: paths so that field cells and point queries agree exactly).
COUNT_SAMPLES = 1024


class DegenerateElimination(ValueError):
    """Raised when the d2 > 0 and d2 = 0 construction paths are mixed up."""


@dataclass(frozen=True)
class Quartic:
    """Coefficients of P(t) = a t^4 + b t^3 + c t^2 + d t + e, t = tan(theta3/2)."""

    a: float
    b: float
    c: float
    d: float
    e: float

    def coeffs(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c, self.d, self.e])

    def __call__(self, t):
        return (((self.a * t + self.b) * t + self.c) * t + self.d) * t + self.e

    @property
    def max_abs_coeff(self) -> float:
        return float(np.max(np.abs(self.coeffs())))

    def residual_at(self, t: float) -> float:
        """|P(t)| relative to max|coeff|, evaluated stably for large |t|.

        For |t| > 1 the reversed polynomial is evaluated at 1/t, which keeps
        the roundoff of the t^4 term from swamping the residual; the result
        equals |P(t)| / (max|coeff| * max(1, |t|)^4).
        """
        scale = self.max_abs_coeff
        if scale == 0.0:
            return 0.0
        if math.isinf(t):
            return abs(self.a) / scale
        if abs(t) <= 1.0:
            return abs(self(t)) / scale
        u = 1.0 / t
        rev = (((self.e * u + self.d) * u + self.c) * u + self.b) * u + self.a
        return abs(rev) / scale


@dataclass(frozen=True)
class Root:
    """One clustered real root; t = inf marks theta3 = pi (root at infinity)."""

    t: float
    multiplicity: int

    @property
    def at_infinity(self) -> bool:
        return math.isinf(self.t)

    @property
    def theta3(self) -> float:
        return math.pi if self.at_infinity else 2.0 * math.atan(self.t)


@dataclass(frozen=True)
class RootSet:
    """Clustered real roots of one theta3 elimination.

    ``all_theta3`` flags the fully degenerate trigonometric equation
    (A = B = C = 0) whose solution set is the whole circle.
    """

    roots: tuple[Root, ...]
    all_theta3: bool = False

    def __len__(self) -> int:
        return len(self.roots)

    def __iter__(self):
        return iter(self.roots)

    @property
    def total_multiplicity(self) -> int:
        return sum(r.multiplicity for r in self.roots)

    def theta3_values(self) -> list[float]:
        return [r.theta3 for r in self.roots]


@dataclass(frozen=True)
class IkSolution:
    config: JointConfig
    residual: float
    multiplicity: int = 1


@dataclass
class IkSolutionSet:
    """Distinct inverse kinematic solutions for one Cartesian query."""

    solutions: list[IkSolution] = field(default_factory=list)
    degenerate: bool = False     # merged roots or a self-motion continuum

    def __len__(self) -> int:
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)

    def configs(self) -> list[JointConfig]:
        return [s.config for s in self.solutions]


def _trig_terms(p: DesignParams, rho2: float, z: float):
    K = rho2 + z * z - (p.d2 ** 2 + p.d3 ** 2 + p.d4 ** 2 + p.r2 ** 2 + p.r3 ** 2)
    A = 2.0 * p.d3 * p.d4
    B = 2.0 * p.r2 * p.d4
    return K, A, B


def quartic_at(p: DesignParams, rho2: float, z: float) -> Quartic:
    """Quartic of the general (d2 > 0) elimination at the section point."""
    if p.d2 == 0.0:
        raise DegenerateElimination(
            "d2 = 0 collapses the quartic; use theta3_candidates instead"
        )
    if rho2 < 0.0:
        raise ValueError(f"rho^2 must be nonnegative, got {rho2!r}")
    K, A, B = _trig_terms(p, rho2, z)
    q2 = K + A
    q0 = K - A
    # Q(t)^2 + 4 d2^2 (z^2 - r3^2) (1+t^2)^2 - 4 d2^2 ((d3+d4) + (d3-d4) t^2)^2
    g = 4.0 * p.d2 ** 2 * (z * z - p.r3 ** 2)
    m_hi = p.d3 - p.d4
    m_lo = p.d3 + p.d4
    four_d2sq = 4.0 * p.d2 ** 2
    a = q2 * q2 + g - four_d2sq * m_hi * m_hi
    b = -4.0 * B * q2
    c = 4.0 * B * B + 2.0 * q2 * q0 + 2.0 * g - 2.0 * four_d2sq * m_lo * m_hi
    d = -4.0 * B * q0
    e = q0 * q0 + g - four_d2sq * m_lo * m_lo
    return Quartic(a, b, c, d, e)


def trig_f(p: DesignParams, rho2, z, theta3):
    """F(theta3) whose zeros are the theta3 of solutions (d2 > 0); array friendly."""
    K, A, B = _trig_terms(p, float(rho2), float(z))
    c3, s3 = np.cos(theta3), np.sin(theta3)
    L = p.d3 + p.d4 * c3
    R = K - A * c3 - B * s3
    return R * R + 4.0 * p.d2 ** 2 * (z * z - L * L - p.r3 ** 2)


def _cluster_roots(values: list[float], tol: float = ROOT_CLUSTER_TOL) -> list[Root]:
    """Merge sorted finite roots within tol*(1 + |t|); multiplicities add up."""
    if not values:
        return []
    values = sorted(values)
    clusters: list[list[float]] = [[values[0]]]
    for v in values[1:]:
        ref = clusters[-1][-1]
        if abs(v - ref) <= tol * (1.0 + abs(ref)):
            clusters[-1].append(v)
        else:
            clusters.append([v])
    return [Root(sum(c) / len(c), len(c)) for c in clusters]


def solve_quartic(q: Quartic) -> RootSet:
    """Real roots of the quartic with multiplicity clustering.

    Degree drops (|leading coeffs| below DEGENERATE_LEADING_TOL relative to
    the largest coefficient) become a root at infinity (theta3 = pi) whose
    multiplicity is the number of dropped degrees.
    """
    coeffs = q.coeffs()
    scale = q.max_abs_coeff
    if scale == 0.0:
        # Identically zero polynomial: every theta3 solves it.
        return RootSet(roots=(), all_theta3=True)
    lead_tol = DEGENERATE_LEADING_TOL * scale
    degree = 4
    while degree > 0 and abs(coeffs[4 - degree]) <= lead_tol:
        degree -= 1
    inf_mult = 4 - degree
    finite: list[float] = []
    if degree > 0:
        poly = coeffs[4 - degree:] / scale
        roots = np.roots(poly)
        for r in roots:
            if abs(r.imag) <= 1e-6 * (1.0 + abs(r.real)):
                t = float(r.real)
                # One Newton polish on the full quartic.
                dp = ((4 * q.a * t + 3 * q.b) * t + 2 * q.c) * t + q.d
                if dp != 0.0:
                    t_new = t - q(t) / dp
                    if abs(q(t_new)) < abs(q(t)):
                        t = t_new
                finite.append(t)
    clusters = _cluster_roots(finite)
    if inf_mult > 0:
        clusters.append(Root(math.inf, inf_mult))
    return RootSet(roots=tuple(clusters))


def theta3_candidates(p: DesignParams, rho2: float, z: float) -> RootSet:
    """theta3 roots of the reduced (d2 = 0) elimination, as tan-half values.

    Solves A*cos(theta3) + B*sin(theta3) + C = 0 with A = 2 d3 d4,
    B = 2 r2 d4, C = d3^2 + d4^2 + r2^2 + r3^2 - rho^2 - z^2.  Returns zero,
    one (tangency, multiplicity 2) or two roots; the fully degenerate
    A = B = 0 equation yields the all-theta3 marker when C = 0.
    """
    if p.d2 != 0.0:
        raise DegenerateElimination(
            "theta3_candidates is the d2 = 0 reduction; use quartic_at for d2 > 0"
        )
    if rho2 < 0.0:
        raise ValueError(f"rho^2 must be nonnegative, got {rho2!r}")
    K, A, B = _trig_terms(p, rho2, z)
    C = -K
    g = math.hypot(A, B)
    scale = max(g, abs(C), 1e-300)
    if g <= 1e-14 * scale:
        if abs(C) <= 1e-12 * scale:
            return RootSet(roots=(), all_theta3=True)
        return RootSet(roots=())
    u = -C / g
    if abs(u) > 1.0 + 1e-12:
        return RootSet(roots=())
    psi = math.atan2(B, A)
    if abs(u) >= 1.0:
        theta = normalize_angle(psi if u > 0 else psi + math.pi)
        t = math.inf if abs(theta - math.pi) < 1e-15 else math.tan(theta / 2.0)
        return RootSet(roots=(Root(t, 2),))
    delta = math.acos(u)
    thetas = [normalize_angle(psi + delta), normalize_angle(psi - delta)]
    roots: list[float] = []
    has_inf = False
    for th in thetas:
        if math.pi - abs(th) < 1e-12:
            has_inf = True
        else:
            roots.append(math.tan(th / 2.0))
    clusters = _cluster_roots(roots)
    if has_inf:
        clusters.append(Root(math.inf, 1))
    return RootSet(roots=tuple(clusters))


def _theta2_general(p: DesignParams, rho2: float, z: float, theta3: float):
    """Unique (c2, s2) of the d2 > 0 linear system; None at a self-motion."""
    c3 = math.cos(theta3)
    L = p.d3 + p.d4 * c3
    denom = L * L + p.r3 ** 2
    if denom <= 1e-14 * p.d4 ** 2:
        return None
    K, A, B = _trig_terms(p, rho2, z)
    R = K - A * c3 - B * math.sin(theta3)
    c2 = (R * L + 2.0 * p.d2 * p.r3 * z) / (2.0 * p.d2 * denom)
    s2 = (R * p.r3 - 2.0 * p.d2 * L * z) / (2.0 * p.d2 * denom)
    return c2, s2


def _theta2_reduced(p: DesignParams, X: float, z: float, theta3: float):
    """(c2, s2) with d2 = 0 for a chosen sign of X; None at a self-motion."""
    c3 = math.cos(theta3)
    L = p.d3 + p.d4 * c3
    denom = L * L + p.r3 ** 2
    if denom <= 1e-14 * p.d4 ** 2:
        return None
    c2 = (X * L + p.r3 * z) / denom
    s2 = (X * p.r3 - L * z) / denom
    return c2, s2


def _polish_theta23(p: DesignParams, rho2: float, z: float,
                    theta2: float, theta3: float, iters: int = 6):
    """Damped Newton on (rho^2, z) over (theta2, theta3)."""
    t2, t3 = theta2, theta3
    target = np.array([rho2, z])
    scale = max(rho2, p.length_sum ** 2)
    for _ in range(iters):
        c2, s2 = math.cos(t2), math.sin(t2)
        c3, s3 = math.cos(t3), math.sin(t3)
        L = p.d3 + p.d4 * c3
        X = p.d2 + c2 * L + s2 * p.r3
        Y = p.r2 + p.d4 * s3
        Z = c2 * p.r3 - s2 * L
        res = np.array([X * X + Y * Y - target[0], Z - target[1]])
        if abs(res[0]) < 1e-14 * scale and abs(res[1]) < 1e-14 * math.sqrt(scale):
            break
        j11 = 2.0 * X * Z
        j12 = 2.0 * (-X * c2 * p.d4 * s3 + Y * p.d4 * c3)
        j21 = -(X - p.d2)
        j22 = s2 * p.d4 * s3
        det = j11 * j22 - j12 * j21
        if abs(det) < 1e-300:
            break
        dt2 = (res[0] * j22 - res[1] * j12) / det
        dt3 = (res[1] * j11 - res[0] * j21) / det
        step = math.hypot(dt2, dt3)
        if step > 0.3:
            dt2 *= 0.3 / step
            dt3 *= 0.3 / step
        t2 -= dt2
        t3 -= dt3
    return t2, t3


def _theta23_candidates(p: DesignParams, rho2: float, z: float):
    """All (theta2, theta3) candidate pairs plus degeneracy evidence.

    Returns (list of (theta2, theta3), degenerate) where degenerate is True
    when clustered roots of multiplicity > 1 or a self-motion were seen.
    """
    cands: list[tuple[float, float]] = []
    degenerate = False
    if p.d2 > 0.0:
        rs = solve_quartic(quartic_at(p, rho2, z))
        if rs.all_theta3:
            degenerate = True
            thetas = [0.0, 0.5 * math.pi, math.pi, -0.5 * math.pi]
        else:
            thetas = rs.theta3_values()
            degenerate = degenerate or any(r.multiplicity > 1 for r in rs)
        for th in thetas:
            sol = _theta2_general(p, rho2, z, th)
            if sol is None:
                # Self-motion circle: theta2 free; take one representative.
                degenerate = True
                cands.append((0.0, th))
                continue
            c2, s2 = sol
            cands.append((math.atan2(s2, c2), th))
    else:
        rs = theta3_candidates(p, rho2, z)
        if rs.all_theta3:
            degenerate = True
            thetas = [(0.0, 1), (math.pi, 1)]
        else:
            thetas = [(r.theta3, r.multiplicity) for r in rs]
            degenerate = degenerate or any(r.multiplicity > 1 for r in rs)
        for th, _mult in thetas:
            c3 = math.cos(th)
            L = p.d3 + p.d4 * c3
            Y = p.r2 + p.d4 * math.sin(th)
            X2 = rho2 - Y * Y
            if X2 < -1e-9 * max(rho2, 1.0):
                continue
            X = math.sqrt(max(X2, 0.0))
            signs = (X, -X) if X > 1e-12 * math.sqrt(max(rho2, 1.0)) else (X,)
            if len(signs) == 1:
                degenerate = True
            for Xs in signs:
                sol = _theta2_reduced(p, Xs, z, th)
                if sol is None:
                    degenerate = True
                    cands.append((0.0, th))
                    continue
                c2, s2 = sol
                norm = math.hypot(c2, s2)
                if norm < 1e-9 or abs(norm - 1.0) > 1e-3:
                    # Inconsistent: theta3 root does not give a real theta2.
                    if abs(norm - 1.0) > 0.1:
                        continue
                cands.append((math.atan2(s2, c2), th))
    return cands, degenerate


def ik(p: DesignParams, point: CartesianPoint, tol: float = DEFAULT_IK_TOL) -> IkSolutionSet:
    """All joint configurations reaching ``point`` within the tolerance.

    An empty set means the point is unreachable (a normal outcome, not an
    error).  Solutions that merge within the clustering tolerance are
    deduplicated and flagged degenerate.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    rho = point.rho
    rho2 = rho * rho
    z = point.z
    cands, degenerate = _theta23_candidates(p, rho2, z)

    accepted: list[tuple[float, float, float, float]] = []
    pnorm = math.sqrt(rho2 + z * z)
    limit = tol * (1.0 + pnorm)
    for t2, t3 in cands:
        t2p, t3p = _polish_theta23(p, rho2, z, t2, t3)
        X, Y, Z = frame_coords(p, t2p, t3p)
        # theta1 aligns the rotating frame with the query azimuth.
        t1 = normalize_angle(math.atan2(point.y, point.x) - math.atan2(Y, X))
        c1, s1 = math.cos(t1), math.sin(t1)
        err = math.sqrt((c1 * X - s1 * Y - point.x) ** 2 +
                        (s1 * X + c1 * Y - point.y) ** 2 +
                        (Z - point.z) ** 2)
        if err <= limit:
            accepted.append((t1, t2p, t3p, err))

    # Deduplicate configurations that collapsed onto each other.
    merged: list[list] = []
    for t1, t2, t3, err in accepted:
        placed = False
        for m in merged:
            d = max(abs(normalize_angle(t1 - m[0])),
                    abs(normalize_angle(t2 - m[1])),
                    abs(normalize_angle(t3 - m[2])))
            if d <= 10.0 * ROOT_CLUSTER_TOL * math.pi:
                m[3] = min(m[3], err)
                m[4] += 1
                placed = True
                break
        if not placed:
            merged.append([t1, t2, t3, err, 1])
    if any(m[4] > 1 for m in merged):
        degenerate = True

    sols = [IkSolution(JointConfig(m[0], m[1], m[2]), m[3], m[4]) for m in merged]
    sols.sort(key=lambda s: (s.config.theta3, s.config.theta2, s.config.theta1))
    return IkSolutionSet(solutions=sols, degenerate=degenerate)


# ---------------------------------------------------------------------------
# Solution counting (scalar and raster paths share the same arithmetic)
# ---------------------------------------------------------------------------

def _count_general_closed(p: DesignParams, rho2: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Closed-form count for d2 > 0, r2 = 0 (covers families D, E, I, J).

    With r2 = 0, F is a quadratic in u = cos(theta3); each root strictly
    inside (-1, 1) contributes the two theta3 values +-arccos(u).
    """
    rho2 = np.asarray(rho2, dtype=float)
    z = np.asarray(z, dtype=float)
    shape = np.broadcast_shapes(rho2.shape, z.shape)
    rho2 = np.broadcast_to(rho2, shape)
    z = np.broadcast_to(z, shape)
    A = 2.0 * p.d3 * p.d4
    psum = p.d2 ** 2 + p.d3 ** 2 + p.d4 ** 2 + p.r3 ** 2
    K = rho2 + z * z - psum
    d2sq4 = 4.0 * p.d2 ** 2
    alpha = A * A - d2sq4 * p.d4 ** 2
    beta = -(2.0 * A * K + 2.0 * d2sq4 * p.d3 * p.d4)
    gamma = K * K + d2sq4 * (z * z - p.d3 ** 2 - p.r3 ** 2)

    out = np.zeros(shape, dtype=np.int32)
    alpha_scale = 4.0 * p.d4 ** 2 * (p.d2 ** 2 + p.d3 ** 2)
    if abs(alpha) <= 1e-12 * alpha_scale:
        # d3 = d2: F is linear in u (exactly on a transition surface).
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(beta != 0.0, -gamma / np.where(beta != 0.0, beta, 1.0), 2.0)
        out += np.where(np.abs(u) < 1.0, 2, 0).astype(np.int32)
        return out
    disc = beta * beta - 4.0 * alpha * gamma
    real = disc > 0.0
    sq = np.sqrt(np.where(real, disc, 0.0))
    sgn = np.where(beta >= 0.0, 1.0, -1.0)
    qq = -0.5 * (beta + sgn * sq)
    with np.errstate(divide="ignore", invalid="ignore"):
        u1 = qq / alpha
        u2 = np.where(qq != 0.0, gamma / np.where(qq != 0.0, qq, 1.0), 0.0)
    out += np.where(real & (np.abs(u1) < 1.0), 2, 0).astype(np.int32)
    out += np.where(real & (np.abs(u2) < 1.0), 2, 0).astype(np.int32)
    return out


def _count_general_sampled(p: DesignParams, rho2: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Sign-change count of F over a wrapped theta3 grid (d2 > 0, r2 > 0).

    Only needed for valid parameter sets outside the ten-case tree; counts
    are even automatically because the grid wraps around.
    """
    theta3 = -math.pi + (np.arange(COUNT_SAMPLES) + 0.5) * (2.0 * math.pi) / COUNT_SAMPLES
    c3, s3 = np.cos(theta3), np.sin(theta3)
    L = p.d3 + p.d4 * c3
    A = 2.0 * p.d3 * p.d4
    B = 2.0 * p.r2 * p.d4
    W = A * c3 + B * s3                       # theta3-dependent part of R
    M = 4.0 * p.d2 ** 2 * (L * L + p.r3 ** 2)
    psum = p.d2 ** 2 + p.d3 ** 2 + p.d4 ** 2 + p.r2 ** 2 + p.r3 ** 2

    rho2 = np.asarray(rho2, dtype=float)
    z = np.asarray(z, dtype=float)
    K = rho2 + z * z - psum
    out = np.zeros(np.broadcast_shapes(rho2.shape, z.shape), dtype=np.int32)
    flat_K = np.broadcast_to(K, out.shape).reshape(-1)
    flat_z2 = np.broadcast_to(4.0 * p.d2 ** 2 * z * z, out.shape).reshape(-1)
    flat_out = out.reshape(-1)

    chunk = max(1, int(4e6 // COUNT_SAMPLES))
    for start in range(0, flat_out.size, chunk):
        sl = slice(start, min(start + chunk, flat_out.size))
        R = flat_K[sl, None] - W[None, :]
        F = R * R + flat_z2[sl, None] - M[None, :]
        neg = F < 0.0
        changes = np.count_nonzero(neg[:, 1:] != neg[:, :-1], axis=1)
        changes += (neg[:, 0] != neg[:, -1])
        flat_out[sl] = changes
    return out


def _count_general_grid(p: DesignParams, rho2: np.ndarray, z: np.ndarray) -> np.ndarray:
    if p.r2 == 0.0:
        return _count_general_closed(p, rho2, z)
    return _count_general_sampled(p, rho2, z)


def _count_reduced_grid(p: DesignParams, rho2: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Closed-form distinct-solution count for d2 = 0."""
    rho2 = np.asarray(rho2, dtype=float)
    z = np.asarray(z, dtype=float)
    shape = np.broadcast_shapes(rho2.shape, z.shape)
    rho2 = np.broadcast_to(rho2, shape)
    z = np.broadcast_to(z, shape)
    A = 2.0 * p.d3 * p.d4
    B = 2.0 * p.r2 * p.d4
    psum = p.d3 ** 2 + p.d4 ** 2 + p.r2 ** 2 + p.r3 ** 2
    C = psum - rho2 - z * z
    g = math.hypot(A, B)
    out = np.zeros(shape, dtype=np.int32)
    if g == 0.0:
        return out
    u = np.clip(-C / g, -1.0, 1.0)
    reach = np.abs(C) <= g
    psi = math.atan2(B, A)
    delta = np.arccos(u)
    z2 = z * z
    for sign in (1.0, -1.0):
        theta = psi + sign * delta
        L = p.d3 + p.d4 * np.cos(theta)
        disc = L * L + p.r3 ** 2 - z2
        out += np.where(reach & (disc > 0.0), 2, 0).astype(np.int32)
    return out


def count_grid(p: DesignParams, rho2: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Vectorized iks_count over broadcastable arrays of (rho^2, z)."""
    if p.d2 > 0.0:
        return _count_general_grid(p, rho2, z)
    return _count_reduced_grid(p, rho2, z)


def iks_count(p: DesignParams, s: SectionPoint) -> int:
    """Number of distinct inverse kinematic solutions over the section point.

    Well defined by axisymmetry; even off the singular curves.  Uses the same
    arithmetic as the raster field, so field cells reproduce this value.
    """
    return int(count_grid(p, np.array(s.rho ** 2), np.array(s.z))[()])


# ---------------------------------------------------------------------------
# Coincidence structure (node / cusp witnesses)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoincidenceGroup:
    """A group of inverse kinematic solutions that coincide at a point."""

    theta3: float
    size: int           # number of merged solutions (>= 2)


def self_motion_points(p: DesignParams) -> list[tuple[float, float]]:
    """Section points carrying a theta2 self-motion circle.

    They exist only for r3 = 0 designs with d4 >= d3: at L(theta3) = 0 the
    wrist position X = d2, Z = 0 no longer depends on theta2, so the whole
    circle maps to (sqrt(d2^2 + Y^2), 0).  These isolated points are where
    the mirror-image singularity branches cross on the z = 0 line.
    """
    if p.r3 != 0.0 or p.d3 > p.d4:
        return []
    c3 = -p.d3 / p.d4
    s3 = math.sqrt(max(1.0 - c3 * c3, 0.0))
    pts = []
    for s in (s3, -s3):
        Y = p.r2 + p.d4 * s
        pts.append((math.sqrt(p.d2 ** 2 + Y * Y), 0.0))
    # The two signs give one point when r2 = 0 (or at the d3 = d4 tangency).
    uniq: list[tuple[float, float]] = []
    for pt in pts:
        if not any(abs(pt[0] - u[0]) < 1e-12 * (1.0 + abs(pt[0])) for u in uniq):
            uniq.append(pt)
    return uniq


def _cluster_circle(values: list[float], tol: float) -> list[list[float]]:
    """Cluster angles on the circle: gaps below tol merge, including wrap."""
    if not values:
        return []
    vals = sorted(normalize_angle(v) for v in values)
    clusters = [[vals[0]]]
    for v in vals[1:]:
        if v - clusters[-1][-1] <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    if len(clusters) > 1 and (vals[0] + 2.0 * math.pi) - clusters[-1][-1] <= tol:
        clusters[0] = clusters.pop() + clusters[0]
    return clusters


def _theta3_multiset_general(p: DesignParams, rho2: float, z: float,
                             im_tol: float) -> list[float] | None:
    """Complex-tolerant theta3 roots of the d2 > 0 quartic.

    A double root probed slightly off its curve splits either into two close
    real roots or into a conjugate pair with a small imaginary part; both
    must count as coincidence evidence, so every root with
    |Im theta3| <= im_tol contributes its real part.  Roots at infinity of
    the t-quartic map to theta3 = pi through the complex atan.  Returns None
    for the identically-zero polynomial (self-motion everywhere).
    """
    q = quartic_at(p, rho2, z)
    coeffs = q.coeffs()
    scale = q.max_abs_coeff
    if scale == 0.0:
        return None
    degree = 4
    while degree > 0 and abs(coeffs[4 - degree]) <= 1e-13 * scale:
        degree -= 1
    vals = [math.pi] * (4 - degree)
    if degree > 0:
        for r in np.roots(coeffs[4 - degree:] / scale):
            theta = 2.0 * np.arctan(complex(r))
            if abs(theta.imag) <= im_tol:
                vals.append(normalize_angle(float(theta.real)))
    return vals


def _theta3_multiset_reduced(p: DesignParams, rho2: float, z: float,
                             im_tol: float) -> list[float] | None:
    """Complex-tolerant theta3 roots of the d2 = 0 trigonometric equation."""
    K, A, B = _trig_terms(p, rho2, z)
    C = -K
    g = math.hypot(A, B)
    scale = max(g, abs(C), 1e-300)
    if g <= 1e-14 * scale:
        return None if abs(C) <= 1e-12 * scale else []
    psi = math.atan2(B, A)
    acos = cmath.acos(complex(-C / g))
    vals = []
    for theta in (psi + acos, psi - acos):
        if abs(theta.imag) <= im_tol:
            vals.append(normalize_angle(float(theta.real)))
    return vals


def coincidence_groups(p: DesignParams, rho2: float, z: float,
                       theta_tol: float = 0.03,
                       merge_tol: float = 1e-4) -> list[CoincidenceGroup]:
    """Coincident-solution groups of the inverse kinematics at (rho, z).

    A generic singular-curve point carries one group of two merged
    solutions; a node carries two distinct groups; a cusp would carry one
    group of three.  ``theta_tol`` is the clustering width in theta3 (wide
    enough to absorb the sqrt-split of a double root evaluated slightly off
    the exact point), ``merge_tol`` the relative threshold below which the
    d2 = 0 branch pair X = +-sqrt(rho^2 - Y^2) counts as merged.
    """
    scale2 = max(rho2, p.length_sum ** 2)
    groups: list[CoincidenceGroup] = []
    if p.d2 > 0.0:
        expanded = _theta3_multiset_general(p, rho2, z, theta_tol)
        if expanded is None:
            return [CoincidenceGroup(0.0, 4)]
        for cluster in _cluster_circle(expanded, theta_tol):
            if len(cluster) >= 2:
                groups.append(CoincidenceGroup(sum(cluster) / len(cluster), len(cluster)))
    else:
        expanded = _theta3_multiset_reduced(p, rho2, z, theta_tol)
        if expanded is None:
            return [CoincidenceGroup(0.0, 4)]
        for cluster in _cluster_circle(expanded, theta_tol):
            theta = sum(cluster) / len(cluster)
            m = len(cluster)
            Y = p.r2 + p.d4 * math.sin(theta)
            X2 = rho2 - Y * Y
            if X2 < -merge_tol * scale2:
                continue      # no real solutions from this root
            merged = abs(X2) <= merge_tol * scale2
            if m >= 2 and not merged:
                # Double theta3 root, both X branches alive: two pairs.
                groups.append(CoincidenceGroup(theta, 2))
                groups.append(CoincidenceGroup(theta, 2))
            elif m >= 2 and merged:
                groups.append(CoincidenceGroup(theta, 2 * m))
            elif merged:
                groups.append(CoincidenceGroup(theta, 2))
    return groups
