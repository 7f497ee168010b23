"""
Geometric model of the 3R orthogonal manipulator family.

The manipulators have three mutually orthogonal revolute axes described by
five nonnegative DH lengths (d2, d3, d4, r2, r3); the twist angles are fixed
at alpha2 = -90 deg and alpha3 = 90 deg.  d4 must be strictly positive (a
manipulator with d4 = 0 is singular in every configuration).

Position of the wrist centre, with c_i = cos(theta_i), s_i = sin(theta_i):

    L = d3 + d4*c3
    X = d2 + c2*L + s2*r3          (radial coordinate in the rotating frame)
    Y = r2 + d4*s3
    Z = c2*r3 - s2*L

    x = c1*X - s1*Y,  y = s1*X + c1*Y,  z = Z

Because theta1 only spins the arm about the base z-axis, the workspace is a
solid of revolution: everything of interest lives in the half cross-section
(rho, z) with rho = sqrt(X^2 + Y^2) = sqrt(x^2 + y^2) >= 0.

`reduced_singularity` is the determinant of the 2x2 Jacobian of (rho^2, z)
with respect to (theta2, theta3).  Its zero set, pushed forward to (rho, z),
gives the singularity curves of the cross-section; the full 3x3 position
Jacobian is rank-deficient exactly where this determinant vanishes or where
the point sits on the base axis (rho = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: The ten admissible zero-patterns of (d2, r2, d3, r3).  True means the
#: parameter is strictly positive, False means it is exactly zero.
_FAMILY_PATTERNS = {
    (False, True, True, False): "A",
    (False, False, True, False): "B",
    (False, True, False, False): "C",
    (True, False, True, False): "D",
    (True, False, False, False): "E",
    (False, True, True, True): "F",
    (False, False, True, True): "G",
    (False, True, False, True): "H",
    (True, False, True, True): "I",
    (True, False, False, True): "J",
}

FAMILY_CASES = tuple(sorted(_FAMILY_PATTERNS.values()))


class OutOfFamily(ValueError):
    """Zero-pattern of the design parameters is outside the ten-case tree."""


def normalize_angle(theta: float) -> float:
    """Map an angle to the canonical interval (-pi, pi]."""
    r = math.remainder(theta, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


@dataclass(frozen=True)
class DesignParams:
    """The five DH lengths of one manipulator design (model units)."""

    d2: float
    d3: float
    d4: float
    r2: float
    r3: float

    def __post_init__(self):
        for name in ("d2", "d3", "d4", "r2", "r3"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            if v < 0.0:
                raise ValueError(f"{name} must be nonnegative, got {v!r}")
        if self.d4 <= 0.0:
            raise ValueError("d4 must be strictly positive (d4 = 0 is always singular)")

    def scaled(self, factor: float) -> "DesignParams":
        return DesignParams(self.d2 * factor, self.d3 * factor, self.d4 * factor,
                            self.r2 * factor, self.r3 * factor)

    @property
    def length_sum(self) -> float:
        """d2 + d3 + d4 + r2 + r3, an upper bound on the reach."""
        return self.d2 + self.d3 + self.d4 + self.r2 + self.r3

    def astuple(self):
        return (self.d2, self.d3, self.d4, self.r2, self.r3)


@dataclass(frozen=True)
class JointConfig:
    """Joint angles in radians, normalized to (-pi, pi] on construction."""

    theta1: float
    theta2: float
    theta3: float

    def __post_init__(self):
        for name in ("theta1", "theta2", "theta3"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, normalize_angle(v))

    def astuple(self):
        return (self.theta1, self.theta2, self.theta3)


@dataclass(frozen=True)
class CartesianPoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.z)):
            raise ValueError("coordinates must be finite")

    def astuple(self):
        return (self.x, self.y, self.z)

    @property
    def rho(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class SectionPoint:
    """Point of the half cross-section: rho = sqrt(x^2 + y^2) >= 0."""

    rho: float
    z: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and math.isfinite(self.z)):
            raise ValueError("coordinates must be finite")
        if self.rho < 0.0:
            raise ValueError(f"rho must be nonnegative, got {self.rho!r}")

    def astuple(self):
        return (self.rho, self.z)


def family_case(p: DesignParams) -> str:
    """Classify the zero-pattern of ``p`` into one of the ten cases A..J.

    Zero detection is exact: design parameters are chosen values, not
    measurements, so no tolerance is applied.

    Raises OutOfFamily for patterns outside the tree: d2 > 0 together with
    r2 > 0 (that family is studied elsewhere and is out of scope here),
    and the always-singular degenerate pattern d2 = r2 = d3 = 0.
    """
    if p.d2 > 0.0 and p.r2 > 0.0:
        raise OutOfFamily(
            "designs with both d2 > 0 and r2 > 0 are outside the ten simplified "
            "cases handled here (they form the separately classified general family)"
        )
    key = (p.d2 > 0.0, p.r2 > 0.0, p.d3 > 0.0, p.r3 > 0.0)
    try:
        return _FAMILY_PATTERNS[key]
    except KeyError:
        raise OutOfFamily(
            f"zero-pattern {key} of (d2, r2, d3, r3) matches none of the ten cases"
        ) from None


def section_coords(p: DesignParams, theta2, theta3):
    """(rho, z) of the cross-section image; accepts scalars or arrays."""
    c2, s2 = np.cos(theta2), np.sin(theta2)
    c3, s3 = np.cos(theta3), np.sin(theta3)
    L = p.d3 + p.d4 * c3
    X = p.d2 + c2 * L + s2 * p.r3
    Y = p.r2 + p.d4 * s3
    Z = c2 * p.r3 - s2 * L
    return np.hypot(X, Y), Z


def frame_coords(p: DesignParams, theta2, theta3):
    """(X, Y, Z) in the frame that co-rotates with joint 1; array friendly."""
    c2, s2 = np.cos(theta2), np.sin(theta2)
    c3, s3 = np.cos(theta3), np.sin(theta3)
    L = p.d3 + p.d4 * c3
    X = p.d2 + c2 * L + s2 * p.r3
    Y = p.r2 + p.d4 * s3
    Z = c2 * p.r3 - s2 * L
    return X, Y, Z


def fk(p: DesignParams, q: JointConfig) -> tuple[CartesianPoint, SectionPoint]:
    """Forward kinematics: base-frame position and its cross-section image."""
    X, Y, Z = frame_coords(p, q.theta2, q.theta3)
    c1, s1 = math.cos(q.theta1), math.sin(q.theta1)
    point = CartesianPoint(float(c1 * X - s1 * Y), float(s1 * X + c1 * Y), float(Z))
    return point, SectionPoint(float(math.hypot(X, Y)), float(Z))


def jacobian(p: DesignParams, q: JointConfig) -> np.ndarray:
    """3x3 position Jacobian d(x, y, z)/d(theta1, theta2, theta3)."""
    c1, s1 = math.cos(q.theta1), math.sin(q.theta1)
    c2, s2 = math.cos(q.theta2), math.sin(q.theta2)
    c3, s3 = math.cos(q.theta3), math.sin(q.theta3)
    L = p.d3 + p.d4 * c3
    X = p.d2 + c2 * L + s2 * p.r3
    Y = p.r2 + p.d4 * s3
    Z = c2 * p.r3 - s2 * L

    # Partials in the co-rotating frame.
    dX_d2 = Z                     # -s2*L + c2*r3
    dZ_d2 = -(X - p.d2)           # -(c2*L + s2*r3)
    dX_d3 = -c2 * p.d4 * s3
    dY_d3 = p.d4 * c3
    dZ_d3 = s2 * p.d4 * s3

    x = c1 * X - s1 * Y
    y = s1 * X + c1 * Y
    return np.array([
        [-y, c1 * dX_d2, c1 * dX_d3 - s1 * dY_d3],
        [x, s1 * dX_d2, s1 * dX_d3 + c1 * dY_d3],
        [0.0, dZ_d2, dZ_d3],
    ])


def reduced_singularity(p: DesignParams, theta2, theta3):
    """det of d(rho^2, z)/d(theta2, theta3); zero exactly on the singular set.

    Accepts scalars or broadcastable arrays.  Scales like length^4 under
    uniform scaling of the design, so tolerances applied to it should be
    taken relative to `singularity_scale`.
    """
    c2, s2 = np.cos(theta2), np.sin(theta2)
    c3, s3 = np.cos(theta3), np.sin(theta3)
    L = p.d3 + p.d4 * c3
    X = p.d2 + c2 * L + s2 * p.r3
    Y = p.r2 + p.d4 * s3
    Z = c2 * p.r3 - s2 * L

    drho2_d2 = 2.0 * X * Z
    drho2_d3 = 2.0 * (-X * c2 * p.d4 * s3 + Y * p.d4 * c3)
    dz_d2 = -(X - p.d2)
    dz_d3 = s2 * p.d4 * s3
    return drho2_d2 * dz_d3 - drho2_d3 * dz_d2


def singularity_scale(p: DesignParams) -> float:
    """Characteristic magnitude of `reduced_singularity` for tolerance scaling."""
    return 2.0 * p.d4 * p.length_sum ** 3
