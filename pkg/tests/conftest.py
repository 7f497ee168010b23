import math

import numpy as np
import pytest

from ortho3r.model import DesignParams, JointConfig

#: Which of (d2, r2, d3, r3) is strictly positive in each case.
FAMILY_POSITIVE = {
    "A": (False, True, True, False),
    "B": (False, False, True, False),
    "C": (False, True, False, False),
    "D": (True, False, True, False),
    "E": (True, False, False, False),
    "F": (False, True, True, True),
    "G": (False, False, True, True),
    "H": (False, True, False, True),
    "I": (True, False, True, True),
    "J": (True, False, False, True),
}
ALL_CASES = tuple(sorted(FAMILY_POSITIVE))


def random_design(case: str, rng: np.random.Generator,
                  lo: float = 0.3, hi: float = 3.0) -> DesignParams:
    """Random design with the zero-pattern of one family case."""
    d2p, r2p, d3p, r3p = FAMILY_POSITIVE[case]
    draw = lambda flag: float(rng.uniform(lo, hi)) if flag else 0.0
    return DesignParams(d2=draw(d2p), d3=draw(d3p), d4=float(rng.uniform(lo, hi)),
                        r2=draw(r2p), r3=draw(r3p))


def random_config(rng: np.random.Generator) -> JointConfig:
    t = rng.uniform(-math.pi, math.pi, 3)
    return JointConfig(float(t[0]), float(t[1]), float(t[2]))


def dh_transform_oracle(p: DesignParams, q: JointConfig) -> np.ndarray:
    """Independent forward kinematics: compose the homogeneous transforms."""
    def tf(alpha, d, theta, r):
        ca, sa = math.cos(alpha), math.sin(alpha)
        ct, st = math.cos(theta), math.sin(theta)
        return np.array([
            [ct, -st, 0.0, d],
            [ca * st, ca * ct, -sa, -r * sa],
            [sa * st, sa * ct, ca, r * ca],
            [0.0, 0.0, 0.0, 1.0],
        ])

    T = tf(0.0, 0.0, q.theta1, 0.0)
    T = T @ tf(-math.pi / 2.0, p.d2, q.theta2, p.r2)
    T = T @ tf(math.pi / 2.0, p.d3, q.theta3, p.r3)
    return (T @ np.array([p.d4, 0.0, 0.0, 1.0]))[:3]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
