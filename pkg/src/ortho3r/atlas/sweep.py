"""Validated description of a design-plane sweep."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..model import DesignParams

#: Which of (d2, r2, d3, r3) must stay strictly positive per case.
CASE_POSITIVE = {
    "A": ("r2", "d3"), "B": ("d3",), "C": ("r2",), "D": ("d2", "d3"),
    "E": ("d2",), "F": ("r2", "d3", "r3"), "G": ("d3", "r3"),
    "H": ("r2", "r3"), "I": ("d2", "d3", "r3"), "J": ("d2", "r3"),
}
PARAM_NAMES = ("d2", "d3", "d4", "r2", "r3")


class SweepSpecError(ValueError):
    """The requested sweep violates the case's zero pattern."""


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    steps: int

    def centers(self) -> np.ndarray:
        return self.lo + (np.arange(self.steps) + 0.5) * (self.hi - self.lo) / self.steps


@dataclass(frozen=True)
class SweepSpec:
    """One family case, two swept parameters, fixed values for the rest.

    Construction validates the zero pattern: swept axes must be parameters
    that are strictly positive in the case (or d4), ranges must stay
    positive, fixed values must complete the pattern.
    """

    case: str
    x: Axis
    y: Axis
    fixed: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.case not in CASE_POSITIVE:
            raise SweepSpecError(f"unknown case {self.case!r}")
        positive = set(CASE_POSITIVE[self.case]) | {"d4"}
        for axis in (self.x, self.y):
            if axis.name not in PARAM_NAMES:
                raise SweepSpecError(f"unknown parameter {axis.name!r}")
            if axis.name not in positive:
                raise SweepSpecError(
                    f"cannot sweep {axis.name}: it must stay zero in case {self.case}")
            if axis.lo <= 0.0 or axis.hi <= axis.lo or axis.steps < 1:
                raise SweepSpecError(
                    f"sweep range of {axis.name} must be positive and increasing")
        if self.x.name == self.y.name:
            raise SweepSpecError("the two sweep axes must differ")
        for name, val in self.fixed.items():
            if name not in PARAM_NAMES:
                raise SweepSpecError(f"unknown parameter {name!r}")
            if name in (self.x.name, self.y.name):
                raise SweepSpecError(f"{name} is already a sweep axis")
            if name in positive and val <= 0.0:
                raise SweepSpecError(
                    f"fixed {name}={val} must be positive in case {self.case}")
            if name not in positive and val != 0.0:
                raise SweepSpecError(
                    f"fixed {name}={val} violates the case-{self.case} zero pattern")
        missing = [n for n in positive
                   if n not in (self.x.name, self.y.name)
                   and self.fixed.get(n, 0.0) <= 0.0]
        if missing:
            raise SweepSpecError(f"case {self.case} needs fixed values for {missing}")

    def design_at(self, xv: float, yv: float) -> DesignParams:
        vals = {name: 0.0 for name in PARAM_NAMES}
        vals.update(self.fixed)
        vals[self.x.name] = float(xv)
        vals[self.y.name] = float(yv)
        return DesignParams(vals["d2"], vals["d3"], vals["d4"], vals["r2"], vals["r3"])
