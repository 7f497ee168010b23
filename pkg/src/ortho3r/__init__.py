"""Workspace analysis and classification of 3R orthogonal manipulators."""

from .model import (
    CartesianPoint,
    DesignParams,
    JointConfig,
    OutOfFamily,
    SectionPoint,
    family_case,
    fk,
    jacobian,
    reduced_singularity,
)
from .ikquartic import (
    DegenerateElimination,
    IkSolutionSet,
    Quartic,
    RootSet,
    ik,
    iks_count,
    quartic_at,
    theta3_candidates,
)

__version__ = "0.1.0"

__all__ = [
    "CartesianPoint",
    "DesignParams",
    "DegenerateElimination",
    "IkSolutionSet",
    "JointConfig",
    "OutOfFamily",
    "Quartic",
    "RootSet",
    "SectionPoint",
    "family_case",
    "fk",
    "ik",
    "iks_count",
    "jacobian",
    "quartic_at",
    "reduced_singularity",
    "theta3_candidates",
    "__version__",
]
