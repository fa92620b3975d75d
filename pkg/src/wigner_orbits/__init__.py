"""Wigner functions on coadjoint orbits of semidirect-product groups.

The package computes phase-space distributions for groups R^n x| H whose
dual carries open free H-orbits, verifies the structural identities the
construction rests on (measure equalities, covariance, overlap, marginal,
orbit support), and ships five built-in groups as a catalog.
"""

from .errors import (
    BasisClosureError,
    DegeneratePoint,
    DomainError,
    GridMismatch,
    InconclusiveGeometry,
    InvalidParameter,
    NonConvergence,
    NoSolution,
    QuadratureBudgetExceeded,
    SingularMatrix,
    UnclassifiablePoint,
    WignerOrbitsError,
)
from .matrixcalc import SeriesSpec, ad_matrix, f_minus_inverse, f_plus, matrix_exp, sinch

__version__ = "0.1.0"

__all__ = [
    "WignerOrbitsError",
    "NonConvergence",
    "SingularMatrix",
    "BasisClosureError",
    "DomainError",
    "DegeneratePoint",
    "NoSolution",
    "UnclassifiablePoint",
    "InconclusiveGeometry",
    "QuadratureBudgetExceeded",
    "GridMismatch",
    "InvalidParameter",
    "SeriesSpec",
    "sinch",
    "f_plus",
    "f_minus_inverse",
    "matrix_exp",
    "ad_matrix",
    "__version__",
]
