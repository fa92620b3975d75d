"""Exception types shared across the package."""


class WignerOrbitsError(Exception):
    """Base class for all package errors."""


class NonConvergence(WignerOrbitsError):
    """A matrix series failed to reach its tolerance within the term budget."""


class SingularMatrix(WignerOrbitsError):
    """A matrix that must be inverted is singular or too ill-conditioned."""


class BasisClosureError(WignerOrbitsError):
    """A commutator does not decompose in the declared algebra basis."""


class DomainError(WignerOrbitsError):
    """A Lie-algebra point lies outside the exponential-map domain."""


class DegeneratePoint(WignerOrbitsError):
    """A dual-space point sits on (or too close to) an orbit boundary."""


class NoSolution(WignerOrbitsError):
    """The orbit equation gamma_p^T = k^T h^{-1} has no solution in H."""


class UnclassifiablePoint(WignerOrbitsError):
    """A point with nonzero orbit polynomial matches no catalogued orbit."""


class InconclusiveGeometry(WignerOrbitsError):
    """Boundary sampling could not decide the hyperplane question in budget."""


class QuadratureBudgetExceeded(WignerOrbitsError):
    """A requested quadrature exceeds the node budget."""


class GridMismatch(WignerOrbitsError):
    """Two grids that must share geometry do not."""


class InvalidParameter(WignerOrbitsError):
    """A group-family parameter is outside its admissible range."""
