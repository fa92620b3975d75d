"""Built-in group catalog.

Five groups ship with the package:

    diagonal          R^2 x| (positive diagonal 2x2 matrices)
    sim2              R^2 x| (rotations and dilations of the plane)
    hc                R^2 x| H_c, lower-triangular one-parameter family
    quaternionic      R^4 x| (invertible quaternions, left action)
    counterexample3d  R^3 x| H with a non-hyperplane orbit boundary

Each entry bundles the generic GroupModel with closed-form callbacks
(orbit map kappa, the Duflo-Moore density, per-group determinant factors,
logarithms) that the generic engine cross-checks against.

Basis normalization.  Generator scalings are chosen per group so that the
orbit polynomial evaluates to +-1 at every orbit representative.  With that
choice the invariant-measure density computed from structure constants
coincides with the one transported from the Haar measure of H (the measure
equalities hold with constant one).  The chosen constants: diagonal, sim2
and quaternionic use the natural basis; hc scales its nilpotent generator
by 1/c; counterexample3d scales its central generator by 1/3 and orders the
basis (shift, center, diagonal).  Representatives of counterexample3d sit
on the rays (+-1, 0, +-1) scaled by (3/2)^(1/3).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import quaternion as quat
from .errors import InvalidParameter, NoSolution
from .group import (
    BoundaryFactor,
    ExpDomain,
    GroupModel,
    OrbitRep,
)

__all__ = [
    "CatalogEntry",
    "make_diagonal",
    "make_sim2",
    "make_hc",
    "make_quaternionic",
    "make_counterexample3d",
    "names",
    "get",
]


@dataclass
class CatalogEntry:
    model: GroupModel
    closed_forms: dict
    expected_orbit_labels: tuple
    is_dihedral_cone: bool
    hyperplanes: tuple  # normals of the boundary hyperplanes, () if vacuous
    notes: str = ""
    wigner_ready: bool = True

    @property
    def name(self) -> str:
        return self.model.name


def _phi(u):
    """expm1(u)/u with the removable singularity filled by series."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-8
    safe = np.where(small, 1.0, u)
    out = np.where(small, 1.0 + u / 2.0 + u * u / 6.0, np.expm1(safe) / safe)
    return out if out.ndim else float(out)


def _sinch_scalar(u):
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-6
    safe = np.where(small, 1.0, u)
    out = np.where(small, 1.0 + u * u / 6.0, np.sinh(safe) / safe)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# diagonal group
# ---------------------------------------------------------------------------


def make_diagonal() -> CatalogEntry:
    """Plane translations extended by independent positive axis scalings.

    Four open orbits, the coordinate quadrants, with representatives
    (+-1, +-1).  The Duflo-Moore density is c(gamma_p) = 1/|g3 g4|.
    """
    basis = np.zeros((2, 2, 2))
    basis[0, 0, 0] = 1.0
    basis[1, 1, 1] = 1.0
    reps = tuple(
        OrbitRep(f"{'+' if s1 > 0 else '-'}{'+' if s2 > 0 else '-'}", (s1, s2), (s1, s2))
        for s1 in (1, -1)
        for s2 in (1, -1)
    )
    factors = (
        BoundaryFactor("linear", (1.0, 0.0)),
        BoundaryFactor("linear", (0.0, 1.0)),
    )
    model = GroupModel("diagonal", 2, basis, reps, ExpDomain(), factors)

    def log_h(h):
        h = np.asarray(h, dtype=float)
        return np.array([np.log(h[0, 0]), np.log(h[1, 1])])

    def kappa(gamma_p, label):
        k = _rep_vector(model, label)
        with np.errstate(divide="raise"):
            return np.diag(k / np.asarray(gamma_p, dtype=float))

    def c_density(gamma_p):
        gp = np.atleast_2d(np.asarray(gamma_p, dtype=float))
        vals = 1.0 / np.abs(gp[:, 0] * gp[:, 1])
        return vals if np.asarray(gamma_p).ndim > 1 else float(vals[0])

    def det_sinch_x_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        vals = _sinch_scalar(x[:, 0] / 2) * _sinch_scalar(x[:, 1] / 2)
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    def exp_h(x_q):
        return np.diag(np.exp(np.asarray(x_q, dtype=float)))

    hooks = {
        "log_h": log_h,
        "kappa": kappa,
        "c": c_density,
        "det_sinch_x_half": det_sinch_x_half,
        "det_sinch_ad_half": lambda x: _ones_like_rows(x),
        "exp_h": exp_h,
    }
    model.hooks.update(hooks)
    return CatalogEntry(
        model=model,
        closed_forms=hooks,
        expected_orbit_labels=tuple(r.label for r in reps),
        is_dihedral_cone=True,
        hyperplanes=((1.0, 0.0), (0.0, 1.0)),
        notes="abelian H; orbit boundary is the pair of coordinate axes",
    )


def _ones_like_rows(x):
    x = np.asarray(x, dtype=float)
    if x.ndim > 1:
        return np.ones(x.shape[0])
    return 1.0


def _rep_vector(model: GroupModel, label: str) -> np.ndarray:
    for rep in model.orbit_reps:
        if rep.label == label:
            return np.asarray(rep.vector, dtype=float)
    raise NoSolution(f"unknown orbit label {label!r} for {model.name}")


# ---------------------------------------------------------------------------
# similitude group of the plane
# ---------------------------------------------------------------------------


def make_sim2() -> CatalogEntry:
    """Rotations, dilations and translations of the plane.

    Single open orbit, the punctured plane, representative (1, 0).
    H is abelian (complex multiplication); the exponential is a bijection
    on the principal branch lambda in R, theta in (-pi, pi).
    """
    basis = np.zeros((2, 2, 2))
    basis[0] = np.eye(2)
    basis[1] = np.array([[0.0, -1.0], [1.0, 0.0]])
    reps = (OrbitRep("plane", (1.0, 0.0), ()),)
    domain = ExpDomain(box=(None, (-np.pi, np.pi)))
    model = GroupModel("sim2", 2, basis, reps, domain, ())

    def log_h(h):
        h = np.asarray(h, dtype=float)
        z = complex(h[0, 0], h[1, 0])
        return np.array([np.log(abs(z)), np.angle(z)])

    def kappa(gamma_p, label):
        gp = np.asarray(gamma_p, dtype=float)
        r2 = float(gp @ gp)
        a, b = gp[0] / r2, gp[1] / r2
        return np.array([[a, -b], [b, a]])

    def c_density(gamma_p):
        gp = np.atleast_2d(np.asarray(gamma_p, dtype=float))
        vals = 1.0 / np.einsum("mi,mi->m", gp, gp)
        return vals if np.asarray(gamma_p).ndim > 1 else float(vals[0])

    def det_sinch_x_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        lam, th = x[:, 0], x[:, 1]
        denom = lam * lam + th * th
        small = denom < 1e-10
        safe = np.where(small, 1.0, denom)
        vals = np.where(
            small,
            1.0 + (lam * lam - th * th) / 12.0,
            (2.0 * np.cosh(lam) - 2.0 * np.cos(th)) / safe,
        )
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    def exp_h(x_q):
        lam, th = np.asarray(x_q, dtype=float)
        r = np.exp(lam)
        return r * np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])

    hooks = {
        "log_h": log_h,
        "kappa": kappa,
        "c": c_density,
        "det_sinch_x_half": det_sinch_x_half,
        "det_sinch_ad_half": lambda x: _ones_like_rows(x),
        "exp_h": exp_h,
    }
    model.hooks.update(hooks)
    return CatalogEntry(
        model=model,
        closed_forms=hooks,
        expected_orbit_labels=("plane",),
        is_dihedral_cone=True,
        hyperplanes=(),
        notes="single orbit; boundary degenerates to the origin, so the "
        "hyperplane hypothesis holds vacuously",
    )


# ---------------------------------------------------------------------------
# lower-triangular family H_c
# ---------------------------------------------------------------------------


def make_hc(c_param: float) -> CatalogEntry:
    """One-parameter family of lower-triangular groups.

    H = {[[a, 0], [b, a^c]] : a > 0} acting on the plane; two open orbits,
    the upper and lower half-planes in the second dual coordinate, with
    representatives (0, +-1) and density c(gamma_p) = |g4|^{-2}.

    The nilpotent generator carries a 1/c scaling so the representative
    normalization comes out at one; c_param == 1 is the equal-weights case
    and is handled by the same limit-safe formulas.
    """
    if c_param == 0:
        raise InvalidParameter("c_param must be nonzero")
    cc = float(c_param)
    basis = np.zeros((2, 2, 2))
    basis[0] = np.array([[1.0, 0.0], [0.0, cc]])
    basis[1] = np.array([[0.0, 0.0], [1.0 / cc, 0.0]])
    reps = (OrbitRep("+", (0.0, 1.0), (1,)), OrbitRep("-", (0.0, -1.0), (-1,)))
    factors = (BoundaryFactor("linear", (0.0, 1.0)),)
    model = GroupModel(f"hc[c={cc:g}]", 2, basis, reps, ExpDomain(), factors)

    def exp_h(x_q):
        x1, x2 = np.asarray(x_q, dtype=float)
        a = np.exp(x1)
        off = (x2 / cc) * a * _phi((cc - 1.0) * x1)
        return np.array([[a, 0.0], [off, np.exp(cc * x1)]])

    def log_h(h):
        h = np.asarray(h, dtype=float)
        x1 = np.log(h[0, 0])
        v = h[1, 0] / (np.exp(x1) * _phi((cc - 1.0) * x1))
        return np.array([x1, cc * v])

    def kappa(gamma_p, label):
        gp = np.asarray(gamma_p, dtype=float)
        s = 1.0 if label == "+" else -1.0
        g4 = s * gp[1]
        if g4 <= 0:
            raise NoSolution("gamma_p is not on the requested half-plane orbit")
        a = g4 ** (-1.0 / cc)
        b = -s * gp[0] * a ** (1.0 + cc)
        return np.array([[a, 0.0], [b, a**cc]])

    def c_density(gamma_p):
        gp = np.atleast_2d(np.asarray(gamma_p, dtype=float))
        vals = 1.0 / (gp[:, 1] * gp[:, 1])
        return vals if np.asarray(gamma_p).ndim > 1 else float(vals[0])

    def det_sinch_x_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        vals = _sinch_scalar(x[:, 0] / 2) * _sinch_scalar(cc * x[:, 0] / 2)
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    def det_sinch_ad_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        vals = _sinch_scalar((cc - 1.0) * x[:, 0] / 2)
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    hooks = {
        "log_h": log_h,
        "kappa": kappa,
        "c": c_density,
        "det_sinch_x_half": det_sinch_x_half,
        "det_sinch_ad_half": det_sinch_ad_half,
        "exp_h": exp_h,
    }
    model.hooks.update(hooks)
    return CatalogEntry(
        model=model,
        closed_forms=hooks,
        expected_orbit_labels=("+", "-"),
        is_dihedral_cone=True,
        hyperplanes=((0.0, 1.0),),
        notes="solvable H; orbit boundary is the single horizontal axis "
        "(a double root of the orbit polynomial)",
    )


# ---------------------------------------------------------------------------
# quaternionic group
# ---------------------------------------------------------------------------


def make_quaternionic() -> CatalogEntry:
    """R^4 extended by invertible quaternions acting by left multiplication.

    Single open orbit (everything but the origin), representative
    (1, 0, 0, 0), density c = |gamma_p|^{-4}.  The 4x4 real generators are
    the left-multiplication matrices of 1, i, j, k; quaternion arithmetic
    itself runs through the 2x2 complex picture.
    """
    units = (quat.ONE, quat.I, quat.J, quat.K)
    basis = np.stack([quat.left_matrix(u) for u in units])
    reps = (OrbitRep("all", (1.0, 0.0, 0.0, 0.0), ()),)
    domain = ExpDomain(balls=(((1, 2, 3), np.pi),))
    model = GroupModel("quaternionic", 4, basis, reps, domain, ())

    def log_h(h):
        return quat.log(quat.from_left_matrix(h))

    def kappa(gamma_p, label):
        gp = np.asarray(gamma_p, dtype=float)
        return quat.left_matrix(gp / float(gp @ gp))

    def c_density(gamma_p):
        gp = np.atleast_2d(np.asarray(gamma_p, dtype=float))
        vals = 1.0 / np.einsum("mi,mi->m", gp, gp) ** 2
        return vals if np.asarray(gamma_p).ndim > 1 else float(vals[0])

    def det_sinch_x_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        x0 = x[:, 0]
        R2 = np.einsum("mi,mi->m", x[:, 1:], x[:, 1:])
        u = x0 * x0 + R2
        small = u < 1e-8
        safe = np.where(small, 1.0, u)
        g = np.where(
            small,
            1.0 + (x0 * x0 - R2) / 12.0,
            2.0 * (np.cosh(x0) - np.cos(np.sqrt(R2))) / safe,
        )
        vals = g * g
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    def det_sinch_ad_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        R = np.sqrt(np.einsum("mi,mi->m", x[:, 1:], x[:, 1:]))
        vals = np.sinc(R / np.pi) ** 2
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    def exp_h(x_q):
        x = np.asarray(x_q, dtype=float)
        R = np.linalg.norm(x[1:])
        scale = np.exp(x[0])
        if R < 1e-12:
            q = scale * np.array([1.0, *x[1:]])
        else:
            q = scale * np.concatenate([[np.cos(R)], x[1:] * (np.sin(R) / R)])
        return quat.left_matrix(q)

    hooks = {
        "log_h": log_h,
        "kappa": kappa,
        "c": c_density,
        "det_sinch_x_half": det_sinch_x_half,
        "det_sinch_ad_half": det_sinch_ad_half,
        "exp_h": exp_h,
    }
    model.hooks.update(hooks)
    return CatalogEntry(
        model=model,
        closed_forms=hooks,
        expected_orbit_labels=("all",),
        is_dihedral_cone=True,
        hyperplanes=(),
        notes="single orbit; boundary degenerates to the origin (vacuous "
        "hyperplane hypothesis); Haar correction (sin R / R)^2",
    )


# ---------------------------------------------------------------------------
# 3-dimensional group with a conic orbit boundary
# ---------------------------------------------------------------------------

_CONE_Q = np.array([[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]])


def make_counterexample3d() -> CatalogEntry:
    """Three-dimensional H whose orbit boundary contains a genuine cone.

    The algebra of H is spanned by a lower shift, the center, and
    diag(1, 0, -1).  The dual splits into four open orbits separated by the
    plane w3 = 0 and the cone 2 w1 w3 - w2^2 = 0; the cone component cannot
    be decomposed into hyperplanes, so orbit-support confinement of the
    phase-space transform fails for this group.
    """
    shift = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    center = np.eye(3) / 3.0
    diag = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, -1.0]])
    basis = np.stack([shift, center, diag])
    s = (1.5) ** (1.0 / 3.0)
    reps = (
        OrbitRep("O1", (s, 0.0, s), (1, 1)),
        OrbitRep("O2", (-s, 0.0, s), (1, -1)),
        OrbitRep("O3", (-s, 0.0, -s), (-1, 1)),
        OrbitRep("O4", (s, 0.0, -s), (-1, -1)),
    )
    factors = (
        BoundaryFactor("linear", (0.0, 0.0, 1.0)),
        BoundaryFactor("quadratic", tuple(map(tuple, _CONE_Q))),
    )
    model = GroupModel("counterexample3d", 3, basis, reps, ExpDomain(), factors)

    def _abc_to_coords(a, b, c):
        # X = a*center*3 + b*shift + c*diag in the model basis (shift, center, diag)
        return np.array([b, 3.0 * a, c])

    def log_h(h):
        h = np.asarray(h, dtype=float)
        a = np.log(h[1, 1])
        c = np.log(h[0, 0] / h[1, 1])
        b = h[1, 0] / (np.exp(a) * _phi(c))
        return _abc_to_coords(a, b, c)

    def kappa(gamma_p, label):
        gp = np.asarray(gamma_p, dtype=float)
        k = _rep_vector(model, label)
        qg = float(gp @ _CONE_Q @ gp)
        qk = float(k @ _CONE_Q @ k)
        ratio = gp[2] / k[2]
        if ratio <= 0 or qk / qg <= 0:
            raise NoSolution("gamma_p is not on the requested orbit")
        t2 = ratio * ratio * qk / qg
        c = 0.5 * np.log(t2)
        t = np.sqrt(t2)
        beta = k[1] / (k[2] * t) - gp[1] / gp[2]
        # beta = b (1 - e^{-c})/c;  (1-e^{-c})/c = phi(-c) with sign folded in
        b = beta / _phi(-c)
        a = c + np.log(k[2] / gp[2])
        from .matrixcalc import matrix_exp

        return matrix_exp(model.x_q_matrix(_abc_to_coords(a, b, c)))

    def c_density(gamma_p):
        gp = np.atleast_2d(np.asarray(gamma_p, dtype=float))
        q = np.einsum("mi,ij,mj->m", gp, _CONE_Q, gp)
        vals = 3.0 / np.abs(gp[:, 2] * q)
        return vals if np.asarray(gamma_p).ndim > 1 else float(vals[0])

    def det_sinch_x_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        a = x[:, 1] / 3.0
        c = x[:, 2]
        vals = (
            _sinch_scalar((a + c) / 2)
            * _sinch_scalar(a / 2)
            * _sinch_scalar((a - c) / 2)
        )
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    def det_sinch_ad_half(x_q):
        x = np.atleast_2d(np.asarray(x_q, dtype=float))
        vals = _sinch_scalar(x[:, 2] / 2)
        return vals if np.asarray(x_q).ndim > 1 else float(vals[0])

    hooks = {
        "log_h": log_h,
        "kappa": kappa,
        "c": c_density,
        "det_sinch_x_half": det_sinch_x_half,
        "det_sinch_ad_half": det_sinch_ad_half,
    }
    model.hooks.update(hooks)
    return CatalogEntry(
        model=model,
        closed_forms=hooks,
        expected_orbit_labels=("O1", "O2", "O3", "O4"),
        is_dihedral_cone=False,
        hyperplanes=(),
        notes="orbit boundary = plane union cone; the cone factor defeats "
        "the hyperplane decomposition and lets the transform leak "
        "between orbits",
    )


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_BUILDERS = {
    "diagonal": make_diagonal,
    "sim2": make_sim2,
    "hc": make_hc,
    "quaternionic": make_quaternionic,
    "counterexample3d": make_counterexample3d,
}


def names() -> tuple:
    return tuple(_BUILDERS)


def get(name: str, c_param: float = 2.0) -> CatalogEntry:
    """Build a catalog entry by name; 'hc' takes the family parameter."""
    if name not in _BUILDERS:
        raise KeyError(f"unknown catalog group {name!r}")
    if name == "hc":
        return make_hc(c_param)
    return _BUILDERS[name]()
