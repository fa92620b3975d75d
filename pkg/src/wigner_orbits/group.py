"""Core semidirect-product group R^n x| H.

Everything here is parameterized by a GroupModel: a basis L^1..L^n of the
Lie algebra of H (the translation generators are always the standard basis
of R^n), the domain on which the exponential map is a bijection, and the
list of open free H-orbits in the dual with one representative each.

Elements are pairs g = (b, h) with b a column n-vector and h an invertible
n x n matrix, multiplying as (b1 + h1 b2, h1 h2).  Dual-space points are
row-vector pairs (gamma_q, gamma_p).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import BasisClosureError, DomainError, SingularMatrix
from .matrixcalc import (
    DEFAULT_SERIES,
    SeriesSpec,
    det_abs,
    f_plus,
    matrix_exp,
    sinch,
)

_DET_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# element types
# ---------------------------------------------------------------------------


@dataclass
class GroupElement:
    """g = (b, h): translation vector and invertible matrix part."""

    b: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        self.b = np.asarray(self.b, dtype=float).reshape(-1)
        self.h = np.asarray(self.h, dtype=float)
        n = self.b.size
        if self.h.shape != (n, n):
            raise ValueError("h must be n x n with n = len(b)")


@dataclass
class LieAlgebraElement:
    """Coordinates (x_q, x_p) in the basis {L^1..L^n, e_1..e_n}."""

    x_q: np.ndarray
    x_p: np.ndarray

    def __post_init__(self):
        self.x_q = np.asarray(self.x_q, dtype=float).reshape(-1)
        self.x_p = np.asarray(self.x_p, dtype=float).reshape(-1)
        if self.x_q.size != self.x_p.size:
            raise ValueError("x_q and x_p must have equal length")
        if not (np.all(np.isfinite(self.x_q)) and np.all(np.isfinite(self.x_p))):
            raise ValueError("non-finite coordinates")


@dataclass
class CoadjointPoint:
    """Row-vector pair (gamma_q, gamma_p) in the dual, with optional orbit tag."""

    gamma_q: np.ndarray
    gamma_p: np.ndarray
    orbit_label: Optional[str] = None

    def __post_init__(self):
        self.gamma_q = np.asarray(self.gamma_q, dtype=float).reshape(-1)
        self.gamma_p = np.asarray(self.gamma_p, dtype=float).reshape(-1)
        if self.gamma_q.size != self.gamma_p.size:
            raise ValueError("gamma_q and gamma_p must have equal length")

    @property
    def flat(self) -> np.ndarray:
        return np.concatenate([self.gamma_q, self.gamma_p])


# ---------------------------------------------------------------------------
# exp-map domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpDomain:
    """Conjunction of per-coordinate bounds, open half-spaces and open balls.

    box: per-coordinate (lo, hi) with None for unbounded sides.
    half_spaces: pairs (normal, offset) meaning normal . x > offset.
    balls: pairs (coordinate index tuple, radius) meaning |x[idx]| < radius.
    """

    box: tuple = ()
    half_spaces: tuple = ()
    balls: tuple = ()

    def contains(self, x_q: np.ndarray) -> bool:
        return bool(self.contains_many(np.asarray(x_q, dtype=float)[None])[0])

    def contains_many(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        ok = np.ones(x.shape[0], dtype=bool)
        for i, bounds in enumerate(self.box):
            if bounds is None:
                continue
            lo, hi = bounds
            if lo is not None:
                ok &= x[:, i] > lo
            if hi is not None:
                ok &= x[:, i] < hi
        for normal, offset in self.half_spaces:
            ok &= x @ np.asarray(normal, dtype=float) > offset
        for idx, radius in self.balls:
            ok &= np.linalg.norm(x[:, list(idx)], axis=1) < radius
        return ok

    def clip_halfwidths(self, halfwidths: np.ndarray, n: int) -> np.ndarray:
        """Largest centered per-axis halfwidths that keep the box inside."""
        hw = np.asarray(halfwidths, dtype=float).copy()
        for i, bounds in enumerate(self.box):
            if bounds is None or i >= n:
                continue
            lo, hi = bounds
            if lo is not None:
                hw[i] = min(hw[i], -lo)
            if hi is not None:
                hw[i] = min(hw[i], hi)
        return hw

    def to_dict(self) -> dict:
        return {
            "box": [list(b) if b is not None else None for b in self.box],
            "half_spaces": [[list(nrm), off] for nrm, off in self.half_spaces],
            "balls": [[list(idx), r] for idx, r in self.balls],
        }

    @staticmethod
    def from_dict(d: dict) -> "ExpDomain":
        return ExpDomain(
            box=tuple(tuple(b) if b is not None else None for b in d.get("box", [])),
            half_spaces=tuple(
                (tuple(nrm), float(off)) for nrm, off in d.get("half_spaces", [])
            ),
            balls=tuple((tuple(idx), float(r)) for idx, r in d.get("balls", [])),
        )


FULL_DOMAIN = ExpDomain()


# ---------------------------------------------------------------------------
# orbit bookkeeping stored on the model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryFactor:
    """One irreducible factor of the orbit polynomial, used to classify points.

    kind 'linear': value = normal . omega.
    kind 'quadratic': value = omega Q omega^T.
    """

    kind: str
    data: tuple

    def evaluate(self, omega: np.ndarray) -> np.ndarray:
        om = np.atleast_2d(np.asarray(omega, dtype=float))
        if self.kind == "linear":
            return om @ np.asarray(self.data, dtype=float)
        if self.kind == "quadratic":
            Q = np.asarray(self.data, dtype=float)
            return np.einsum("mi,ij,mj->m", om, Q, om)
        raise ValueError(f"unknown factor kind {self.kind!r}")

    def to_dict(self) -> dict:
        data = np.asarray(self.data, dtype=float).tolist()
        return {"kind": self.kind, "data": data}

    @staticmethod
    def from_dict(d: dict) -> "BoundaryFactor":
        data = d["data"]
        if d["kind"] == "linear":
            return BoundaryFactor("linear", tuple(data))
        return BoundaryFactor("quadratic", tuple(tuple(row) for row in data))


@dataclass(frozen=True)
class OrbitRep:
    """Representative row vector of one open free orbit."""

    label: str
    vector: tuple
    signs: tuple = ()


# ---------------------------------------------------------------------------
# the model
# ---------------------------------------------------------------------------


@dataclass
class GroupModel:
    name: str
    n: int
    h_basis: np.ndarray  # (n, n, n), stack of L^1..L^n
    orbit_reps: tuple = ()
    exp_domain: ExpDomain = FULL_DOMAIN
    boundary_factors: tuple = ()
    series: SeriesSpec = DEFAULT_SERIES
    # catalog-installed closed forms (not serialized): keys like
    # 'kappa', 'log_h', 'c', 'det_sinch_x_half', 'det_sinch_ad_half'
    hooks: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.h_basis = np.asarray(self.h_basis, dtype=float)
        n = self.n
        if self.h_basis.shape != (n, n, n):
            raise ValueError("h_basis must be (n, n, n)")
        self._basis_flat = self.h_basis.reshape(n, -1).T  # (n*n, n)
        self._basis_pinv = np.linalg.pinv(self._basis_flat)
        self.structure_constants = self._build_structure_constants()
        self._check_jacobi()
        # ad of each h-generator restricted to the h-part, as matrices
        c = self.structure_constants
        self.adL = np.stack([c[i, :n, :n].T for i in range(n)])
        self._rep_delta = {
            rep.label: float(self._delta_many(np.asarray(rep.vector)[None])[0])
            for rep in self.orbit_reps
        }
        self.normalized = all(
            abs(abs(v) - 1.0) < 1e-9 for v in self._rep_delta.values()
        ) and bool(self._rep_delta)

    # -- structure constants ------------------------------------------------

    def _decompose_in_h(self, M: np.ndarray, what: str) -> np.ndarray:
        vec = M.reshape(-1)
        coeff = self._basis_pinv @ vec
        resid = np.linalg.norm(self._basis_flat @ coeff - vec)
        if resid > 1e-9 * (np.linalg.norm(vec) + 1.0):
            raise BasisClosureError(f"{what} leaves the h-basis span ({resid:.3e})")
        return coeff

    def _build_structure_constants(self) -> np.ndarray:
        n = self.n
        c = np.zeros((2 * n, 2 * n, 2 * n))
        for i in range(n):
            for j in range(i + 1, n):
                bracket = self.h_basis[i] @ self.h_basis[j] - self.h_basis[j] @ self.h_basis[i]
                coeff = self._decompose_in_h(bracket, f"[L^{i+1}, L^{j+1}]")
                c[i, j, :n] = coeff
                c[j, i, :n] = -coeff
        for i in range(n):
            for m in range(n):
                # [L^i, e_m] = L^i e_m, a pure translation
                c[i, n + m, n:] = self.h_basis[i][:, m]
                c[n + m, i, n:] = -self.h_basis[i][:, m]
        return c

    def _check_jacobi(self):
        c = self.structure_constants
        # sum_cyclic c^{ij}_m c^{mk}_l == 0
        t = np.einsum("ijm,mkl->ijkl", c, c)
        jac = t + np.transpose(t, (1, 2, 0, 3)) + np.transpose(t, (2, 0, 1, 3))
        scale = np.abs(c).max() ** 2 + 1.0
        if np.abs(jac).max() > 1e-12 * scale:
            raise ValueError(f"Jacobi identity violated for model {self.name!r}")

    # -- small vectorized helpers used across modules -----------------------

    def x_q_matrix(self, x_q: np.ndarray) -> np.ndarray:
        """Matrix sum x_i L^i for one coordinate vector or a stack (..., n)."""
        x = np.asarray(x_q, dtype=float)
        return np.einsum("...i,ijk->...jk", x, self.h_basis)

    def ad_of_coords(self, x_q: np.ndarray) -> np.ndarray:
        """ad(X_q) restricted to the h-part, for coordinates (..., n)."""
        x = np.asarray(x_q, dtype=float)
        return np.einsum("...i,ijk->...jk", x, self.adL)

    def _delta_many(self, omega: np.ndarray) -> np.ndarray:
        rows = np.einsum("mi,aij->maj", np.atleast_2d(omega), self.h_basis)
        return np.linalg.det(rows)

    def columns_matrix(self, u: np.ndarray) -> np.ndarray:
        """[X u]: matrix whose columns are L^i u."""
        u = np.asarray(u, dtype=float).reshape(-1)
        return np.stack([self.h_basis[i] @ u for i in range(self.n)], axis=1)

    def identity(self) -> GroupElement:
        return GroupElement(np.zeros(self.n), np.eye(self.n))

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        n = self.n
        c = self.structure_constants
        sparse = [
            [i, j, k, float(c[i, j, k])]
            for i in range(2 * n)
            for j in range(i + 1, 2 * n)
            for k in range(2 * n)
            if abs(c[i, j, k]) > 0
        ]
        return {
            "name": self.name,
            "n": n,
            "h_basis": [self.h_basis[i].tolist() for i in range(n)],
            "structure_constants": sparse,
            "orbit_representatives": [
                {"label": r.label, "vector": list(r.vector), "signs": list(r.signs)}
                for r in self.orbit_reps
            ],
            "boundary_factors": [f.to_dict() for f in self.boundary_factors],
            "exp_domain": self.exp_domain.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "GroupModel":
        model = GroupModel(
            name=d["name"],
            n=int(d["n"]),
            h_basis=np.asarray(d["h_basis"], dtype=float),
            orbit_reps=tuple(
                OrbitRep(r["label"], tuple(r["vector"]), tuple(r.get("signs", ())))
                for r in d.get("orbit_representatives", [])
            ),
            exp_domain=ExpDomain.from_dict(d.get("exp_domain", {})),
            boundary_factors=tuple(
                BoundaryFactor.from_dict(f) for f in d.get("boundary_factors", [])
            ),
        )
        listed = d.get("structure_constants")
        if listed:
            c = model.structure_constants
            for i, j, k, v in listed:
                if abs(c[int(i), int(j), int(k)] - v) > 1e-9 * (abs(v) + 1.0):
                    raise ValueError(
                        "declared structure constants disagree with the basis"
                    )
        return model

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @staticmethod
    def load(path) -> "GroupModel":
        with open(path) as fh:
            return GroupModel.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# group operations
# ---------------------------------------------------------------------------


def multiply(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """(b1, h1)(b2, h2) = (b1 + h1 b2, h1 h2)."""
    return GroupElement(g1.b + g1.h @ g2.b, g1.h @ g2.h)


def inverse(g: GroupElement) -> GroupElement:
    """(b, h)^{-1} = (-h^{-1} b, h^{-1})."""
    if det_abs(g.h) < _DET_FLOOR:
        raise SingularMatrix("group element with |det h| below the floor")
    hinv = np.linalg.inv(g.h)
    return GroupElement(-hinv @ g.b, hinv)


def exp_map(X: LieAlgebraElement, model: GroupModel) -> GroupElement:
    """exp of (x_q, x_p): h = e^{X_q}, b = f_plus(X_q) x_p."""
    if not model.exp_domain.contains(X.x_q):
        raise DomainError(f"x_q outside the exponential domain of {model.name}")
    Xq = model.x_q_matrix(X.x_q)
    return GroupElement(f_plus(Xq, model.series) @ X.x_p, matrix_exp(Xq, model.series))


def adjoint_matrix_h(h: np.ndarray, model: GroupModel) -> np.ndarray:
    """M(h) with h L^k h^{-1} = sum_i L^i M(h)_{ik}."""
    h = np.asarray(h, dtype=float)
    if det_abs(h) < _DET_FLOOR:
        raise SingularMatrix("h is singular")
    hinv = np.linalg.inv(h)
    M = np.empty((model.n, model.n))
    for k in range(model.n):
        M[:, k] = model._decompose_in_h(h @ model.h_basis[k] @ hinv, f"h L^{k+1} h^-1")
    return M


def adjoint_matrix_g(g: GroupElement, model: GroupModel) -> np.ndarray:
    """2n x 2n matrix of Ad_g on coordinates (x_q, x_p)."""
    n = model.n
    Mh = adjoint_matrix_h(g.h, model)
    out = np.zeros((2 * n, 2 * n))
    out[:n, :n] = Mh
    out[n:, :n] = -model.columns_matrix(g.b) @ Mh
    out[n:, n:] = g.h
    return out


def coadjoint_apply(g: GroupElement, p: CoadjointPoint, model: GroupModel) -> CoadjointPoint:
    """Left coadjoint action: row vectors transform through Ad_{g^{-1}}.

    gamma_q' = gamma_q M(h^{-1}) + gamma_p h^{-1} [X b]
    gamma_p' = gamma_p h^{-1}

    Composes as coadjoint_apply(g1, coadjoint_apply(g2, p)) =
    coadjoint_apply(g1 g2, p).
    """
    if det_abs(g.h) < _DET_FLOOR:
        raise SingularMatrix("h is singular")
    hinv = np.linalg.inv(g.h)
    Mhinv = adjoint_matrix_h(hinv, model)
    gq = p.gamma_q @ Mhinv + p.gamma_p @ hinv @ model.columns_matrix(g.b)
    gp = p.gamma_p @ hinv
    return CoadjointPoint(gq, gp, p.orbit_label)


def modular_functions(g: GroupElement, model: GroupModel):
    """(Delta_G, Delta_H) with Delta_H = 1/|det M(h)|, Delta_G = Delta_H/|det h|."""
    dh = det_abs(g.h)
    if dh < _DET_FLOOR:
        raise SingularMatrix("h is singular")
    delta_h = 1.0 / det_abs(adjoint_matrix_h(g.h, model))
    return delta_h / dh, delta_h


def haar_density_H(x_q: np.ndarray, model: GroupModel) -> float:
    """Density of the left Haar measure of H in exponential coordinates:
    |det(e^{-ad X_q/2} sinch(ad X_q/2))|."""
    ad = model.ad_of_coords(x_q)
    val = matrix_exp(-ad / 2.0, model.series) @ sinch(ad / 2.0, model.series)
    return float(det_abs(val))


def haar_density_G(X: LieAlgebraElement, model: GroupModel) -> float:
    """Density of the left Haar measure of G in exponential coordinates:
    |det f_plus(-X_q) . det f_plus(-ad X_q)|."""
    Xq = model.x_q_matrix(X.x_q)
    ad = model.ad_of_coords(X.x_q)
    return float(
        det_abs(f_plus(-Xq, model.series)) * det_abs(f_plus(-ad, model.series))
    )


def log_map(g: GroupElement, model: GroupModel) -> LieAlgebraElement:
    """Inverse of exp_map, available when the model installs a closed-form
    'log_h' hook (all catalog groups do)."""
    log_h: Callable = model.hooks.get("log_h")
    if log_h is None:
        raise NotImplementedError(f"model {model.name!r} has no log_h hook")
    x_q = np.asarray(log_h(g.h), dtype=float)
    Xq = model.x_q_matrix(x_q)
    x_p = np.linalg.solve(f_plus(Xq, model.series), g.b)
    return LieAlgebraElement(x_q, x_p)
