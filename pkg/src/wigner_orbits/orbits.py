"""Orbit geometry in the dual of R^n: classification, measures, orbit maps.

The central object is the degree-n polynomial

    delta(omega) = det of the matrix whose rows are omega^T L^1 .. omega^T L^n.

Its nonvanishing characterizes points of open free orbits; its absolute
value equals the square root of det Theta (the structure-constant matrix),
which is the density converting the Lebesgue measure on an orbit to the
invariant one.  With the catalog's basis normalization the Duflo-Moore
density is the reciprocal: c = 1/|delta| on every orbit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    DegeneratePoint,
    InconclusiveGeometry,
    NoSolution,
    UnclassifiablePoint,
)
from .group import CoadjointPoint, GroupElement, GroupModel, modular_functions
from .matrixcalc import det_abs, matrix_exp, sinch

_BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class OrbitDescriptor:
    label: str
    representative: np.ndarray
    sign_signature: tuple
    is_dihedral_cone: Optional[bool] = None


@dataclass(frozen=True)
class Boundary:
    """Returned by classify_point for points on (or near) the orbit boundary."""

    omega: np.ndarray
    delta_value: float


@dataclass
class MixingReport:
    group: str
    orbit: str
    trials: int
    mixing_found: bool
    witnesses: list = field(default_factory=list)  # (omega, x_q, from, to)
    boundary_hits: int = 0

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "orbit": self.orbit,
            "trials": self.trials,
            "mixing_found": self.mixing_found,
            "boundary_hits": self.boundary_hits,
            "witnesses": [
                {
                    "omega": list(map(float, om)),
                    "x_q": list(map(float, xq)),
                    "from_orbit": fr,
                    "to_orbit": to,
                }
                for om, xq, fr, to in self.witnesses[:16]
            ],
        }


def descriptors(model: GroupModel) -> tuple:
    dihedral = model.hooks.get("is_dihedral_cone")
    return tuple(
        OrbitDescriptor(
            rep.label,
            np.asarray(rep.vector, dtype=float),
            tuple(rep.signs),
            dihedral,
        )
        for rep in model.orbit_reps
    )


def descriptor(model: GroupModel, label: str) -> OrbitDescriptor:
    for d in descriptors(model):
        if d.label == label:
            return d
    raise UnclassifiablePoint(f"no orbit labelled {label!r} in {model.name}")


# ---------------------------------------------------------------------------
# the orbit polynomial and classification
# ---------------------------------------------------------------------------


def delta(omega, model: GroupModel):
    """Orbit polynomial: det of the stacked rows omega^T L^i.

    Accepts one row vector (n,) or a batch (m, n); returns float or (m,).
    """
    om = np.asarray(omega, dtype=float)
    vals = model._delta_many(np.atleast_2d(om))
    return vals if om.ndim > 1 else float(vals[0])


def _boundary_threshold(omega: np.ndarray, n: int) -> np.ndarray:
    norms = np.linalg.norm(np.atleast_2d(omega), axis=-1)
    return _BOUNDARY_TOL * (1.0 + norms**n)


def classify_labels(omega, model: GroupModel) -> np.ndarray:
    """Vectorized classification: orbit index, -1 for boundary, -2 unknown."""
    om = np.atleast_2d(np.asarray(omega, dtype=float))
    d = model._delta_many(om)
    out = np.full(om.shape[0], -2, dtype=int)
    on_boundary = np.abs(d) < _boundary_threshold(om, model.n)
    out[on_boundary] = -1
    if model.boundary_factors:
        signs = np.stack(
            [np.sign(f.evaluate(om)) for f in model.boundary_factors], axis=-1
        )
        for idx, rep in enumerate(model.orbit_reps):
            want = np.asarray(rep.signs, dtype=float)
            match = np.all(signs == want, axis=-1) & ~on_boundary
            out[match] = idx
    else:
        # single open orbit separated from a measure-zero boundary
        out[~on_boundary] = 0
    return out


def classify_point(omega, model: GroupModel):
    """OrbitDescriptor for omega, Boundary near the zero set of delta."""
    om = np.asarray(omega, dtype=float).reshape(-1)
    label = int(classify_labels(om[None], model)[0])
    if label == -1:
        return Boundary(om, delta(om, model))
    if label == -2:
        raise UnclassifiablePoint(
            f"point {om} has delta != 0 but matches no orbit of {model.name}"
        )
    return descriptors(model)[label]


# ---------------------------------------------------------------------------
# tangent matrix, Theta matrix, measures
# ---------------------------------------------------------------------------


def tangent_matrix(gamma_p, model: GroupModel) -> np.ndarray:
    """Rows gamma_p^T L^i; invertible exactly where delta is nonzero."""
    gp = np.asarray(gamma_p, dtype=float).reshape(-1)
    T = np.einsum("i,aij->aj", gp, model.h_basis)
    if abs(np.linalg.det(T)) < _boundary_threshold(gp, model.n):
        raise DegeneratePoint("tangent matrix is singular on the orbit boundary")
    return T


@dataclass
class ThetaMatrix:
    point: CoadjointPoint
    matrix: np.ndarray


def theta_matrix(p: CoadjointPoint, model: GroupModel) -> ThetaMatrix:
    """Theta^{ij} = sum_k c^{ij}_k gamma^k (antisymmetric, linear in gamma)."""
    m = np.einsum("ijk,k->ij", model.structure_constants, p.flat)
    return ThetaMatrix(p, m)


def sigma_density(p: CoadjointPoint, model: GroupModel) -> float:
    """sqrt(det Theta): converts Lebesgue measure to the invariant one."""
    th = theta_matrix(p, model).matrix
    d = np.linalg.det(th)
    scale = (np.linalg.norm(p.flat) + 1.0) ** (2 * model.n)
    if abs(d) < (_BOUNDARY_TOL**2) * scale:
        raise DegeneratePoint("det Theta vanishes: point off the open orbits")
    if d < 0:
        raise DegeneratePoint("det Theta negative beyond tolerance")
    return float(np.sqrt(d))


def sigma_many(gamma_p, model: GroupModel) -> np.ndarray:
    """|delta(gamma_p)| batch evaluation of the invariant-measure density.

    Equals sigma_density for points on open orbits; the gamma_q part never
    enters the determinant.
    """
    return np.abs(delta(np.atleast_2d(gamma_p), model))


# ---------------------------------------------------------------------------
# orbit maps kappa / kappa_tilde and the Duflo-Moore density
# ---------------------------------------------------------------------------


def _kappa_generic(gamma_p: np.ndarray, k: np.ndarray, model: GroupModel) -> np.ndarray:
    """Newton solve of gamma_p^T exp(X_q) = k^T over x_q in R^n."""
    gp = np.asarray(gamma_p, dtype=float)
    scale = np.linalg.norm(k)

    def residual(x):
        return gp @ matrix_exp(model.x_q_matrix(x), model.series) - k

    rng = np.random.default_rng(12345)
    for attempt in range(24):
        x = np.zeros(model.n) if attempt == 0 else rng.normal(size=model.n)
        for _ in range(80):
            r = residual(x)
            if np.linalg.norm(r) < 1e-12 * (scale + 1.0):
                break
            J = np.empty((model.n, model.n))
            eps = 1e-7
            for j in range(model.n):
                dx = np.zeros(model.n)
                dx[j] = eps
                J[:, j] = (residual(x + dx) - residual(x - dx)) / (2 * eps)
            try:
                step = np.linalg.solve(J, r)
            except np.linalg.LinAlgError:
                break
            # damped update
            t = 1.0
            base = np.linalg.norm(r)
            while t > 1e-4:
                if np.linalg.norm(residual(x - t * step)) < base:
                    break
                t *= 0.5
            x = x - t * step
        if np.linalg.norm(residual(x)) < 1e-9 * (scale + 1.0):
            return matrix_exp(model.x_q_matrix(x), model.series)
    raise NoSolution("orbit equation did not converge; point may be off-orbit")


def kappa(gamma_p, orbit: OrbitDescriptor, model: GroupModel, use_closed: bool = True):
    """The h with gamma_p^T = k^T h^{-1} (unique by freeness)."""
    gp = np.asarray(gamma_p, dtype=float).reshape(-1)
    hook = model.hooks.get("kappa") if use_closed else None
    if hook is not None:
        h = np.asarray(hook(gp, orbit.label), dtype=float)
    else:
        h = _kappa_generic(gp, orbit.representative, model)
    resid = np.linalg.norm(gp @ h - orbit.representative)
    if resid > 1e-8 * (np.linalg.norm(orbit.representative) + 1.0):
        raise NoSolution(
            f"gamma_p={gp} does not solve the orbit equation for {orbit.label!r}"
        )
    return h


def kappa_tilde(p: CoadjointPoint, model: GroupModel, use_closed: bool = True) -> GroupElement:
    """Orbit-to-group homeomorphism (T(gamma_p)^{-1} gamma_q, kappa(gamma_p)).

    Normalized so the point (0, k_j) maps to the identity.  Intertwines the
    coadjoint action with left group translation.
    """
    orb = classify_point(p.gamma_p, model)
    if isinstance(orb, Boundary):
        raise DegeneratePoint("kappa_tilde needs a point on an open orbit")
    T = tangent_matrix(p.gamma_p, model)
    b = np.linalg.solve(T, p.gamma_q)
    return GroupElement(b, kappa(p.gamma_p, orb, model, use_closed=use_closed))


def duflo_moore_density(
    gamma_p, orbit: OrbitDescriptor, model: GroupModel, use_closed: bool = True
) -> float:
    """Density of the Duflo-Moore operator: |det kappa| / Delta_H(kappa)."""
    h = kappa(gamma_p, orbit, model, use_closed=use_closed)
    _, delta_h = modular_functions(GroupElement(np.zeros(model.n), h), model)
    return float(det_abs(h) / delta_h)


def dm_density_many(gamma_p, model: GroupModel) -> np.ndarray:
    """Fast batched Duflo-Moore density.

    Uses the closed form |delta(k_orbit)| / |delta(gamma_p)|, which agrees
    with the kappa route on every orbit; for normalized models this is just
    1/|delta|.  Points are classified only when representatives are not
    normalized.
    """
    gp = np.atleast_2d(np.asarray(gamma_p, dtype=float))
    hook = model.hooks.get("c")
    if hook is not None:
        return np.asarray(hook(gp), dtype=float)
    absd = np.abs(model._delta_many(gp))
    if model.normalized:
        return 1.0 / absd
    labels = classify_labels(gp, model)
    if np.any(labels < 0):
        raise DegeneratePoint("batched density asked at boundary points")
    numer = np.array(
        [abs(model._rep_delta[model.orbit_reps[i].label]) for i in labels]
    )
    return numer / absd


# ---------------------------------------------------------------------------
# dihedral-cone check
# ---------------------------------------------------------------------------


def _boundary_samples(model: GroupModel, orbit: OrbitDescriptor, samples: int, rng):
    """Points near the zero set of delta adjacent to the orbit."""
    n = model.n
    k = orbit.representative
    pts = []
    tries = 0
    while len(pts) < samples and tries < samples * 40:
        tries += 1
        a = k * np.exp(rng.normal(scale=0.5)) + rng.normal(scale=0.6, size=n)
        if classify_labels(a[None], model)[0] != _orbit_index(model, orbit.label):
            continue
        direction = rng.normal(size=n)
        direction /= np.linalg.norm(direction)
        ts = np.linspace(0.0, 3.0, 241)
        line = a[None] + ts[:, None] * direction[None]
        vals = np.abs(model._delta_many(line))
        j = int(np.argmin(vals))
        if j == 0 or vals[j] > 1e-3:
            continue
        # refine around the minimum by golden-section on |delta|
        lo, hi = ts[max(j - 1, 0)], ts[min(j + 1, ts.size - 1)]
        for _ in range(60):
            m1 = lo + 0.382 * (hi - lo)
            m2 = lo + 0.618 * (hi - lo)
            v1 = abs(delta(a + m1 * direction, model))
            v2 = abs(delta(a + m2 * direction, model))
            if v1 < v2:
                hi = m2
            else:
                lo = m1
        t0 = 0.5 * (lo + hi)
        z = a + t0 * direction
        if abs(delta(z, model)) < 1e-6 * (1.0 + np.linalg.norm(z) ** n):
            if np.linalg.norm(z) > 0.3:
                pts.append(z)
    return np.array(pts)


def _orbit_index(model: GroupModel, label: str) -> int:
    for i, rep in enumerate(model.orbit_reps):
        if rep.label == label:
            return i
    raise UnclassifiablePoint(label)


def check_dihedral_cone(
    orbit: OrbitDescriptor,
    model: GroupModel,
    samples: int = 400,
    rng=None,
    residual: float = 1e-8,
):
    """Try to cover the sampled orbit boundary with hyperplanes through 0.

    Returns (True, list of unit normals) on success, (False, witness point)
    when some boundary sample lies on no fitted hyperplane.  Raises
    InconclusiveGeometry when sampling cannot decide.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    pts = _boundary_samples(model, orbit, samples, rng)
    if pts.shape[0] == 0:
        # no boundary adjacent to the orbit except a measure-zero set that
        # random lines never hit (single-orbit groups): vacuously dihedral
        return True, []
    if pts.shape[0] < max(8, 2 * model.n):
        raise InconclusiveGeometry(
            f"only {pts.shape[0]} boundary samples found for {orbit.label}"
        )
    remaining = pts.copy()
    normals = []
    for _ in range(8):
        if remaining.shape[0] == 0:
            break
        best_normal, best_count = None, 0
        for _ in range(200):
            take = rng.choice(remaining.shape[0], size=model.n - 1, replace=False)
            sub = remaining[take]
            # normal spans the null space of the chosen rows
            _, sdiag, vt = np.linalg.svd(sub, full_matrices=True)
            normal = vt[-1]
            dist = np.abs(remaining @ normal) / np.linalg.norm(remaining, axis=1)
            count = int((dist < residual * 10).sum())
            if count > best_count:
                best_count, best_normal = count, normal
        if best_normal is None or best_count < max(4, remaining.shape[0] // 20):
            break
        dist = np.abs(remaining @ best_normal) / np.linalg.norm(remaining, axis=1)
        normals.append(best_normal)
        remaining = remaining[dist >= residual * 10]
    if remaining.shape[0] == 0:
        return True, normals
    witness = remaining[int(np.argmax(np.linalg.norm(remaining, axis=1)))]
    return False, witness


# ---------------------------------------------------------------------------
# sinch orbit-mixing probe
# ---------------------------------------------------------------------------


def sinch_mixing_probe(
    orbit: OrbitDescriptor,
    model: GroupModel,
    trials: int = 10000,
    rng=None,
    radius: float = 3.0,
) -> MixingReport:
    """Look for on-orbit points that the matrix sinch map sends to another orbit.

    Samples omega on the orbit and X_q in a coordinate ball, plus sweeps
    along each basis ray, and classifies omega^T sinch(X_q).
    """
    rng = np.random.default_rng(0) if rng is None else rng
    n = model.n
    idx = _orbit_index(model, orbit.label)
    report = MixingReport(model.name, orbit.label, trials, False)

    # on-orbit omegas: representative moved by random group elements
    n_om = max(8, trials // 64)
    omegas = []
    while len(omegas) < n_om:
        x = rng.normal(scale=0.7, size=n)
        if not model.exp_domain.contains(x):
            continue
        h = matrix_exp(model.x_q_matrix(x), model.series)
        om = orbit.representative @ np.linalg.inv(h)
        omegas.append(om)
    omegas = np.array(omegas)

    # random ball + basis rays
    xs = rng.normal(size=(trials, n))
    xs *= (radius * rng.uniform(size=trials) ** (1.0 / n) / np.linalg.norm(xs, axis=1))[
        :, None
    ]
    rays = []
    tgrid = np.linspace(-2 * radius, 2 * radius, 41)
    for i in range(n):
        for t in tgrid:
            if t != 0.0:
                e = np.zeros(n)
                e[i] = t
                rays.append(e)
    xs = np.vstack([xs, np.array(rays)])

    S = sinch(model.x_q_matrix(xs), model.series)  # (m, n, n)
    for om in omegas:
        warped = np.einsum("i,mij->mj", om, S)
        labels = classify_labels(warped, model)
        report.boundary_hits += int((labels == -1).sum())
        moved = np.nonzero((labels >= 0) & (labels != idx))[0]
        for m in moved[:4]:
            report.mixing_found = True
            report.witnesses.append(
                (
                    om.copy(),
                    xs[m].copy(),
                    orbit.label,
                    model.orbit_reps[int(labels[m])].label,
                )
            )
    return report
