"""Quasi-regular representation in the frequency picture, and the flat baseline.

Signals live on one open orbit as complex functions of the row vector k;
the group acts by

    (U(b, h) f)(k) = |det h|^(1/2) e^{i k. b} f(k h).

The Duflo-Moore operator multiplies by (2 pi)^(n/2) c(k)^(1/2) with c the
orbit density from the orbits module.  flat_wigner implements the ordinary
phase-space distribution on R^{2n} used as a quadrature-engine oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, GridMismatch
from .group import GroupElement, GroupModel, LieAlgebraElement, inverse, exp_map
from .matrixcalc import det_abs, f_plus, matrix_exp
from .orbits import OrbitDescriptor, classify_labels, dm_density_many, _orbit_index
from .util import Box, quad_rule_1d, tensor_quadrature


@dataclass
class OrbitFunction:
    """Complex function supported on one open orbit.

    evaluate takes an (m, n) array of row vectors and returns (m,) complex;
    it is already masked to the orbit (zero outside).  support_hint bounds
    the essential support; norm_cache stores the L2 norm when known.
    """

    orbit: OrbitDescriptor
    evaluate: Callable
    support_hint: Box
    norm_cache: Optional[float] = None


def _orbit_mask(model: GroupModel, orbit: OrbitDescriptor):
    idx = _orbit_index(model, orbit.label)

    def mask(points: np.ndarray) -> np.ndarray:
        return classify_labels(points, model) == idx

    return mask


def orbit_function(
    model: GroupModel,
    orbit: OrbitDescriptor,
    profile: Callable,
    support_hint: Box,
) -> OrbitFunction:
    """Wrap a raw profile with the orbit mask."""
    mask = _orbit_mask(model, orbit)

    def evaluate(points):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        vals = np.asarray(profile(pts), dtype=complex)
        vals = np.where(mask(pts), vals, 0.0)
        return vals

    return OrbitFunction(orbit, evaluate, support_hint)


def gaussian_signal(
    model: GroupModel,
    orbit: OrbitDescriptor,
    center,
    width: float,
    amplitude: float = 1.0,
    tails: float = 6.0,
) -> OrbitFunction:
    c = np.asarray(center, dtype=float)
    w = float(width)

    def profile(pts):
        d2 = np.einsum("mi,mi->m", pts - c, pts - c)
        return amplitude * np.exp(-d2 / (2.0 * w * w))

    hint = Box(tuple(c - tails * w), tuple(c + tails * w))
    return orbit_function(model, orbit, profile, hint)


def bump_signal(
    model: GroupModel,
    orbit: OrbitDescriptor,
    center,
    radius: float,
    amplitude: float = 1.0,
) -> OrbitFunction:
    """Smooth compactly supported bump exp(1 - 1/(1 - r^2)) inside radius."""
    c = np.asarray(center, dtype=float)
    r0 = float(radius)

    def profile(pts):
        r2 = np.einsum("mi,mi->m", pts - c, pts - c) / (r0 * r0)
        inside = r2 < 1.0
        safe = np.where(inside, r2, 0.0)
        return amplitude * np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)

    hint = Box(tuple(c - r0), tuple(c + r0))
    return orbit_function(model, orbit, profile, hint)


# ---------------------------------------------------------------------------
# inner products on the orbit
# ---------------------------------------------------------------------------


def _joint_box(*fs: OrbitFunction) -> Box:
    lo = np.min([f.support_hint.lo for f in fs], axis=0)
    hi = np.max([f.support_hint.hi for f in fs], axis=0)
    return Box(tuple(lo), tuple(hi))


def orbit_inner(
    f: OrbitFunction, g: OrbitFunction, model: GroupModel, npts: int = 96
) -> complex:
    """<f|g> = integral conj(f) g dk over the shared support box."""
    box = _joint_box(f, g)
    nodes, weights = tensor_quadrature("gauss", npts, box)
    return complex(np.sum(weights * np.conj(f.evaluate(nodes)) * g.evaluate(nodes)))


def orbit_norm(f: OrbitFunction, model: GroupModel, npts: int = 96) -> float:
    if f.norm_cache is not None:
        return f.norm_cache
    val = float(np.sqrt(orbit_inner(f, f, model, npts).real))
    f.norm_cache = val
    return val


def normalized(f: OrbitFunction, model: GroupModel, npts: int = 96) -> OrbitFunction:
    nrm = orbit_norm(f, model, npts)
    base = f.evaluate
    out = replace(f, evaluate=lambda pts: base(pts) / nrm, norm_cache=1.0)
    return out


# ---------------------------------------------------------------------------
# the representation
# ---------------------------------------------------------------------------


def rep_apply(g: GroupElement, f: OrbitFunction, model: GroupModel) -> OrbitFunction:
    """(U(b, h) f)(k) = |det h|^{1/2} e^{i k.b} f(k h)."""
    pref = float(np.sqrt(det_abs(g.h)))
    h = g.h.copy()
    b = g.b.copy()
    base = f.evaluate

    def evaluate(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return pref * np.exp(1j * (pts @ b)) * base(pts @ h)

    # support transforms by the inverse right action
    corners = _box_corners(f.support_hint)
    moved = corners @ np.linalg.inv(h)
    hint = Box(tuple(moved.min(axis=0)), tuple(moved.max(axis=0)))
    return OrbitFunction(f.orbit, evaluate, hint, f.norm_cache)


def _box_corners(box: Box) -> np.ndarray:
    dim = box.dim
    corners = np.empty((2**dim, dim))
    for m in range(2**dim):
        for i in range(dim):
            corners[m, i] = box.hi[i] if (m >> i) & 1 else box.lo[i]
    return corners


def rep_apply_exp(
    X: LieAlgebraElement, f: OrbitFunction, model: GroupModel
) -> OrbitFunction:
    """Action of U(exp(-X)) written directly in algebra coordinates:

    (U(e^{-X}) f)(k) = |det e^{-X_q}|^{1/2} e^{-i k.(f_plus(-X_q) x_p)} f(k e^{-X_q})

    Agrees pointwise with rep_apply(inverse(exp_map(X)), f).
    """
    if not model.exp_domain.contains(X.x_q):
        raise DomainError("x_q outside the exponential domain")
    Xq = model.x_q_matrix(X.x_q)
    em = matrix_exp(-Xq, model.series)
    shift = f_plus(-Xq, model.series) @ X.x_p
    pref = float(np.sqrt(det_abs(em)))
    base = f.evaluate

    def evaluate(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return pref * np.exp(-1j * (pts @ shift)) * base(pts @ em)

    corners = _box_corners(f.support_hint) @ np.linalg.inv(em)
    hint = Box(tuple(corners.min(axis=0)), tuple(corners.max(axis=0)))
    return OrbitFunction(f.orbit, evaluate, hint, f.norm_cache)


def duflo_moore_apply(
    f: OrbitFunction, model: GroupModel, power: int = 1
) -> OrbitFunction:
    """Apply C^{power} for power +-1: multiplication by ((2 pi)^{n/2} c^{1/2})^power."""
    if power not in (1, -1):
        raise ValueError("power must be +1 or -1")
    pref = (2.0 * np.pi) ** (power * model.n / 2.0)
    base = f.evaluate

    def evaluate(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        vals = base(pts)
        c = dm_density_many(pts, model)
        nz = vals != 0
        out = np.zeros_like(vals)
        out[nz] = pref * c[nz] ** (0.5 * power) * vals[nz]
        return out

    return OrbitFunction(f.orbit, evaluate, f.support_hint, None)


# ---------------------------------------------------------------------------
# admissibility / orthogonality by honest group quadrature
# ---------------------------------------------------------------------------


def _matrix_coefficient_grid(
    eta: OrbitFunction,
    phi: OrbitFunction,
    model: GroupModel,
    xq_nodes: np.ndarray,
    xp_nodes: np.ndarray,
    k_nodes: np.ndarray,
    k_weights: np.ndarray,
):
    """<U(exp(x_q, x_p)) eta | phi> on the product of the two node sets."""
    out = np.empty((xq_nodes.shape[0], xp_nodes.shape[0]), dtype=complex)
    phi_vals = np.conj(phi.evaluate(k_nodes))  # conj(phi) appears below
    for a, xq in enumerate(xq_nodes):
        Xq = model.x_q_matrix(xq)
        h = matrix_exp(Xq, model.series)
        F = f_plus(Xq, model.series)
        pref = float(np.sqrt(det_abs(h)))
        inner_vals = np.conj(eta.evaluate(k_nodes @ h)) * np.conj(phi_vals) * k_weights
        # <U eta | phi> = pref * int e^{-i k.b} conj(eta(k h)) phi(k) dk, b = F x_p
        kprime = k_nodes @ F  # (Nk, n)
        phase = np.exp(-1j * (kprime @ xp_nodes.T))  # (Nk, Np)
        out[a] = inner_vals @ phase * pref
    return out


def admissibility_integral(
    eta: OrbitFunction,
    model: GroupModel,
    xq_halfwidth: float = 3.0,
    xp_halfwidth: float = 6.0,
    xq_points: int = 16,
    xp_points: int = 24,
    k_points: int = 40,
) -> float:
    """Group integral of |<U(g) eta | eta>|^2 by quadrature in exp coordinates.

    The integral runs over a truncated coordinate box with the left-Haar
    density as weight; finiteness (admissibility) shows up as stability of
    the value under box growth.
    """
    return orthogonality_integral(eta, eta, eta, eta, model,
                                  xq_halfwidth, xp_halfwidth,
                                  xq_points, xp_points, k_points).real


def orthogonality_integral(
    eta1: OrbitFunction,
    phi1: OrbitFunction,
    eta2: OrbitFunction,
    phi2: OrbitFunction,
    model: GroupModel,
    xq_halfwidth: float = 3.0,
    xp_halfwidth: float = 6.0,
    xq_points: int = 16,
    xp_points: int = 24,
    k_points: int = 40,
) -> complex:
    """integral over G of conj(<U eta2|phi2>) <U eta1|phi1> d mu_G."""
    n = model.n
    hw = model.exp_domain.clip_halfwidths(np.full(n, xq_halfwidth), n)
    xq_nodes, xq_w = tensor_quadrature("gauss", xq_points, Box(tuple(-hw), tuple(hw)))
    xp_nodes, xp_w = tensor_quadrature(
        "gauss", xp_points, Box.cube(xp_halfwidth, n)
    )
    kbox = _joint_box(eta1, phi1, eta2, phi2)
    k_nodes, k_w = tensor_quadrature("gauss", k_points, kbox)

    m1 = _matrix_coefficient_grid(eta1, phi1, model, xq_nodes, xp_nodes, k_nodes, k_w)
    if (eta2 is eta1) and (phi2 is phi1):
        m2 = m1
    else:
        m2 = _matrix_coefficient_grid(eta2, phi2, model, xq_nodes, xp_nodes, k_nodes, k_w)

    # d mu_G in exp coordinates: m_G(x) dx = |det f_plus(-Xq) det f_plus(-ad Xq)| dx
    Xq = model.x_q_matrix(xq_nodes)
    ad = model.ad_of_coords(xq_nodes)
    mG = det_abs(f_plus(-Xq, model.series)) * det_abs(f_plus(-ad, model.series))
    weights = (xq_w * mG)[:, None] * xp_w[None, :]
    return complex(np.sum(np.conj(m2) * m1 * weights))


def duflo_moore_prediction(
    eta1: OrbitFunction,
    phi1: OrbitFunction,
    eta2: OrbitFunction,
    phi2: OrbitFunction,
    model: GroupModel,
    npts: int = 96,
) -> complex:
    """<C eta1 | C eta2> <phi2 | phi1> evaluated by orbit quadrature."""
    c1 = duflo_moore_apply(eta1, model, 1)
    c2 = duflo_moore_apply(eta2, model, 1)
    return orbit_inner(c1, c2, model, npts) * orbit_inner(phi2, phi1, model, npts)


# ---------------------------------------------------------------------------
# flat phase space baseline
# ---------------------------------------------------------------------------


def flat_wigner(
    phi: Callable,
    psi: Callable,
    q,
    p,
    h_const: float = 2.0 * np.pi,
    halfwidth: float = 10.0,
    npts: int = 256,
) -> complex:
    """Ordinary phase-space distribution on R^{2n}:

    (1/h^n) integral conj(phi(q - x/2)) e^{-2 pi i x.p/h} psi(q + x/2) dx.

    phi and psi map (m, n) arrays to (m,) complex values; q and p are
    n-vectors.  Real-valued when phi == psi.
    """
    q = np.asarray(q, dtype=float).reshape(-1)
    p = np.asarray(p, dtype=float).reshape(-1)
    n = q.size
    nodes, weights = tensor_quadrature("gauss", npts, Box.cube(halfwidth, n))
    a = np.conj(np.asarray(phi(q[None] - nodes / 2.0), dtype=complex))
    b = np.asarray(psi(q[None] + nodes / 2.0), dtype=complex)
    phase = np.exp(-2j * np.pi * (nodes @ p) / h_const)
    return complex(np.sum(weights * a * phase * b) / h_const**n)


def flat_wigner_grid(phi, psi, q_axis, p_axis, h_const=2.0 * np.pi,
                     halfwidth: float = 10.0, npts: int = 256) -> np.ndarray:
    """flat_wigner tabulated on a 1-D q_axis x p_axis lattice (n = 1)."""
    x, w = quad_rule_1d("gauss", npts, -halfwidth, halfwidth)
    q = np.asarray(q_axis, dtype=float)
    p = np.asarray(p_axis, dtype=float)
    a = np.conj(np.asarray(phi((q[:, None] - x[None, :] / 2.0).reshape(-1, 1)),
                           dtype=complex)).reshape(q.size, x.size)
    b = np.asarray(psi((q[:, None] + x[None, :] / 2.0).reshape(-1, 1)),
                   dtype=complex).reshape(q.size, x.size)
    kernel = np.exp(-2j * np.pi * np.outer(x, p) / h_const)  # (Nx, Np)
    return ((a * b) * w[None, :]) @ kernel / h_const
