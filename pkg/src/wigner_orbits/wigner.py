"""Phase-space transform on coadjoint orbits, and its structural checks.

For a pair of orbit signals the transform at gamma = (gamma_q, gamma_p) is

    W(phi, psi | gamma) = (2 pi)^{-n/2} *
        integral over the exp-domain of x_q of
            e^{-i gamma_q . x_q}
            conj(psi(gamma_p e^{X_q/2} sinch(X_q/2)^{-1}))
            phi(gamma_p e^{-X_q/2} sinch(X_q/2)^{-1})
            c(gamma_p sinch(X_q/2)^{-1})^{-1/2} c(gamma_p)^{-1/2}
            |det sinch(ad X_q/2) / det sinch(X_q/2)|^{1/2}  dx_q

with c the orbit density (1/|delta| after the basis normalization).  The
two warped arguments come from f_plus(-/+ X_q) inverses through linear
solves, never a naive inversion near small eigenvalues.

Conventions established by direct computation and locked by tests:

* overlap: integral of conj(W1) W2 / sigma over the dual = <phi1|phi2><psi2|psi1>;
* marginal: integral of W c(gamma_p) d gamma_q = (2 pi)^{n/2} conj(psi) phi
  at gamma_p (conjugate on the second signal, constant included);
* covariance: W(U(g0) phi, U(g0) psi | gamma) = W(phi, psi | gamma') where
  gamma' = gamma^T M(-b0, h0), i.e. the coadjoint motion of (b0, h0) with
  the translation reflected.  For pure-H elements this is the plain
  coadjoint action.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegeneratePoint, DomainError, GridMismatch
from .group import CoadjointPoint, GroupElement, GroupModel, adjoint_matrix_h
from .matrixcalc import f_plus, sinch
from .orbits import (
    OrbitDescriptor,
    _orbit_index,
    classify_labels,
    descriptor,
    sigma_many,
)
from .representation import OrbitFunction, orbit_inner, rep_apply
from .util import Box, quad_rule_1d, uniform_axis, trapezoid_weights

_DET_GUARD = 1e-12


@dataclass(frozen=True)
class QuadratureSpec:
    """Rule for the x_q integral: 'gauss' or 'trapezoid' tensor rule."""

    rule: str = "gauss"
    points_per_dim: int = 128
    domain: Optional[Box] = None
    rel_tol: float = 1e-6

    def __post_init__(self):
        if self.rule not in ("gauss", "trapezoid"):
            raise ValueError("rule must be 'gauss' or 'trapezoid'")
        if self.points_per_dim < 16:
            raise ValueError("points_per_dim must be >= 16")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "points_per_dim": self.points_per_dim,
            "domain": None
            if self.domain is None
            else [list(self.domain.lo), list(self.domain.hi)],
            "rel_tol": self.rel_tol,
        }


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform evaluation lattice: gamma_q axes x gamma_p axes on one orbit."""

    orbit: str
    gamma_q_axes: tuple  # ((lo, hi, count), ...) length n
    gamma_p_axes: tuple

    def __post_init__(self):
        if len(self.gamma_q_axes) != len(self.gamma_p_axes):
            raise ValueError("gamma_q and gamma_p need the same dimension")

    @property
    def n(self) -> int:
        return len(self.gamma_q_axes)

    def q_axes(self):
        return [uniform_axis(lo, hi, c) for lo, hi, c in self.gamma_q_axes]

    def p_axes(self):
        return [uniform_axis(lo, hi, c) for lo, hi, c in self.gamma_p_axes]

    def p_nodes(self) -> np.ndarray:
        grids = np.meshgrid(*self.p_axes(), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=-1)

    def q_shape(self):
        return tuple(c for _, _, c in self.gamma_q_axes)

    def p_shape(self):
        return tuple(c for _, _, c in self.gamma_p_axes)

    def cell_volume(self) -> float:
        vol = 1.0
        for lo, hi, c in self.gamma_q_axes + self.gamma_p_axes:
            vol *= (hi - lo) / (c - 1)
        return vol

    def to_dict(self) -> dict:
        return {
            "orbit": self.orbit,
            "gamma_q_axes": [list(a) for a in self.gamma_q_axes],
            "gamma_p_axes": [list(a) for a in self.gamma_p_axes],
        }

    @staticmethod
    def from_dict(d: dict) -> "PhaseSpaceGrid":
        return PhaseSpaceGrid(
            d["orbit"],
            tuple((a[0], a[1], int(a[2])) for a in d["gamma_q_axes"]),
            tuple((a[0], a[1], int(a[2])) for a in d["gamma_p_axes"]),
        )


@dataclass
class WignerGrid:
    grid: PhaseSpaceGrid
    values: np.ndarray  # complex, shape q_shape + p_shape
    mask: np.ndarray  # bool over flattened p nodes; True = on-orbit
    meta: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# the x_q quadrature data, shared between grid nodes
# ---------------------------------------------------------------------------


class _XGrid:
    """Per-quadrature precomputation independent of gamma."""

    def __init__(self, model: GroupModel, quad: QuadratureSpec, box: Box):
        n = model.n
        axes = [
            quad_rule_1d(quad.rule, quad.points_per_dim, lo, hi)
            for lo, hi in zip(box.lo, box.hi)
        ]
        self.axes_nodes = [a[0] for a in axes]
        grids = np.meshgrid(*self.axes_nodes, indexing="ij")
        self.coords = np.stack([g.reshape(-1) for g in grids], axis=-1)
        w = np.ones(self.coords.shape[0])
        wg = np.meshgrid(*[a[1] for a in axes], indexing="ij")
        for g in wg:
            w = w * g.reshape(-1)
        self.shape = tuple(a[0].size for a in axes)

        Xq = model.x_q_matrix(self.coords)
        S = sinch(Xq / 2.0, model.series)
        Fp = f_plus(Xq, model.series)
        Fm = f_plus(-Xq, model.series)

        det_s_hook = model.hooks.get("det_sinch_x_half")
        det_s = (
            np.asarray(det_s_hook(self.coords), dtype=float)
            if det_s_hook is not None
            else np.linalg.det(S)
        )
        det_ad_hook = model.hooks.get("det_sinch_ad_half")
        det_ad = (
            np.asarray(det_ad_hook(self.coords), dtype=float)
            if det_ad_hook is not None
            else np.linalg.det(sinch(model.ad_of_coords(self.coords) / 2.0, model.series))
        )

        ok = model.exp_domain.contains_many(self.coords)
        # inversion guard: sinch and the F factors must stay well-conditioned
        floor = _DET_GUARD * (1.0 + np.abs(S).max()) ** n
        ok &= np.abs(det_s) > floor
        ok &= np.abs(np.linalg.det(Fp)) > floor
        ok &= np.abs(np.linalg.det(Fm)) > floor

        eye = np.eye(n)
        self.inv_s = np.linalg.inv(np.where(ok[:, None, None], S, eye))
        self.inv_fp = np.linalg.inv(np.where(ok[:, None, None], Fp, eye))
        self.inv_fm = np.linalg.inv(np.where(ok[:, None, None], Fm, eye))
        self.weights = np.where(ok, w, 0.0)
        self.measure = np.sqrt(np.abs(det_ad) / np.where(ok, np.abs(det_s), 1.0))
        self.measure[~ok] = 0.0


def _c_inv_sqrt(points: np.ndarray, model: GroupModel) -> np.ndarray:
    """c(points)^{-1/2} as a continuous function; zero on orbit boundaries."""
    absd = np.abs(model._delta_many(points))
    if model.normalized or not model.orbit_reps:
        return np.sqrt(absd)
    labels = classify_labels(points, model)
    scale = np.ones(points.shape[0])
    for i, rep in enumerate(model.orbit_reps):
        scale[labels == i] = abs(model._rep_delta[rep.label])
    return np.sqrt(absd / scale)


def _g_values(xg: _XGrid, phi, psi, gamma_p, model, count_mixing=False):
    """Non-phase part of the integrand over the x grid, including weights."""
    gp = np.asarray(gamma_p, dtype=float)
    u_plus = np.einsum("j,mji->mi", gp, xg.inv_fm)
    u_minus = np.einsum("j,mji->mi", gp, xg.inv_fp)
    v = np.einsum("j,mji->mi", gp, xg.inv_s)
    cw = _c_inv_sqrt(v, model) * float(_c_inv_sqrt(gp[None], model)[0])
    vals = (
        np.conj(psi.evaluate(u_plus))
        * phi.evaluate(u_minus)
        * cw
        * xg.measure
        * xg.weights
    )
    mixing = 0
    if count_mixing:
        lab = classify_labels(gp[None], model)[0]
        lp = classify_labels(u_plus, model)
        lm = classify_labels(u_minus, model)
        crossed = (lp != lab) | (lm != lab)
        mixing = int(np.count_nonzero(crossed & (vals != 0)))
    return vals, mixing


def resolve_box(
    quad: QuadratureSpec,
    model: GroupModel,
    phi: OrbitFunction = None,
    psi: OrbitFunction = None,
    gamma_p=None,
    start_halfwidth: float = 4.0,
) -> Box:
    """Quadrature box: the given domain clipped to the exp-domain, or an
    adaptive centered box grown (at most 3 doublings) until the integrand
    tail at the box shell is below rel_tol of the bulk."""
    n = model.n
    if quad.domain is not None:
        hw_hi = model.exp_domain.clip_halfwidths(np.asarray(quad.domain.hi), n)
        hw_lo = -model.exp_domain.clip_halfwidths(-np.asarray(quad.domain.lo), n)
        return Box(tuple(hw_lo), tuple(hw_hi))
    hw = model.exp_domain.clip_halfwidths(np.full(n, start_halfwidth), n)
    free = np.array(
        [
            model.exp_domain.clip_halfwidths(np.full(n, 1e9), n)[i] > 1e8
            for i in range(n)
        ]
    )
    if phi is None or gamma_p is None:
        return Box(tuple(-hw), tuple(hw))
    coarse = QuadratureSpec("gauss", 17, None, quad.rel_tol)
    for _ in range(4):
        box = Box(tuple(-hw), tuple(hw))
        xg = _XGrid(model, coarse, box)
        vals, _ = _g_values(xg, phi, psi, gamma_p, model)
        mags = np.abs(vals).reshape(xg.shape)
        bulk = mags.max()
        if bulk == 0.0:
            return box
        shell = 0.0
        for d in range(n):
            shell = max(shell, np.moveaxis(mags, d, 0)[0].max())
            shell = max(shell, np.moveaxis(mags, d, 0)[-1].max())
        if shell <= quad.rel_tol * bulk or not free.any():
            return box
        hw = np.where(free, hw * 2.0, hw)
    return Box(tuple(-hw), tuple(hw))


# ---------------------------------------------------------------------------
# point and grid evaluation
# ---------------------------------------------------------------------------


def wigner_point(
    phi: OrbitFunction,
    psi: OrbitFunction,
    gamma: CoadjointPoint,
    model: GroupModel,
    quad: QuadratureSpec = QuadratureSpec(),
    _xg: _XGrid = None,
) -> complex:
    """Transform value at a single dual point."""
    lab = classify_labels(gamma.gamma_p[None], model)[0]
    if lab < 0:
        raise DegeneratePoint("gamma_p is not on an open orbit")
    if _xg is None:
        box = resolve_box(quad, model, phi, psi, gamma.gamma_p)
        _xg = _XGrid(model, quad, box)
    vals, _ = _g_values(_xg, phi, psi, gamma.gamma_p, model)
    phase = np.exp(-1j * (_xg.coords @ gamma.gamma_q))
    pref = (2.0 * np.pi) ** (-model.n / 2.0)
    return complex(pref * np.sum(vals * phase))


def _phase_kernels(grid: PhaseSpaceGrid, xg: _XGrid):
    kernels = []
    for (lo, hi, count), xnodes in zip(grid.gamma_q_axes, xg.axes_nodes):
        gq = uniform_axis(lo, hi, count)
        kernels.append(np.exp(-1j * np.outer(gq, xnodes)))
    return kernels


def _contract(gvals: np.ndarray, kernels) -> np.ndarray:
    # gvals shaped like the x grid; contract each x axis against its kernel,
    # appending the corresponding gamma_q axis at the end
    T = gvals
    for K in kernels:
        T = np.tensordot(T, K.T, axes=([0], [0]))
    return T


def wigner_grid(
    phi: OrbitFunction,
    psi: OrbitFunction,
    grid: PhaseSpaceGrid,
    model: GroupModel,
    quad: QuadratureSpec = QuadratureSpec(),
    threads: int = None,
) -> WignerGrid:
    """Evaluate the transform on a full phase-space lattice.

    The non-phase integrand is independent of gamma_q, so each gamma_p node
    costs one integrand evaluation plus separable Fourier-kernel
    contractions over the uniform gamma_q axes.  Nodes whose gamma_p falls
    off the requested orbit are masked, not silently included.
    """
    if threads is None:
        threads = int(os.environ.get("WIGNER_ORBITS_THREADS", "1"))
    orb = descriptor(model, grid.orbit)
    idx = _orbit_index(model, grid.orbit)
    p_nodes = grid.p_nodes()
    mask = classify_labels(p_nodes, model) == idx

    ref = p_nodes[mask][0] if mask.any() else orb.representative
    box = resolve_box(quad, model, phi, psi, ref)
    xg = _XGrid(model, quad, box)
    kernels = _phase_kernels(grid, xg)
    pref = (2.0 * np.pi) ** (-model.n / 2.0)

    q_shape = grid.q_shape()
    out = np.zeros(q_shape + (p_nodes.shape[0],), dtype=complex)
    mixing_total = np.zeros(1, dtype=int)
    count_mix = not bool(model.hooks.get("is_dihedral_cone", True))

    todo = np.nonzero(mask)[0]

    def run(chunk):
        local_mix = 0
        for ip in chunk:
            vals, mix = _g_values(
                xg, phi, psi, p_nodes[ip], model, count_mixing=count_mix
            )
            local_mix += mix
            out[..., ip] = pref * _contract(vals.reshape(xg.shape), kernels)
        return local_mix

    if threads > 1 and todo.size > 1:
        chunks = np.array_split(todo, threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            mixing_total[0] = sum(pool.map(run, chunks))
    else:
        mixing_total[0] = run(todo)

    values = out.reshape(q_shape + grid.p_shape())
    meta = {
        "group": model.name,
        "orbit": grid.orbit,
        "quadrature": quad.to_dict(),
        "box": [list(box.lo), list(box.hi)],
        "mixing_nodes": int(mixing_total[0]),
        "signals": {},
    }
    return WignerGrid(grid, values, mask, meta)


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------


def check_overlap(
    W1: WignerGrid,
    W2: WignerGrid,
    model: GroupModel,
    signals1=None,
    signals2=None,
):
    """Grid overlap sum against the trace pairing of the two signal pairs.

    lhs = sum conj(W1) W2 sigma^{-1} cellvol over unmasked nodes;
    rhs = <phi1|phi2><psi2|psi1>.  Returns (lhs, rhs, rel_err).
    """
    if W1.grid != W2.grid:
        raise GridMismatch("overlap needs identical grids")
    signals1 = signals1 or W1.meta.get("signals_obj")
    signals2 = signals2 or W2.meta.get("signals_obj")
    if signals1 is None or signals2 is None:
        raise ValueError("signal pairs are needed for the trace side")
    grid = W1.grid
    p_nodes = grid.p_nodes()
    sig = np.zeros(p_nodes.shape[0])
    sig[W1.mask] = sigma_many(p_nodes[W1.mask], model)
    weight = np.zeros(p_nodes.shape[0])
    weight[W1.mask] = grid.cell_volume() / sig[W1.mask]
    nq = int(np.prod(grid.q_shape()))
    v1 = W1.values.reshape(nq, -1)
    v2 = W2.values.reshape(nq, -1)
    lhs = complex(np.sum(np.conj(v1) * v2 * weight[None, :]))
    phi1, psi1 = signals1
    phi2, psi2 = signals2
    rhs = orbit_inner(phi1, phi2, model) * orbit_inner(psi2, psi1, model)
    scale = max(abs(rhs), 1e-12)
    return lhs, rhs, abs(lhs - rhs) / scale


def covariance_probe_image(
    g0: GroupElement, p: CoadjointPoint, model: GroupModel
) -> CoadjointPoint:
    """Dual-point motion matching the transform's covariance.

    gamma -> gamma^T M(-b0, h0): block matrix [[M(h0), 0], [[X b0] M(h0), h0]].
    Fixed by direct computation from the transform's integrand; for b0 = 0
    it coincides with the coadjoint action of (0, h0^{-1})^{-1}.
    """
    n = model.n
    Mh = adjoint_matrix_h(g0.h, model)
    M = np.zeros((2 * n, 2 * n))
    M[:n, :n] = Mh
    M[n:, :n] = model.columns_matrix(g0.b) @ Mh
    M[n:, n:] = g0.h
    out = p.flat @ M
    return CoadjointPoint(out[:n], out[n:], None)


def check_covariance(
    phi: OrbitFunction,
    psi: OrbitFunction,
    g0: GroupElement,
    probe_points,
    model: GroupModel,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Compare W(U(g0)phi, U(g0)psi | gamma) with W(phi, psi | gamma') at the
    probes, gamma' = covariance_probe_image(g0, gamma).  Both sides are
    evaluated exactly at the probes (no interpolation); the return value is
    the maximum deviation relative to the largest probe magnitude."""
    tphi = rep_apply(g0, phi, model)
    tpsi = rep_apply(g0, psi, model)
    lhs, rhs = [], []
    for p in probe_points:
        image = covariance_probe_image(g0, p, model)
        if classify_labels(image.gamma_p[None], model)[0] < 0:
            raise DomainError(f"probe image {image.gamma_p} left the open orbits")
        lhs.append(wigner_point(tphi, tpsi, p, model, quad))
        rhs.append(wigner_point(phi, psi, image, model, quad))
    lhs = np.asarray(lhs)
    rhs = np.asarray(rhs)
    scale = np.abs(rhs).max()
    if scale == 0.0:
        return float(np.abs(lhs).max())
    return float((np.abs(lhs - rhs) / scale).max())


def check_marginal(
    W: WignerGrid, phi: OrbitFunction, psi: OrbitFunction, model: GroupModel
) -> float:
    """Integrate W c(gamma_p) over the gamma_q axes and compare with
    (2 pi)^{n/2} conj(psi(gamma_p)) phi(gamma_p) per gamma_p node.

    The conjugate sits on the second signal: that is the placement the
    transform's integrand actually produces, validated on the phi == psi
    case where both choices coincide.  Returns the max absolute error over
    unmasked gamma_p nodes."""
    grid = W.grid
    qaxes = grid.q_axes()
    nq = [a.size for a in qaxes]
    vals = W.values.reshape(tuple(nq) + (-1,))
    for a in qaxes:
        w = trapezoid_weights(a)
        vals = np.tensordot(w, vals, axes=([0], [0]))
    p_nodes = grid.p_nodes()
    lhs = np.zeros(p_nodes.shape[0], dtype=complex)
    csq = _c_inv_sqrt(p_nodes[W.mask], model)
    lhs[W.mask] = vals[W.mask] / csq**2  # c = (c^{-1/2})^{-2}
    rhs = np.zeros_like(lhs)
    rhs[W.mask] = (
        (2.0 * np.pi) ** (model.n / 2.0)
        * np.conj(psi.evaluate(p_nodes[W.mask]))
        * phi.evaluate(p_nodes[W.mask])
    )
    return float(np.abs(lhs - rhs)[W.mask].max())


def check_support(
    phi: OrbitFunction,
    psi: OrbitFunction,
    foreign_grid: PhaseSpaceGrid,
    model: GroupModel,
    quad: QuadratureSpec = QuadratureSpec(),
) -> float:
    """Largest |W| over a grid lying on an orbit other than the signals'."""
    W = wigner_grid(phi, psi, foreign_grid, model, quad)
    nq = int(np.prod(foreign_grid.q_shape()))
    vals = np.abs(W.values.reshape(nq, -1))
    if not W.mask.any():
        return 0.0
    return float(vals[:, W.mask].max())
