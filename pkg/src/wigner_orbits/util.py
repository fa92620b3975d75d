"""Small shared helpers: boxes, 1-D quadrature rules, tensor grids."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .errors import QuadratureBudgetExceeded


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; lo/hi are length-n float arrays."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("lo/hi length mismatch")
        if any(l >= h for l, h in zip(self.lo, self.hi)):
            raise ValueError("empty box")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        return np.all((x > lo) & (x < hi), axis=-1)

    def scaled(self, factor: float) -> "Box":
        lo = np.asarray(self.lo)
        hi = np.asarray(self.hi)
        mid = 0.5 * (lo + hi)
        half = 0.5 * (hi - lo) * factor
        return Box(tuple(mid - half), tuple(mid + half))

    @staticmethod
    def cube(halfwidth: float, dim: int) -> "Box":
        return Box((-halfwidth,) * dim, (halfwidth,) * dim)


@lru_cache(maxsize=64)
def _gl_cache(npts: int):
    x, w = roots_legendre(npts)
    return x, w


def quad_rule_1d(kind: str, npts: int, lo: float, hi: float):
    """Nodes and weights on (lo, hi) for 'gauss' or 'trapezoid'."""
    if kind == "gauss":
        x, w = _gl_cache(npts)
        half = 0.5 * (hi - lo)
        return lo + half * (x + 1.0), half * w
    if kind == "trapezoid":
        x = np.linspace(lo, hi, npts)
        w = np.full(npts, (hi - lo) / (npts - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return x, w
    raise ValueError(f"unknown quadrature rule {kind!r}")


def tensor_quadrature(kind: str, npts: int, box: Box, budget: int = 1 << 24):
    """Tensor-product rule on a box.

    Returns (nodes, weights) with nodes of shape (N, dim) in C order and
    weights of shape (N,).  Raises QuadratureBudgetExceeded when the node
    count would pass the budget.
    """
    dim = box.dim
    total = npts**dim
    if total > budget:
        raise QuadratureBudgetExceeded(
            f"{npts}^{dim} = {total} quadrature nodes exceed budget {budget}"
        )
    axes = [quad_rule_1d(kind, npts, lo, hi) for lo, hi in zip(box.lo, box.hi)]
    grids = np.meshgrid(*[a[0] for a in axes], indexing="ij")
    nodes = np.stack([g.reshape(-1) for g in grids], axis=-1)
    wgrids = np.meshgrid(*[a[1] for a in axes], indexing="ij")
    weights = np.ones(total)
    for wg in wgrids:
        weights = weights * wg.reshape(-1)
    return nodes, weights


def uniform_axis(lo: float, hi: float, count: int) -> np.ndarray:
    if count < 2:
        raise ValueError("axis needs at least 2 points")
    return np.linspace(lo, hi, count)


def trapezoid_weights(axis: np.ndarray) -> np.ndarray:
    w = np.full(axis.size, axis[1] - axis[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w
