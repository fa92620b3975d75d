"""Matrix-series kernels shared by every other module.

Implements the entire functions used throughout the package:

    sinch(A)            = sum_{k>=0} A^{2k} / (2k+1)!          (= A^{-1} sinh A)
    f_plus(X)           = sum_{k>=0} X^k / (k+1)!              (= e^{X/2} sinch(X/2))
    f_minus_inverse(X)  = (f_plus(-X))^{-1}                    (Bernoulli series)
    matrix_exp(A)       scaling-and-squaring Taylor exponential

All functions accept a single (n, n) array or a stack (..., n, n) and
return the matching shape.  They are pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BasisClosureError, NonConvergence, SingularMatrix

# |B_2k| for k = 1..20 as exact rationals.  Twenty terms cover the series
# for f_minus_inverse well inside its radius of convergence; larger inputs
# take the linear-solve route instead.
_BERNOULLI = tuple(
    p / q
    for p, q in (
        (1, 6),
        (1, 30),
        (1, 42),
        (1, 30),
        (5, 66),
        (691, 2730),
        (7, 6),
        (3617, 510),
        (43867, 798),
        (174611, 330),
        (854513, 138),
        (236364091, 2730),
        (8553103, 6),
        (23749461029, 870),
        (8615841276005, 14322),
        (7709321041217, 510),
        (2577687858367, 6),
        (26315271553053477373, 1919190),
        (2929993913841559, 6),
        (261082718496449122051, 13530),
    )
)

_COND_BOUND = 1e12


@dataclass(frozen=True)
class SeriesSpec:
    """Truncation control for the matrix series."""

    max_terms: int = 64
    abs_tol: float = 1e-14

    def __post_init__(self):
        if self.max_terms < 8:
            raise ValueError("max_terms must be >= 8")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")


DEFAULT_SERIES = SeriesSpec()


def _as_stack(A):
    A = np.asarray(A, dtype=None)
    if A.dtype.kind not in "fc":
        A = A.astype(float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError("expected square matrices")
    if not np.all(np.isfinite(A)):
        raise ValueError("non-finite matrix entries")
    return A


def _radius_bound(A) -> float:
    # min of the 1- and inf-norms bounds the spectral radius from above
    r1 = np.abs(A).sum(axis=-1).max()
    r2 = np.abs(A).sum(axis=-2).max()
    return float(min(r1, r2))


def _eye_like(A):
    n = A.shape[-1]
    return np.broadcast_to(np.eye(n, dtype=A.dtype), A.shape).copy()


def _sinch_series(A, spec: SeriesSpec):
    A2 = A @ A
    term = _eye_like(A)
    total = term.copy()
    for k in range(spec.max_terms):
        term = term @ A2 / ((2 * k + 2) * (2 * k + 3))
        total += term
        if np.abs(term).max() < spec.abs_tol:
            return total
    raise NonConvergence(
        f"sinch series did not reach {spec.abs_tol} in {spec.max_terms} terms"
    )


def sinch(A, spec: SeriesSpec = DEFAULT_SERIES):
    """Even entire series sum A^{2k}/(2k+1)!.

    Direct series for modest spectral radius; for large, well-conditioned
    inputs the identity A sinch(A) = sinh(A) is used through the scaled
    exponential and a linear solve.  Raises NonConvergence when neither
    route applies within the budget.
    """
    A = _as_stack(A)
    if _radius_bound(A) <= 4.0:
        return _sinch_series(A, spec)
    try:
        sinh_a = 0.5 * (matrix_exp(A, spec) - matrix_exp(-A, spec))
        out = np.linalg.solve(A, sinh_a)
        if np.all(np.isfinite(out)):
            return out
    except np.linalg.LinAlgError:
        pass
    # singular input with a large norm bound (e.g. scaled nilpotents):
    # the series still terminates if powers of A die out
    return _sinch_series(A, spec)


def matrix_exp(A, spec: SeriesSpec = DEFAULT_SERIES):
    """Taylor exponential with scaling and squaring."""
    A = _as_stack(A)
    rho = _radius_bound(A)
    s = max(0, int(np.ceil(np.log2(rho))) + 1) if rho > 0.5 else 0
    B = A / (2.0**s)
    term = _eye_like(A)
    total = term.copy()
    converged = False
    for k in range(1, spec.max_terms + 1):
        term = term @ B / k
        total += term
        if np.abs(term).max() < spec.abs_tol:
            converged = True
            break
    if not converged:
        raise NonConvergence("exponential series stalled")
    for _ in range(s):
        total = total @ total
    return total


def f_plus(X, spec: SeriesSpec = DEFAULT_SERIES):
    """Series I + X/2! + X^2/3! + ... (equals e^{X/2} sinch(X/2)).

    Computed by the direct series inside the radius guard; large inputs
    recombine through the scaled exponential and sinch.
    """
    X = _as_stack(X)
    if _radius_bound(X) <= 4.0:
        term = _eye_like(X)
        total = term.copy()
        for k in range(spec.max_terms):
            term = term @ X / (k + 2)
            total += term
            if np.abs(term).max() < spec.abs_tol:
                return total
        raise NonConvergence("f_plus series stalled")
    return matrix_exp(X / 2.0, spec) @ sinch(X / 2.0, spec)


def _check_solvable(M):
    sign, logabsdet = np.linalg.slogdet(M)
    scale = np.log(np.abs(M).max() + 1e-300) * M.shape[-1]
    if np.any(sign == 0) or np.any(logabsdet < scale - np.log(_COND_BOUND)):
        raise SingularMatrix("matrix inverse beyond the condition bound")


def f_minus_inverse(X, spec: SeriesSpec = DEFAULT_SERIES):
    """Inverse of f_plus(-X): I + X/2 + sum (-1)^{k-1} B_k X^{2k}/(2k)!.

    The Bernoulli series is used well inside its convergence radius
    (spectral bound 2.5); otherwise the result comes from solving
    f_plus(-X) Y = I, with SingularMatrix raised past the condition bound.
    """
    X = _as_stack(X)
    if _radius_bound(X) <= 2.5:
        X2 = X @ X
        total = _eye_like(X) + 0.5 * X
        term = _eye_like(X)
        fact = 1.0
        for k in range(1, len(_BERNOULLI) + 1):
            term = term @ X2
            fact *= (2 * k - 1) * (2 * k)
            contrib = ((-1) ** (k - 1) * _BERNOULLI[k - 1] / fact) * term
            total += contrib
            if np.abs(contrib).max() < spec.abs_tol:
                return total
        raise NonConvergence("Bernoulli series needs more than 20 terms")
    F = f_plus(-X, spec)
    _check_solvable(F)
    return np.linalg.inv(F)


def ad_matrix(X, basis, rtol: float = 1e-9):
    """Matrix of the map L -> [X, L] in the given basis.

    basis is a sequence of n matrices; column i of the result holds the
    coordinates of [X, basis[i]].  Raises BasisClosureError when a bracket
    does not decompose in the basis within rtol of its size.
    """
    X = np.asarray(X, dtype=float)
    B = np.stack([np.asarray(b, dtype=float) for b in basis])
    n = B.shape[0]
    flat = B.reshape(n, -1).T  # (n*n, n)
    pinv = np.linalg.pinv(flat)
    out = np.zeros((n, n))
    for i in range(n):
        bracket = X @ B[i] - B[i] @ X
        vec = bracket.reshape(-1)
        coeff = pinv @ vec
        resid = np.linalg.norm(flat @ coeff - vec)
        scale = np.linalg.norm(vec)
        if resid > rtol * (scale + 1.0):
            raise BasisClosureError(
                f"[X, L^{i}] leaves the basis span (residual {resid:.3e})"
            )
        out[:, i] = coeff
    return out


def det_abs(A) -> np.ndarray:
    """|det A| via slogdet, stable for stacks."""
    sign, logdet = np.linalg.slogdet(np.asarray(A))
    return np.where(sign == 0, 0.0, np.exp(logdet))
