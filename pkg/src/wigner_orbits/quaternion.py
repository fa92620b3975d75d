"""Quaternion arithmetic in two equivalent pictures.

A quaternion x0 + x1 i + x2 j + x3 k is held as a length-4 float array.
Internally the 2x2 complex representation

    [[x0 + i x1, x2 + i x3],
     [-x2 + i x3, x0 - i x1]]

drives products and inverses, while left_matrix() gives the 4x4 real
matrix of left multiplication acting on coordinate column vectors.
"""

from __future__ import annotations

import numpy as np

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def to_complex2(q: np.ndarray) -> np.ndarray:
    x0, x1, x2, x3 = np.asarray(q, dtype=float)
    return np.array(
        [[x0 + 1j * x1, x2 + 1j * x3], [-x2 + 1j * x3, x0 - 1j * x1]]
    )


def from_complex2(m: np.ndarray) -> np.ndarray:
    return np.array([m[0, 0].real, m[0, 0].imag, m[0, 1].real, m[0, 1].imag])


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return from_complex2(to_complex2(a) @ to_complex2(b))


def conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def norm(q: np.ndarray) -> float:
    return float(np.linalg.norm(q))


def inverse(q: np.ndarray) -> np.ndarray:
    n2 = float(np.dot(q, q))
    if n2 == 0.0:
        raise ZeroDivisionError("zero quaternion has no inverse")
    return conjugate(q) / n2


def left_matrix(q: np.ndarray) -> np.ndarray:
    """4x4 real matrix of p -> q p on coordinates."""
    x0, x1, x2, x3 = np.asarray(q, dtype=float)
    return np.array(
        [
            [x0, -x1, -x2, -x3],
            [x1, x0, -x3, x2],
            [x2, x3, x0, -x1],
            [x3, -x2, x1, x0],
        ]
    )


def from_left_matrix(M: np.ndarray) -> np.ndarray:
    """Inverse of left_matrix (first column carries the coordinates)."""
    return np.asarray(M, dtype=float)[:, 0].copy()


def log(q: np.ndarray) -> np.ndarray:
    """Principal logarithm; requires q away from the negative-real ray."""
    q = np.asarray(q, dtype=float)
    r = norm(q)
    if r == 0.0:
        raise ValueError("log of the zero quaternion")
    u = q / r
    v = u[1:]
    s = np.linalg.norm(v)
    angle = np.arctan2(s, u[0])
    if s < 1e-12:
        if u[0] < 0:
            raise ValueError("log undefined on the negative-real ray")
        vec = v  # angle ~ 0, v/sin ~ v
    else:
        vec = v * (angle / s)
    return np.concatenate([[np.log(r)], vec])
