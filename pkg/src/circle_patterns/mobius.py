"""SL(2,C) matrices acting on the Riemann sphere.

Points are handled both as complex numbers and as homogeneous pairs
``(z0, z1)`` representing ``z0 / z1``; ``(1, 0)`` is infinity.
"""

from __future__ import annotations

import numpy as np

INF = complex("inf")


def hom(z) -> np.ndarray:
    """Homogeneous coordinates of a point (complex, ``None``/inf, or a pair)."""
    if z is None:
        return np.array([1.0, 0.0], dtype=complex)
    if np.ndim(z) == 1:
        p = np.asarray(z, dtype=complex)
        if p.shape != (2,) or not np.any(p):
            raise ValueError(f"bad homogeneous point {z!r}")
        return p
    z = complex(z)
    if np.isinf(z.real) or np.isinf(z.imag):
        return np.array([1.0, 0.0], dtype=complex)
    return np.array([z, 1.0], dtype=complex)


def aff(p: np.ndarray) -> complex:
    p = np.asarray(p)
    if p[1] == 0:
        return INF
    return complex(p[0] / p[1])


def bracket(a: np.ndarray, b: np.ndarray) -> complex:
    """``a0*b1 - a1*b0``; equals ``z_a - z_b`` for affine representatives."""
    return a[0] * b[1] - a[1] * b[0]


def unit(p: np.ndarray) -> np.ndarray:
    return p / np.linalg.norm(p)


def normalize(M: np.ndarray) -> np.ndarray:
    """Scale to determinant one (the sign is left to the caller)."""
    M = np.asarray(M, dtype=complex)
    d = np.linalg.det(M)
    if abs(d) == 0:
        raise ValueError("singular matrix")
    return M / np.sqrt(d)


def inv(M: np.ndarray) -> np.ndarray:
    """Inverse of a determinant-one matrix."""
    return np.array([[M[1, 1], -M[0, 1]], [-M[1, 0], M[0, 0]]])


def apply(M: np.ndarray, z) -> complex:
    return aff(M @ hom(z))


def ad(M: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Adjoint action ``M A M^{-1}`` on sl(2,C)."""
    return M @ A @ inv(M)


def from_points(src, dst) -> np.ndarray:
    """The SL(2,C) matrix sending three points ``src`` to ``dst``."""

    def frame(pts):
        p1, p2, p3 = (hom(p) for p in pts)
        B = np.column_stack([p1, p2])
        if abs(np.linalg.det(B)) < 1e-300:
            raise ValueError("coincident points")
        c = np.linalg.solve(B, p3)
        if np.min(np.abs(c)) == 0:
            raise ValueError("coincident points")
        return B * c

    return normalize(frame(dst) @ np.linalg.inv(frame(src)))


def align_sign(M: np.ndarray, ref: np.ndarray) -> np.ndarray:
    """Pick the sign of ``M`` closest to ``ref``."""
    return M if np.linalg.norm(M - ref) <= np.linalg.norm(M + ref) else -M


def projective_defect(M: np.ndarray) -> float:
    """Distance of a determinant-one matrix from the identity in PSL(2,C)."""
    eye = np.eye(2)
    return float(min(np.linalg.norm(M - eye), np.linalg.norm(M + eye)))


def random_sl2(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    M = np.eye(2) + scale * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
    return normalize(M)
