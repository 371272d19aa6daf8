"""Linearized cross-ratio equations and the tangent spaces they cut out.

A tangent vector ``x`` is the logarithmic derivative of ``X`` along a
deformation.  It lies in ``W`` when the link sums of ``x`` vanish at every
vertex, and in the tangent space of the pattern when the linearized sum
equation holds as well.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .crossratio import CrossRatioSystem, link_edges, sum_coefficients
from .surface import Triangulation


class NotInW(ValueError):
    pass


class DegenerateLink(ValueError):
    pass


def linearized_residuals(X: CrossRatioSystem, x) -> np.ndarray:
    """Per vertex: (link sum of x, linearized sum equation); shape (n, 2)."""
    x = np.asarray(x, dtype=complex)
    T = X.triangulation
    out = np.empty((T.n_vertices, 2), dtype=complex)
    for i in range(T.n_vertices):
        e, coef = sum_coefficients(X, i)
        out[i, 0] = x[e].sum()
        out[i, 1] = (coef * x[e]).sum()
    return out


def complex_constraints(X: CrossRatioSystem) -> np.ndarray:
    """Rows: link-sum equation then linearized sum equation for each vertex."""
    T = X.triangulation
    A = np.zeros((2 * T.n_vertices, T.n_edges), dtype=complex)
    for i in range(T.n_vertices):
        e, coef = sum_coefficients(X, i)
        np.add.at(A[2 * i], e, 1.0)
        np.add.at(A[2 * i + 1], e, coef)
    return A


def real_constraints(X: CrossRatioSystem) -> np.ndarray:
    """Rows: link sum, real and imaginary part of the linearized sum, per vertex."""
    A = complex_constraints(X)
    n = X.triangulation.n_vertices
    R = np.empty((3 * n, A.shape[1]))
    R[0::3] = A[0::2].real
    R[1::3] = A[1::2].real
    R[2::3] = A[1::2].imag
    return R


@dataclass
class KernelBasis:
    basis: np.ndarray  # columns, orthonormal
    singular_values: np.ndarray
    tol: float
    rank: int
    field: str
    ill_conditioned: bool

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def to_dict(self) -> dict:
        return {
            "field": self.field,
            "dim": self.dim,
            "rank": self.rank,
            "tol": self.tol,
            "singular_values": self.singular_values.tolist(),
            "ill_conditioned": self.ill_conditioned,
        }


def null_space(A: np.ndarray, tol: float = 1e-9, field: str = "complex") -> KernelBasis:
    """SVD null space; singular values below ``tol * s_max`` count as zero."""
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    cutoff = tol * (s[0] if s.size else 1.0)
    rank = int((s > cutoff).sum())
    # flag spectra without a clean decade on either side of the cutoff
    ill = bool(np.any((s > cutoff / 10) & (s < cutoff * 10)))
    basis = vh[rank:].conj().T
    if field == "real":
        basis = basis.real
    return KernelBasis(basis, s, tol, rank, field, ill)


def kernel_complex(X: CrossRatioSystem, tol: float = 1e-9) -> KernelBasis:
    return null_space(complex_constraints(X), tol, "complex")


def kernel_real(X: CrossRatioSystem, tol: float = 1e-9) -> KernelBasis:
    return null_space(real_constraints(X), tol, "real")


# --- the lift map h ----------------------------------------------------------------

def lift_matrix(T: Triangulation) -> np.ndarray:
    """Matrix of h: a -> x with x_ij = a_ki - a_il + a_lj - a_jk."""
    H = np.zeros((T.n_edges, T.n_edges))
    for e, (h, t) in enumerate(T.edges):
        eo = T.edge_of
        H[e, eo[T.prev(h)]] += 1
        H[e, eo[T.next(t)]] -= 1
        H[e, eo[T.prev(t)]] += 1
        H[e, eo[T.next(h)]] -= 1
    return H


_pinv_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


def _lift_pinv(T: Triangulation) -> np.ndarray:
    if T not in _pinv_cache:
        _pinv_cache[T] = np.linalg.pinv(lift_matrix(T))
    return _pinv_cache[T]


def apply_h(T: Triangulation, a) -> np.ndarray:
    return lift_matrix(T) @ np.asarray(a)


def w_defect(T: Triangulation, x) -> float:
    """Largest link sum of ``x``; zero exactly on W."""
    x = np.asarray(x)
    return float(max(abs(x[link_edges(T, i)].sum()) for i in range(T.n_vertices)))


def lift(T: Triangulation, x) -> np.ndarray:
    """Minimum-norm ``a`` with ``h(a) = x``."""
    x = np.asarray(x)
    defect = w_defect(T, x)
    if defect > 1e-10 * max(1.0, float(np.linalg.norm(x))):
        raise NotInW(f"link sums of x reach {defect:.3g}")
    return _lift_pinv(T) @ x


# --- vertex moves ------------------------------------------------------------------

def _walk_positions(P, i: int):
    T = P.triangulation
    walk = P.domain.walk_vertex(T.links[i].corners[0], ())
    spokes = [P.segment(h, w) for h, w in walk]
    zi = spokes[0][0]
    if max(abs(s[0] - zi) for s in spokes) > 1e-8 * max(1.0, abs(zi)):
        raise DegenerateLink(f"spokes at vertex {i} do not share their origin")
    return walk, zi, np.array([s[1] for s in spokes])


def vertex_move_field(X: CrossRatioSystem, P, i: int) -> np.ndarray:
    """Change of log cross ratios when vertex ``i`` alone moves.

    Built from the developed neighbours ``z_1..z_r`` of a lift of ``i`` in
    clockwise order with the scale ``c = (z_r - z_i)(z_1 - z_i)/(z_1 - z_r)``.
    """
    T = X.triangulation
    walk, zi, z = _walk_positions(P, i)
    r = len(z)
    if r < 3:
        raise DegenerateLink(f"vertex {i} has degree {r}")
    d = z - zi
    if np.min(np.abs(d)) < 1e-12 or abs(z[0] - z[-1]) < 1e-12:
        raise DegenerateLink(f"coincident developed points around vertex {i}")
    c = (z[-1] - zi) * (z[0] - zi) / (z[0] - z[-1])
    inv = 1.0 / d
    x = np.zeros(T.n_edges, dtype=complex)
    for m, (h, _w) in enumerate(walk):
        x[T.edge_of[h]] += c * (inv[m - 1] - inv[(m + 1) % r])
        nxt = walk[(m + 1) % r][0]
        x[T.edge_of[T.next(nxt)]] += c * (inv[(m + 1) % r] - inv[m])
    return x


def vertex_lift_field(X: CrossRatioSystem, i: int) -> np.ndarray:
    """``h(a)`` for the lift ``a`` supported on the spokes of ``i`` (loop-free only).

    On spoke ``m`` the lift carries the tail sum of partial products
    ``P_m + ... + P_r`` of the clockwise link.
    """
    T = X.triangulation
    if T.has_loops():
        raise DegenerateLink("the spoke lift needs a triangulation without loop edges")
    e, coef = sum_coefficients(X, i)
    a = np.zeros(T.n_edges, dtype=complex)
    np.add.at(a, e, coef)
    return apply_h(T, a)


@dataclass
class RigidityReport:
    rigid: bool | None
    rank: int
    n_fields: int
    singular_values: np.ndarray
    implied_dim_real: int | None
    measured_dim_real: int
    degenerate: str | None = None

    def to_dict(self) -> dict:
        return {
            "rigid": self.rigid,
            "rank": self.rank,
            "n_fields": self.n_fields,
            "singular_values": self.singular_values.tolist(),
            "implied_dim_real": self.implied_dim_real,
            "measured_dim_real": self.measured_dim_real,
            "degenerate": self.degenerate,
        }


def rigidity_check(X: CrossRatioSystem, P=None, tol: float = 1e-9) -> RigidityReport:
    """Infinitesimal rigidity via independence of the real/imaginary vertex fields."""
    from .holonomy import develop

    T = X.triangulation
    measured = kernel_real(X, tol).dim
    low = [i for i in range(T.n_vertices) if T.links[i].degree < 3]
    if low:
        return RigidityReport(None, 0, 2 * T.n_vertices, np.zeros(0), None, measured,
                              f"vertices of degree < 3: {low}")
    if P is None:
        P = develop(X)
    fields = [vertex_move_field(X, P, i) for i in range(T.n_vertices)]
    beta = np.column_stack([f for x in fields for f in (x.real, x.imag)])
    s = np.linalg.svd(beta, compute_uv=False)
    scale = max(s[0] if s.size else 0.0, 1.0)
    rank = int((s > tol * scale).sum())
    n_fields = beta.shape[1]
    return RigidityReport(rank == n_fields, rank, n_fields, s,
                          T.n_edges - T.n_vertices - rank, measured)
