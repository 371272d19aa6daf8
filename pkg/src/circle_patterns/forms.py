"""Skew bilinear forms on tangent vectors of a circle pattern.

Three constructions are compared:

* ``omega_P``: the face sum of Penner type on edge lifts, pushed to W,
* ``omega_cup``: traces of the cup product of edge one-forms over dual cells,
* ``omega_G``: boundary periods of the holonomy cocycle over a fundamental
  domain of dual cells.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import holonomy as ho
from .crossratio import CrossRatioSystem
from .surface import Triangulation, word_inv, word_mul
from .tangent import kernel_complex, kernel_real, lift


class TheoremViolation(AssertionError):
    pass


class DegeneratePair(ValueError):
    pass


# --- face sum on lifts --------------------------------------------------------------

def penner_tilde(T: Triangulation, a, b) -> complex:
    """-2 * sum over faces of a_ij (b_jk - b_ki) + a_jk (b_ki - b_ij) + a_ki (b_ij - b_jk)."""
    a = np.asarray(a)
    b = np.asarray(b)
    E = T.edge_of.reshape(-1, 3)
    A, B = a[E], b[E]
    total = (A[:, 0] * (B[:, 1] - B[:, 2]) + A[:, 1] * (B[:, 2] - B[:, 0])
             + A[:, 2] * (B[:, 0] - B[:, 1]))
    return complex(-2.0 * total.sum())


def omega_P(T: Triangulation, x, y) -> complex:
    return penner_tilde(T, lift(T, x), lift(T, y))


# --- cup product ------------------------------------------------------------------

def cup_triangle(a, b) -> np.ndarray:
    """Cup product of two one-forms on a triangle with boundary values a[0..2], b[0..2]."""
    a1, a2, a3 = a
    b1, b2, b3 = b
    return (a1 @ b2 + a2 @ b3 + a3 @ b1 - a1 @ b3 - a2 @ b1 - a3 @ b2) / 6.0


def _fan(values: list, start: int) -> list:
    """Fan triangles of a polygon with closed boundary values, from corner ``start``."""
    r = len(values)
    v = values[start:] + values[:start]
    tris = []
    d = v[0]
    for m in range(1, r - 1):
        d_next = d + v[m]
        tris.append((d, v[m], -d_next))
        d = d_next
    return tris


def boundary_values(alpha: ho.EdgeOneForm, h: int, word=()) -> list:
    """Values of ``alpha`` around the dual cell at ``origin(h)`` in copy ``word``, counterclockwise."""
    walk = alpha.pattern.domain.walk_vertex(h, word)
    return [alpha.at(hm, wm) for hm, wm in reversed(walk)]


def cup_product_face(alpha: ho.EdgeOneForm, beta: ho.EdgeOneForm, h: int, word=(),
                     start: int = 0) -> np.ndarray:
    """Cup product over the dual cell around ``origin(h)`` in copy ``word``."""
    a = boundary_values(alpha, h, word)
    b = boundary_values(beta, h, word)
    total = np.zeros((2, 2), dtype=complex)
    for ta, tb in zip(_fan(a, start % len(a)), _fan(b, start % len(b))):
        total = total + cup_triangle(ta, tb)
    return total


def omega_cup(x, y, P: ho.DevelopedPattern) -> complex:
    alpha, beta = ho.alpha_form(x, P), ho.alpha_form(y, P)
    return _omega_cup(alpha, beta)


def _omega_cup(alpha, beta) -> complex:
    T = alpha.pattern.triangulation
    return complex(sum(np.trace(cup_product_face(alpha, beta, T.links[v].corners[0]))
                       for v in range(T.n_vertices)))


def trace_pair_identity(zi, zj, zk, zl) -> tuple:
    """Trace of the product of the edge matrices of ij and kl, and its closed form."""
    if zi == zj or zk == zl:
        raise DegeneratePair("edge endpoints coincide")
    A = ho.alpha_matrix(1.0, zi, zj)
    B = ho.alpha_matrix(1.0, zk, zl)
    lhs = complex(np.trace(A @ B))
    rhs = 0.5 - (zi - zk) * (zj - zl) / ((zi - zj) * (zk - zl))
    return lhs, complex(rhs)


# --- boundary periods ----------------------------------------------------------------

@dataclass
class VertexDomain:
    """One lift per vertex, chosen so that their dual cells form a disk.

    ``lift[u] = (h, word)``: the lift of ``u`` is ``origin(h)`` in copy ``word``.
    ``sides[e] = (h, word, far)``: the half-edge ``h`` of edge ``e`` leaves the
    lift of ``origin(h)`` in copy ``word`` and ends at ``word * far^-1`` applied to
    the lift of ``target(h)``, where ``next(h)`` in copy ``far`` leaves that lift.
    """

    lift: dict
    sides: dict = field(default_factory=dict)


def vertex_domain(P: ho.DevelopedPattern, root: int = 0) -> VertexDomain:
    T = P.triangulation
    D = P.domain
    lifts = {root: (T.links[root].corners[0], ())}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for hm, wm in D.walk_vertex(*lifts[u]):
            v = T.target(hm)
            if v not in lifts:
                lifts[v] = (T.next(hm), wm)
                queue.append(v)
    words = {}
    for u, (h, w) in lifts.items():
        words[u] = {hm: wm for hm, wm in D.walk_vertex(h, w)}
    sides = {}
    for e, (h, t) in enumerate(T.edges):
        w = words[T.origin(h)][h]
        w_far = words[T.target(h)][T.next(h)]
        sides[e] = (h, w, w_far)
    return VertexDomain(lifts, sides)


def omega_G(x, y, P: ho.DevelopedPattern, base_face: int | None = None,
            vd: VertexDomain | None = None) -> complex:
    """Pairing of the cocycle of ``x`` with the edge form of ``y`` along paired sides."""
    cocycle = ho.hol(x, P, base_face=base_face)
    beta = ho.alpha_form(y, P)
    return _omega_G(cocycle, beta, vd or vertex_domain(P))


def _omega_G(cocycle: ho.Cocycle, beta: ho.EdgeOneForm, vd: VertexDomain) -> complex:
    # tr(tau_d beta(h in copy w)) with d = w * far^-1, pulled back to the base copy:
    # Ad(rho_w^-1) tau_d = tau_{far^-1} - tau_{w^-1}
    total = 0.0j
    for h, w, far in vd.sides.values():
        if w != far:
            t = cocycle.evaluate(word_inv(far)) - cocycle.evaluate(word_inv(w))
            total += np.trace(t @ beta.values[h])
    return complex(total)


def side_pairing(vd: VertexDomain, e: int):
    """Deck word carrying the lift of ``target(h)`` to the far end of side ``e``."""
    _h, w, far = vd.sides[e]
    return word_mul(w, word_inv(far))


# --- comparison ------------------------------------------------------------------

@dataclass
class TheoremReport:
    tol: float
    goldman: np.ndarray
    cup: np.ndarray
    half_penner: np.ndarray
    max_discrepancy: float
    real_goldman: np.ndarray
    max_imag_real: float
    real_rank: int
    real_singular_values: np.ndarray

    @property
    def passed(self) -> bool:
        return self.max_discrepancy <= self.tol and self.max_imag_real <= self.tol

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "max_discrepancy": self.max_discrepancy,
            "max_imag_on_real_kernel": self.max_imag_real,
            "goldman": self.goldman,
            "cup": self.cup,
            "half_penner": self.half_penner,
            "real_goldman": self.real_goldman.real,
            "real_goldman_rank": self.real_rank,
            "real_goldman_singular_values": self.real_singular_values,
        }


def gram_matrices(X: CrossRatioSystem, basis: np.ndarray, P: ho.DevelopedPattern) -> tuple:
    """(omega_G, omega_cup, omega_P / 2) on all pairs of basis columns."""
    T = X.triangulation
    k = basis.shape[1]
    alphas = [ho.alpha_form(basis[:, i], P) for i in range(k)]
    cocycles = [ho.hol(basis[:, i], P) for i in range(k)]
    lifts = [lift(T, basis[:, i]) for i in range(k)]
    vd = vertex_domain(P)
    G = np.zeros((k, k), dtype=complex)
    C = np.zeros((k, k), dtype=complex)
    H = np.zeros((k, k), dtype=complex)
    for i in range(k):
        for j in range(k):
            G[i, j] = _omega_G(cocycles[i], alphas[j], vd)
            C[i, j] = _omega_cup(alphas[i], alphas[j])
            H[i, j] = 0.5 * penner_tilde(T, lifts[i], lifts[j])
    return G, C, H


def check_theorem(X: CrossRatioSystem, tol: float = 1e-9, P: ho.DevelopedPattern | None = None,
                  rank_tol: float = 1e-9, strict: bool = False) -> TheoremReport:
    """Compare the three forms on the complex kernel and test isotropy on the real one."""
    P = P or ho.develop(X)
    Kc = kernel_complex(X, rank_tol)
    G, C, H = gram_matrices(X, Kc.basis, P)
    disc = max([0.0] + [float(np.abs(A - B).max()) for A, B in ((G, C), (G, H), (C, H)) if A.size])
    Kr = kernel_real(X, rank_tol)
    R, _, _ = gram_matrices(X, Kr.basis.astype(complex), P)
    imag = float(np.abs(R.imag).max()) if R.size else 0.0
    s = np.linalg.svd(R.real, compute_uv=False) if R.size else np.zeros(0)
    rank = int((s > rank_tol * max(s[0], 1.0)).sum()) if s.size else 0
    report = TheoremReport(tol, G, C, H, disc, R, imag, rank, s)
    if strict and not report.passed:
        raise TheoremViolation(f"forms disagree by {disc:.3g}, imaginary part {imag:.3g}")
    return report
