"""Developing maps, SL(2,C) holonomy and the cocycle of a tangent vector.

The fundamental domain is a dual spanning tree of faces.  A face copy in the
universal cover is addressed as ``(word, f)``; its developed corners are the
base corners of ``f`` moved by ``rho(word)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import mobius
from .crossratio import CrossRatioSystem
from .surface import FundamentalDomain, Word, fundamental_domain, word_mul


class DegenerateLayout(ValueError):
    pass


class HolonomyInconsistent(ValueError):
    pass


class InfinitePoint(ValueError):
    pass


class FormNotClosed(ValueError):
    pass


class FaceDependence(ValueError):
    pass


DEFAULT_SEED = (0.0, 1.0, complex(0.5, math.sqrt(3) / 2))
SL2_BASIS = np.array([[[1, 0], [0, -1]], [[0, 1], [0, 0]], [[0, 0], [1, 0]]], dtype=complex)


def _fourth_point(X_e, zi, zj, zk):
    """Homogeneous z_l with cross ratio X_e on edge ij next to triangle ijk."""
    l = X_e * mobius.bracket(zj, zk) * zi + mobius.bracket(zi, zk) * zj
    if np.linalg.norm(l) == 0:
        raise DegenerateLayout("developed point vanished")
    return mobius.unit(l)


@dataclass(eq=False)
class DevelopedPattern:
    system: CrossRatioSystem
    domain: FundamentalDomain
    corners: np.ndarray  # (F, 3, 2) homogeneous, base copies
    rho: np.ndarray  # (G, 2, 2), one per generator
    seed: tuple
    normalization: np.ndarray = field(default_factory=lambda: np.eye(2, dtype=complex))
    _rho_cache: dict = field(default_factory=dict, repr=False)

    @property
    def triangulation(self):
        return self.system.triangulation

    def rho_word(self, word: Word) -> np.ndarray:
        M = self._rho_cache.get(word)
        if M is None:
            M = np.eye(2, dtype=complex)
            for s in word:
                g = self.rho[abs(s) - 1]
                M = M @ (g if s > 0 else mobius.inv(g))
            self._rho_cache[word] = M
        return M

    def face_points(self, word: Word, f: int) -> np.ndarray:
        """Affine developed corners of the copy ``word * f``."""
        pts = self.corners[f] @ self.rho_word(word).T if word else self.corners[f]
        if np.any(np.abs(pts[:, 1]) < 1e-12 * np.abs(pts[:, 0])):
            raise InfinitePoint(f"face {f} of copy {word} touches infinity")
        return pts[:, 0] / pts[:, 1]

    def segment(self, h: int, word: Word = ()) -> tuple:
        """Developed (origin, target) of half-edge ``h`` in copy ``word * face(h)``."""
        z = self.face_points(word, h // 3)
        return z[h % 3], z[(h + 1) % 3]

    @property
    def z(self) -> np.ndarray:
        return np.array([self.face_points((), f) for f in range(self.triangulation.n_faces)])

    def vertex_cycle_defects(self) -> list:
        T = self.triangulation
        return [mobius.projective_defect(self.rho_word(self.domain.closing_word(T.links[v].corners[0])))
                for v in range(T.n_vertices)]

    def relator_defect(self) -> float:
        return max(self.vertex_cycle_defects())

    def cross_ratio_defect(self) -> float:
        """Largest relative mismatch between X and the developed quadrilaterals."""
        from .crossratio import cross_ratio_from_points

        T = self.triangulation
        X = self.system.X
        worst = 0.0
        for e, (h, t) in enumerate(T.edges):
            z = self.face_points((), h // 3)
            c = h % 3
            zl = self.face_points(self.domain.cross(h, ()), t // 3)[(t % 3 + 2) % 3]
            val = cross_ratio_from_points(z[c], z[(c + 1) % 3], z[(c + 2) % 3], zl)
            worst = max(worst, abs(val - X[e]) / abs(X[e]))
        return worst

    def conjugated(self, M: np.ndarray) -> "DevelopedPattern":
        """The same development moved by the Mobius map ``M``."""
        M = mobius.normalize(M)
        corners = np.einsum("ij,fcj->fci", M, self.corners)
        corners /= np.linalg.norm(corners, axis=2, keepdims=True)
        rho = np.array([M @ g @ mobius.inv(M) for g in self.rho])
        return DevelopedPattern(self.system, self.domain, corners, rho, self.seed, M @ self.normalization)


def develop(X: CrossRatioSystem, D: FundamentalDomain | None = None, seed=None,
            check: bool = True, renormalize: bool = True) -> DevelopedPattern:
    """Lay out the fundamental domain from ``seed`` (the base face corners)."""
    T = X.triangulation
    if D is None:
        D = fundamental_domain(T)
    seed = DEFAULT_SEED if seed is None else tuple(seed)
    Xv = X.X
    corners = np.zeros((T.n_faces, 3, 2), dtype=complex)
    base = [mobius.unit(mobius.hom(p)) for p in seed]
    corners[D.root] = base
    for g in D.order[1:]:
        h = D.parent_half[g]
        corners[g] = _across(T, corners, Xv, h)

    rho = np.zeros((D.n_generators, 2, 2), dtype=complex)
    for r, h in enumerate(D.positive):
        g = T.twin[h] // 3
        try:
            rho[r] = mobius.from_points(list(corners[g]), list(_across(T, corners, Xv, h)))
        except ValueError as exc:
            raise DegenerateLayout(str(exc)) from exc
    for f in range(T.n_faces):
        for a in range(3):
            if abs(mobius.bracket(corners[f][a], corners[f][(a + 1) % 3])) < 1e-13:
                raise DegenerateLayout(f"face {f} has coincident developed corners")
    P = DevelopedPattern(X, D, corners, rho, seed)
    if renormalize:
        P = _keep_finite(P)
    if check:
        defect = P.relator_defect()
        if defect > 1e-6:
            raise HolonomyInconsistent(f"vertex cycle defect {defect:.3g}")
    return P


def _across(T, corners, Xv, h):
    """Corners of ``face(twin h)`` as developed next to ``face(h)``."""
    f, c = divmod(h, 3)
    zi, zj, zk = corners[f][c], corners[f][(c + 1) % 3], corners[f][(c + 2) % 3]
    zl = _fourth_point(Xv[T.edge_of[h]], zi, zj, zk)
    t = int(T.twin[h])
    out = np.zeros((3, 2), dtype=complex)
    ct = t % 3
    out[ct], out[(ct + 1) % 3], out[(ct + 2) % 3] = zj, zi, zl
    return out


def _keep_finite(P: DevelopedPattern, bound: float = 1e6) -> DevelopedPattern:
    pts = P.corners.reshape(-1, 2)
    far = np.abs(pts[:, 1]) < np.abs(pts[:, 0]) / bound
    if not far.any():
        return P
    finite = pts[~far, 0] / pts[~far, 1]
    w = 1.0 + 2.0 * (np.abs(finite).max() if finite.size else 0.0)
    # z -> 1/(z - w) sends w to infinity and keeps the domain bounded
    return P.conjugated(np.array([[0, 1], [1, -w]], dtype=complex))


# --- the edge one-form -------------------------------------------------------------

def alpha_matrix(x_e: complex, zi: complex, zj: complex) -> np.ndarray:
    s = 0.5 * (zi + zj)
    return x_e / (zj - zi) * np.array([[s, -zi * zj], [1.0, -s]])


@dataclass(eq=False)
class EdgeOneForm:
    """sl(2,C)-valued function on oriented edges of the universal cover."""

    x: np.ndarray
    pattern: DevelopedPattern
    values: np.ndarray  # (3F, 2, 2), half-edges in base copies

    def at(self, h: int, word: Word = ()) -> np.ndarray:
        if not word:
            return self.values[h]
        zi, zj = self.pattern.segment(h, word)
        return alpha_matrix(self.x[self.pattern.triangulation.edge_of[h]], zi, zj)

    def closedness_defect(self) -> float:
        P = self.pattern
        T = P.triangulation
        worst = 0.0
        for v in range(T.n_vertices):
            total = sum(self.at(h, w) for h, w in P.domain.walk_vertex(T.links[v].corners[0]))
            worst = max(worst, float(np.linalg.norm(total)))
        return worst

    def equivariance_defect(self, words) -> float:
        """max ||alpha(g.e) - Ad rho_g alpha(e)|| over the given words and all edges."""
        P = self.pattern
        worst = 0.0
        for word in words:
            g = P.rho_word(word)
            for h in range(len(self.values)):
                worst = max(worst, float(np.linalg.norm(self.at(h, word) - mobius.ad(g, self.values[h]))))
        return worst


def alpha_form(x, P: DevelopedPattern) -> EdgeOneForm:
    x = np.asarray(x, dtype=complex)
    T = P.triangulation
    vals = np.empty((T.n_half_edges, 2, 2), dtype=complex)
    for f in range(T.n_faces):
        z = P.face_points((), f)
        for c in range(3):
            vals[3 * f + c] = alpha_matrix(x[T.edge_of[3 * f + c]], z[c], z[(c + 1) % 3])
    return EdgeOneForm(x, P, vals)


def primitive_m(alpha: EdgeOneForm, check: bool = False) -> np.ndarray:
    """m on the base face copies with m(root) = 0 and m_left - m_right = alpha."""
    P = alpha.pattern
    D = P.domain
    m = np.zeros((P.triangulation.n_faces, 2, 2), dtype=complex)
    for g in D.order[1:]:
        h = D.parent_half[g]
        m[g] = m[h // 3] - alpha.values[h]
    if check:
        defect = alpha.closedness_defect()
        if defect > 1e-8:
            raise FormNotClosed(f"alpha fails to close by {defect:.3g}")
    return m


def integrate_along(alpha: EdgeOneForm, start: np.ndarray, crossings) -> np.ndarray:
    """Carry m across the listed ``(h, word)`` crossings using developed positions."""
    m = start
    for h, word in crossings:
        m = m - alpha.at(h, word)
    return m


def copy_path(D: FundamentalDomain, a: int, b: int, word: Word = ()) -> list:
    """Crossings from face ``a`` to face ``b`` inside the copy ``word``."""
    T = D.triangulation
    up = []
    f = a
    while f != D.root:
        h = D.parent_half[f]
        up.append(int(T.twin[h]))
        f = h // 3
    return [(h, word) for h in up + D.tree_path(b)]


def word_path(D: FundamentalDomain, word: Word) -> list:
    """Crossings from the root copy to ``word * root``."""
    T = D.triangulation
    path = []
    cur: Word = ()
    for s in word:
        r = abs(s) - 1
        h = D.positive[r] if s > 0 else int(T.twin[D.positive[r]])
        path += copy_path(D, D.root, h // 3, cur)
        path.append((h, cur))
        nxt = word_mul(cur, (s,))
        path += copy_path(D, int(T.twin[h]) // 3, D.root, nxt)
        cur = nxt
    return path


# --- cocycles ----------------------------------------------------------------------

@dataclass
class Cocycle:
    tau: np.ndarray  # (G, 2, 2)
    rho: np.ndarray  # (G, 2, 2)

    def letter(self, s: int):
        r = abs(s) - 1
        if s > 0:
            return self.tau[r], self.rho[r]
        g_inv = mobius.inv(self.rho[r])
        return -mobius.ad(g_inv, self.tau[r]), g_inv

    def evaluate(self, word: Word) -> np.ndarray:
        """tau on a word through tau(ab) = tau(a) + Ad rho(a) tau(b)."""
        total = np.zeros((2, 2), dtype=complex)
        R = np.eye(2, dtype=complex)
        for s in word:
            t, g = self.letter(s)
            total = total + mobius.ad(R, t)
            R = R @ g
        return total

    def rho_word(self, word: Word) -> np.ndarray:
        R = np.eye(2, dtype=complex)
        for s in word:
            R = R @ self.letter(s)[1]
        return R


def hol(x, P: DevelopedPattern, base_face: int | None = None, check_faces: int = 0,
        rng: np.random.Generator | None = None, tol: float = 1e-9) -> Cocycle:
    """Cocycle tau_gamma = m(gamma . f) - Ad rho_gamma m(f) of a tangent vector."""
    alpha = alpha_form(x, P)
    m = primitive_m(alpha)
    D = P.domain
    T = P.triangulation
    tau = np.empty((D.n_generators, 2, 2), dtype=complex)
    for r, h in enumerate(D.positive):
        g = int(T.twin[h]) // 3
        tau[r] = m[h // 3] - alpha.values[h] - mobius.ad(P.rho[r], m[g])
    if base_face is not None:
        mb = m[base_face]
        tau = np.array([t - mb + mobius.ad(g, mb) for t, g in zip(tau, P.rho)])
    if check_faces:
        rng = rng or np.random.default_rng(0)
        for f in rng.choice(T.n_faces, size=min(check_faces, T.n_faces), replace=False):
            err = face_dependence(alpha, m, tau, int(f), base_face)
            if err > tol:
                raise FaceDependence(f"tau evaluated at face {f} differs by {err:.3g}")
    return Cocycle(tau, P.rho.copy())


def face_dependence(alpha: EdgeOneForm, m: np.ndarray, tau: np.ndarray, f: int,
                    base_face: int | None = None) -> float:
    """max_r ||tau_r(f) - tau_r|| with tau_r(f) integrated geometrically in the cover."""
    P = alpha.pattern
    D = P.domain
    T = P.triangulation
    shift = m[base_face] if base_face is not None else np.zeros((2, 2))
    worst = 0.0
    for r, h in enumerate(D.positive):
        word = (r + 1,)
        path = copy_path(D, f, h // 3) + [(h, ())] + copy_path(D, int(T.twin[h]) // 3, f, word)
        m_far = integrate_along(alpha, m[f], path)
        val = (m_far - shift) - mobius.ad(P.rho[r], m[f] - shift)
        worst = max(worst, float(np.linalg.norm(val - tau[r])))
    return worst


def tau_by_path(x, P: DevelopedPattern, word: Word) -> np.ndarray:
    """tau on a word from integrating alpha along a path in the universal cover."""
    alpha = alpha_form(x, P)
    m_end = integrate_along(alpha, np.zeros((2, 2), dtype=complex), word_path(P.domain, word))
    return m_end


def coboundary_fit(tau: np.ndarray, rho: np.ndarray) -> tuple:
    """Least-squares tau0 for tau_g ~ tau0 - Ad rho_g tau0; returns (tau0, residual norm)."""
    rows = []
    for g in rho:
        rows.append(np.stack([(B - mobius.ad(g, B)).ravel() for B in SL2_BASIS], axis=1))
    A = np.vstack(rows)
    b = np.concatenate([t.ravel() for t in tau])
    c, *_ = np.linalg.lstsq(A, b, rcond=None)
    tau0 = np.tensordot(c, SL2_BASIS, axes=1)
    return tau0, float(np.linalg.norm(A @ c - b))


def coboundary_distance(tau, rho=None) -> float:
    """Frobenius distance from tau (on generators) to the coboundaries."""
    if isinstance(tau, Cocycle):
        tau, rho = tau.tau, tau.rho
    if len(tau) == 0:
        return 0.0
    return coboundary_fit(np.asarray(tau), np.asarray(rho))[1]


def holonomy_derivative(X: CrossRatioSystem, x, P: DevelopedPattern, step: float = 1e-5) -> np.ndarray:
    """Central difference of rho(t) rho(0)^{-1} for X(t) = X exp(t x), same seed and domain."""
    x = np.asarray(x, dtype=complex)

    def rho_at(t):
        Xt = CrossRatioSystem(X.triangulation, X.log_mag + t * x.real, X.theta + t * x.imag)
        Pt = develop(Xt, P.domain, P.seed, check=False, renormalize=False)
        N = P.normalization
        return np.array([mobius.align_sign(N @ g @ mobius.inv(N), g0) for g, g0 in zip(Pt.rho, P.rho)])

    plus, minus = rho_at(step), rho_at(-step)
    return np.array([(a - b) / (2 * step) @ mobius.inv(g) for a, b, g in zip(plus, minus, P.rho)])


__all__ = [
    "Cocycle", "DevelopedPattern", "EdgeOneForm", "alpha_form", "alpha_matrix", "coboundary_distance",
    "coboundary_fit", "copy_path", "develop", "hol", "holonomy_derivative", "integrate_along",
    "primitive_m", "tau_by_path", "word_path",
]
