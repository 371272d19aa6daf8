"""Cross-ratio systems, their defining equations, and the two example patterns."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import mobius
from .surface import Triangulation, build

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class DegenerateQuadruple(ValueError):
    pass


class InvalidAngles(ValueError):
    pass


class SolverError(RuntimeError):
    pass


class NoConvergence(SolverError):
    pass


class DivergedToInfinity(SolverError):
    pass


def cross_ratio_from_points(zi, zj, zk, zl) -> complex:
    """Cross ratio of edge ij between triangles ijk and jil.

    ``X = -(zk - zi)(zl - zj) / ((zi - zl)(zj - zk))``; points may be complex,
    infinite, or homogeneous pairs.
    """
    i, j, k, l = (mobius.hom(z) for z in (zi, zj, zk, zl))
    num = -mobius.bracket(k, i) * mobius.bracket(l, j)
    den = mobius.bracket(i, l) * mobius.bracket(j, k)
    scale = np.prod([np.linalg.norm(p) for p in (i, j, k, l)])
    eps = 1e-14 * scale
    if abs(den) <= eps or abs(num) <= eps:
        raise DegenerateQuadruple("two of the four points coincide")
    return complex(num / den)


@dataclass(eq=False)
class CrossRatioSystem:
    """X = exp(log_mag + i*theta) on the edges of a triangulation."""

    triangulation: Triangulation
    log_mag: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        self.log_mag = np.asarray(self.log_mag, dtype=float).copy()
        self.theta = np.asarray(self.theta, dtype=float).copy()
        n = self.triangulation.n_edges
        if self.log_mag.shape != (n,) or self.theta.shape != (n,):
            raise ValueError(f"expected {n} values per edge")
        if not (np.all(np.isfinite(self.log_mag)) and np.all(np.isfinite(self.theta))):
            raise ValueError("non-finite cross ratio data")

    @classmethod
    def from_complex(cls, T: Triangulation, X) -> "CrossRatioSystem":
        X = np.asarray(X, dtype=complex)
        if np.any(X == 0):
            raise ValueError("cross ratios must be nonzero")
        theta = np.angle(X)
        # round-off below the real axis is not a wrap-around
        theta = np.where(np.abs(theta) < 1e-12, 0.0, theta)
        theta = np.where(theta < 0, theta + TWO_PI, theta)
        return cls(T, np.log(np.abs(X)), theta)

    @property
    def X(self) -> np.ndarray:
        return np.exp(self.log_mag + 1j * self.theta)

    def to_dict(self) -> dict:
        return {
            "triangulation": self.triangulation.to_dict(),
            "theta": self.theta.tolist(),
            "log_mag": self.log_mag.tolist(),
        }


def link_edges(T: Triangulation, i: int) -> np.ndarray:
    """Edge ids met by the clockwise link of ``i`` (loops appear twice)."""
    return T.edge_of[list(T.links[i].corners)]


def _partial_products(X: CrossRatioSystem, edges: np.ndarray) -> np.ndarray:
    # cumulative sums of logs keep extreme magnitudes stable
    return np.exp(np.cumsum(X.log_mag[edges]) + 1j * np.cumsum(X.theta[edges]))


def product_residual(X: CrossRatioSystem, i: int) -> complex:
    e = link_edges(X.triangulation, i)
    return complex(np.exp(X.log_mag[e].sum() + 1j * X.theta[e].sum()) - 1.0)


def sum_residual(X: CrossRatioSystem, i: int, start: int = 0) -> complex:
    """``X_1 + X_1 X_2 + ... + X_1...X_r`` around vertex ``i``.

    ``start`` rotates the first corner of the clockwise link.
    """
    e = np.roll(link_edges(X.triangulation, i), -start)
    return complex(_partial_products(X, e).sum())


def sum_coefficients(X: CrossRatioSystem, i: int) -> tuple:
    """Per link corner: edge id and the tail sum ``P_m + ... + P_r`` of partial products.

    These are the coefficients of the linearized sum equation, and of the
    derivative of :func:`sum_residual` in the log-magnitudes.
    """
    e = link_edges(X.triangulation, i)
    P = _partial_products(X, e)
    return e, np.cumsum(P[::-1])[::-1]


def max_residual(X: CrossRatioSystem) -> float:
    n = X.triangulation.n_vertices
    return max(max(abs(product_residual(X, i)), abs(sum_residual(X, i))) for i in range(n))


# --- Delaunay angle structures ---------------------------------------------------

@dataclass
class DelaunayReport:
    angle_sums: list
    range_violations: list
    vertex_violations: list
    cycle_violations: list
    cycles_checked: int
    max_cycle_len: int

    @property
    def ok(self) -> bool:
        return not (self.range_violations or self.vertex_violations or self.cycle_violations)

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "angle_sums": self.angle_sums,
            "range_violations": self.range_violations,
            "vertex_violations": self.vertex_violations,
            "cycle_violations": self.cycle_violations,
            "cycles_checked": self.cycles_checked,
            "checked_up_to_length": self.max_cycle_len,
        }


def angle_sums(T: Triangulation, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.array([theta[link_edges(T, i)].sum() for i in range(T.n_vertices)])


def simple_dual_cycles(T: Triangulation, max_len: int) -> list:
    """Simple cycles of the dual graph as sets of crossed edge ids."""
    adj = [[] for _ in range(T.n_faces)]
    for e, (h, t) in enumerate(T.edges):
        f, g = h // 3, t // 3
        adj[f].append((g, e))
        if g != f:
            adj[g].append((f, e))
    found = set()
    for e, (h, t) in enumerate(T.edges):
        if h // 3 == t // 3:
            found.add(frozenset([e]))
    for s in range(T.n_faces):
        stack = [(s, (s,), ())]
        while stack:
            f, faces, used = stack.pop()
            for g, e in adj[f]:
                if e in used:
                    continue
                if g == s and len(used) >= 1:
                    found.add(frozenset(used + (e,)))
                elif g > s and g not in faces and len(used) + 1 < max_len:
                    stack.append((g, faces + (g,), used + (e,)))
    return sorted(found, key=lambda c: (len(c), sorted(c)))


def _disk_sides(T: Triangulation, crossed: frozenset) -> list:
    """Vertex sets of the sides of a separating dual cycle that are disks."""
    parent = list(range(T.n_vertices))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e, (h, _t) in enumerate(T.edges):
        if e not in crossed:
            parent[find(T.origin(h))] = find(T.target(h))
    comps = {}
    for v in range(T.n_vertices):
        comps.setdefault(find(v), set()).add(v)
    if len(comps) != 2:
        return []
    on_cycle = {T.edges[e][0] // 3 for e in crossed} | {T.edges[e][1] // 3 for e in crossed}
    disks = []
    for side in comps.values():
        n_e = sum(1 for e, (h, _t) in enumerate(T.edges)
                  if e not in crossed and T.origin(h) in side)
        n_f = sum(1 for f, vs in enumerate(T.faces) if f not in on_cycle and vs[0] in side)
        if len(side) - n_e + n_f == 1:
            disks.append(side)
    return disks


def is_delaunay(T: Triangulation, theta, max_cycle_len: int = 12, tol: float = 1e-12) -> DelaunayReport:
    """Check the vertex angle sums and the dual-cycle lower bound.

    Contractible simple dual cycles are enumerated up to ``max_cycle_len``;
    cycles bounding a disk with a single vertex are exempt.
    """
    theta = np.asarray(theta, dtype=float)
    sums = angle_sums(T, theta)
    range_bad = [int(e) for e in np.flatnonzero((theta < 0) | (theta >= math.pi))]
    vertex_bad = [{"vertex": i, "sum": float(s), "defect": float(s - TWO_PI)}
                  for i, s in enumerate(sums) if abs(s - TWO_PI) > tol]
    cycles = simple_dual_cycles(T, max_cycle_len)
    cycle_bad = []
    for c in cycles:
        disks = _disk_sides(T, c)
        if not disks or any(len(d) == 1 for d in disks):
            continue
        total = float(theta[sorted(c)].sum())
        if not total - TWO_PI > tol:
            cycle_bad.append({"edges": sorted(int(e) for e in c), "sum": total})
    return DelaunayReport([float(s) for s in sums], range_bad, vertex_bad, cycle_bad,
                          len(cycles), max_cycle_len)


# --- solver ----------------------------------------------------------------------

def residual_vector(X: CrossRatioSystem) -> np.ndarray:
    T = X.triangulation
    lin = [X.log_mag[link_edges(T, i)].sum() for i in range(T.n_vertices)]
    s = np.array([sum_residual(X, i) for i in range(T.n_vertices)])
    return np.concatenate([lin, s.real, s.imag])


def residual_jacobian(X: CrossRatioSystem) -> np.ndarray:
    """Derivative of :func:`residual_vector` in the log-magnitudes."""
    T = X.triangulation
    n, m = T.n_vertices, T.n_edges
    J = np.zeros((3 * n, m))
    for i in range(n):
        e, coef = sum_coefficients(X, i)
        np.add.at(J[i], e, 1.0)
        np.add.at(J[n + i], e, coef.real)
        np.add.at(J[2 * n + i], e, coef.imag)
    return J


@dataclass
class SolveResult:
    system: CrossRatioSystem
    iterations: int
    residual: float
    history: list = field(default_factory=list)


def gauss_newton(T: Triangulation, theta, u0, tol: float = 1e-12, max_iter: int = 100,
                 u_bound: float = 50.0) -> SolveResult:
    """Minimum-norm Gauss-Newton iteration on the log-magnitudes with fixed angles."""
    theta = np.asarray(theta, dtype=float)
    bad = np.abs(angle_sums(T, theta) - TWO_PI)
    if bad.max() > 1e-9:
        raise InvalidAngles(f"vertex angle sums differ from 2*pi by up to {bad.max():.3g}")
    X = CrossRatioSystem(T, u0, theta)
    history = []
    for it in range(max_iter + 1):
        res = max_residual(X)
        history.append(res)
        log.debug("iteration %d residual %.3e", it, res)
        if res <= tol:
            return SolveResult(X, it, res, history)
        if it == max_iter:
            break
        r = residual_vector(X)
        J = residual_jacobian(X)
        step = -np.linalg.pinv(J, rcond=1e-12) @ r
        norm0 = np.linalg.norm(r)
        t = 1.0
        while True:
            trial = CrossRatioSystem(T, X.log_mag + t * step, theta)
            if np.linalg.norm(residual_vector(trial)) < norm0 or t < 1e-8:
                break
            t *= 0.5
        X = trial
        if np.abs(X.log_mag).max() > u_bound:
            raise DivergedToInfinity(f"|log|X|| exceeded {u_bound} at iteration {it + 1}")
    raise NoConvergence(f"residual {history[-1]:.3e} after {max_iter} iterations")


def solve_pattern(T: Triangulation, theta, u0, tol: float = 1e-12, max_iter: int = 100) -> CrossRatioSystem:
    return gauss_newton(T, theta, u0, tol, max_iter).system


# --- examples --------------------------------------------------------------------

def hex_torus() -> Triangulation:
    """One-vertex torus: square with a diagonal, three edges, two faces."""
    return build([(0, 0, 0), (0, 0, 0)], 1,
                 corner_gluing=[[[0, 0], [1, 1]], [[0, 1], [1, 2]], [[0, 2], [1, 0]]])


def example_hex_torus() -> tuple:
    """Equilateral lattice pattern: X = exp(i*pi/3) on all three edges."""
    T = hex_torus()
    X = CrossRatioSystem(T, np.zeros(3), np.full(3, math.pi / 3))
    return T, X


def bolza_octagon() -> tuple:
    """Regular hyperbolic octagon with angles pi/4 in the unit disk.

    Returns ``(vertices, pairings)``; ``pairings[k]`` is the disk isometry
    carrying side ``k+4`` onto side ``k`` (side k runs from vertex k to k+1).
    """
    # cosh(circumradius) = cot^2(pi/8); Euclidean radius tanh(R/2) = 2**-0.25
    cosh_r = (1.0 / math.tan(math.pi / 8)) ** 2
    r = math.tanh(math.acosh(cosh_r) / 2)
    verts = np.array([r * np.exp(1j * (math.pi / 8 + k * math.pi / 4)) for k in range(8)])
    # cosh(inradius) = cot(pi/8); the pairing translates by twice the inradius
    d = math.acosh(1.0 / math.tan(math.pi / 8))
    shift = np.array([[math.cosh(d), math.sinh(d)], [math.sinh(d), math.cosh(d)]], dtype=complex)
    pairings = []
    for k in range(4):
        phi = math.pi / 4 * (k + 1)
        rot = np.diag([np.exp(0.5j * phi), np.exp(-0.5j * phi)])
        pairings.append(rot @ shift @ mobius.inv(rot))
    return verts, pairings


def bolza_triangulation() -> Triangulation:
    """Octagon fanned from corner 0 into faces (0, m, m+1), all corners one vertex."""
    side_half = {0: 0, 7: 17}
    side_half.update({k: 3 * (k - 1) + 1 for k in range(1, 7)})
    gluing = [[[m - 1, 0], [m - 2, 2]] for m in range(2, 7)]
    for k in range(4):
        a, b = side_half[k], side_half[k + 4]
        gluing.append([[a // 3, a % 3], [b // 3, b % 3]])
    return build([(0, 0, 0)] * 6, 1, corner_gluing=gluing)


def example_bolza() -> tuple:
    """Fuchsian circle pattern on the Bolza surface from the octagon layout."""
    T = bolza_triangulation()
    verts, pairings = bolza_octagon()
    pos = [(verts[0], verts[m], verts[m + 1]) for m in range(1, 7)]
    side_of = {0: 0, 17: 7}
    side_of.update({3 * (k - 1) + 1: k for k in range(1, 7)})

    def across(h):
        # Mobius map placing face(twin h) next to face(h) across h
        k = side_of.get(h)
        if k is None:
            return np.eye(2)
        return pairings[k] if k < 4 else mobius.inv(pairings[k - 4])

    X = np.empty(T.n_edges, dtype=complex)
    for e, (h, t) in enumerate(T.edges):
        f, c = divmod(h, 3)
        g, ct = divmod(t, 3)
        G = across(h)
        zl = mobius.apply(G, pos[g][(ct + 2) % 3])
        X[e] = cross_ratio_from_points(pos[f][c], pos[f][(c + 1) % 3], pos[f][(c + 2) % 3], zl)
    return T, CrossRatioSystem.from_complex(T, X)


def bolza_layout() -> dict:
    """Octagon positions of each face of :func:`example_bolza` (face -> 3 points)."""
    verts, _ = bolza_octagon()
    return {m - 1: (verts[0], verts[m], verts[m + 1]) for m in range(1, 7)}


def from_dict(data: dict) -> CrossRatioSystem:
    from .surface import from_dict as tri_from_dict

    T = tri_from_dict(data["triangulation"])
    return CrossRatioSystem(T, data["log_mag"], data["theta"])
