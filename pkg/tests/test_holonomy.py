import math

import numpy as np
import pytest

from circle_patterns import crossratio as cr
from circle_patterns import holonomy as ho
from circle_patterns import mobius
from circle_patterns import tangent as tg
from circle_patterns.surface import fundamental_domain

from conftest import random_complex

DIAGONALS = [2, 4, 6, 7, 8]  # octagon diagonals of the Bolza triangulation


def octagon_pairings():
    """Disk isometries carrying side k+4 of the regular octagon onto side k."""
    d = math.acosh(1 + math.sqrt(2))
    out = []
    for k in range(4):
        phi = (k + 1) * math.pi / 4
        R = np.diag([np.exp(0.5j * phi), np.exp(-0.5j * phi)])
        A = np.array([[math.cosh(d), math.sinh(d)], [math.sinh(d), math.cosh(d)]])
        out.append(R @ A @ np.conj(R))
    return out


def test_develop_invariants(example):
    P = example.P
    assert P.cross_ratio_defect() < 1e-9
    assert P.relator_defect() < 1e-8
    for g in P.rho:
        assert abs(np.linalg.det(g) - 1) < 1e-12


def test_hex_torus_develops_onto_the_lattice(hex_example):
    P = hex_example.P
    w = np.exp(1j * math.pi / 3)
    assert np.allclose(P.face_points((), 0), [0, 1, w])
    shifts = []
    for g in P.rho:
        g = g / g[1, 1]
        assert abs(g[1, 0]) < 1e-12 and abs(g[0, 0] - 1) < 1e-12
        shifts.append(g[0, 1])
    for s in shifts:
        # lattice vectors a + b*w with integer a, b
        b = s.imag / w.imag
        a = s.real - b * w.real
        assert abs(a - round(a)) < 1e-12 and abs(b - round(b)) < 1e-12
    assert abs(shifts[0].real * shifts[1].imag - shifts[0].imag * shifts[1].real) == pytest.approx(w.imag)


def test_bolza_holonomy_is_the_octagon_side_pairing(bolza_example):
    X = bolza_example.X
    T = X.triangulation
    verts, _ = cr.bolza_octagon()
    D = fundamental_domain(T, 0, tree=DIAGONALS)
    P = ho.develop(X, D, seed=(verts[0], verts[1], verts[2]))
    pairings = octagon_pairings()
    for k, g in enumerate(pairings):
        assert abs(mobius.apply(g, verts[k + 4]) - verts[k + 1]) < 1e-12
        assert abs(mobius.apply(g, verts[(k + 5) % 8]) - verts[k]) < 1e-12
    assert [int(T.edge_of[h]) for h in D.positive] == [0, 1, 3, 5]
    for r in range(4):
        assert np.abs(mobius.align_sign(P.rho[r], pairings[r]) - pairings[r]).max() < 1e-8
    layout = cr.bolza_layout()
    for f, pts in layout.items():
        assert np.abs(P.face_points((), f) - np.array(pts)).max() < 1e-12


def test_reseeding_conjugates_the_holonomy(example):
    X = example.X
    seed = (0.3 + 0.1j, -2.0, 1.5j)
    Q = ho.develop(X, seed=seed)
    assert Q.cross_ratio_defect() < 1e-9
    M = mobius.from_points(list(ho.DEFAULT_SEED), list(seed))
    for a, b in zip(example.P.rho, Q.rho):
        c = M @ a @ mobius.inv(M)
        assert np.abs(mobius.align_sign(b, c) - c).max() < 1e-9 * np.abs(c).max()


def test_seed_at_infinity_is_renormalized(hex_example):
    P = ho.develop(hex_example.X, seed=(0.0, 1.0, None))
    assert not np.allclose(P.normalization, np.eye(2))
    assert np.all(np.isfinite(P.z))
    assert P.cross_ratio_defect() < 1e-9 and P.relator_defect() < 1e-8


def test_coincident_seed_is_degenerate(hex_example):
    with pytest.raises(ho.DegenerateLayout):
        ho.develop(hex_example.X, seed=(0.0, 0.0, 1.0))


def test_inconsistent_cross_ratios_are_detected(bolza_example):
    X = bolza_example.X
    bad = cr.CrossRatioSystem(X.triangulation, X.log_mag + 0.1, X.theta)
    with pytest.raises(ho.HolonomyInconsistent):
        ho.develop(bad)


def test_zero_vector_gives_zero_everything(example):
    x = np.zeros(example.T.n_edges)
    a = ho.alpha_form(x, example.P)
    assert not a.values.any()
    assert not ho.primitive_m(a).any()
    assert not ho.hol(x, example.P).tau.any()


def test_alpha_is_traceless_and_antisymmetric(example):
    x = example.Kc.basis[:, 0]
    a = ho.alpha_form(x, example.P)
    T = example.T
    assert np.abs(np.trace(a.values, axis1=1, axis2=2)).max() < 1e-12
    D = example.P.domain
    for h in range(T.n_half_edges):
        t = int(T.twin[h])
        # the twin lives in the neighbouring copy
        assert np.abs(a.at(t, D.cross(h, ())) + a.values[h]).max() < 1e-10


def test_alpha_closed_and_equivariant(example):
    gens = [(r + 1,) for r in range(example.P.domain.n_generators)]
    gens += [(-(r + 1),) for r in range(example.P.domain.n_generators)]
    for k in range(example.Kc.dim):
        a = ho.alpha_form(example.Kc.basis[:, k], example.P)
        assert a.closedness_defect() < 1e-10
        assert a.equivariance_defect(gens) < 1e-10


def test_alpha_conjugates_under_mobius(example):
    rng = np.random.default_rng(7)
    x = example.Kc.basis[:, -1]
    g = mobius.random_sl2(rng, 0.3)
    a = ho.alpha_form(x, example.P)
    b = ho.alpha_form(x, example.P.conjugated(g))
    for h in range(example.T.n_half_edges):
        want = mobius.ad(g, a.values[h])
        assert np.abs(b.values[h] - want).max() < 1e-10 * max(1.0, np.abs(want).max())


def test_primitive_recovers_alpha_on_tree_edges(example):
    a = ho.alpha_form(example.Kc.basis[:, 0], example.P)
    m = ho.primitive_m(a, check=True)
    D = example.P.domain
    assert not m[D.root].any()
    for f, h in D.parent_half.items():
        assert np.abs(m[h // 3] - m[f] - a.values[h]).max() < 1e-12


def test_primitive_is_path_independent(example):
    P = example.P
    T, D = example.T, P.domain
    a = ho.alpha_form(example.Kc.basis[:, 1], P)
    m = ho.primitive_m(a)
    for v in range(T.n_vertices):
        walk = D.walk_vertex(T.links[v].corners[0])
        f0 = walk[0][0] // 3
        around = ho.integrate_along(a, m[f0], walk)
        assert np.abs(around - m[f0]).max() < 1e-10
        # the same face reached by going round the vertex first
        detour = ho.copy_path(D, D.root, f0) + walk
        assert np.abs(ho.integrate_along(a, m[D.root], detour) - m[f0]).max() < 1e-10


def test_hol_is_face_independent_and_linear(example):
    P = example.P
    rng = np.random.default_rng(1)
    B = example.Kc.basis
    x, y = B @ random_complex(rng, B.shape[1]), B @ random_complex(rng, B.shape[1])
    lam = complex(rng.normal(), rng.normal())
    tx = ho.hol(x, P, check_faces=example.T.n_faces).tau
    ty = ho.hol(y, P).tau
    txy = ho.hol(x + lam * y, P).tau
    assert np.abs(txy - tx - lam * ty).max() < 1e-10


def test_base_face_changes_hol_by_a_coboundary(bolza_example):
    P = bolza_example.P
    x = bolza_example.Kc.basis[:, 2]
    t0 = ho.hol(x, P)
    for f in range(bolza_example.T.n_faces):
        tf = ho.hol(x, P, base_face=f)
        assert ho.coboundary_distance(tf.tau - t0.tau, P.rho) < 1e-10


def test_face_dependence_is_reported(bolza_example):
    P = bolza_example.P
    a = ho.alpha_form(bolza_example.Kc.basis[:, 0], P)
    m = ho.primitive_m(a)
    c = ho.hol(bolza_example.Kc.basis[:, 0], P)
    assert ho.face_dependence(a, m, c.tau, 3) < 1e-9
    assert ho.face_dependence(a, m, c.tau + 1e-3, 3) > 1e-4


def test_cocycle_matches_path_integration(example):
    P = example.P
    x = example.Kc.basis[:, 0]
    c = ho.hol(x, P)
    G = P.domain.n_generators
    for word in [(1,), (-1,), (1, 2), (2, -1), (1, 2, -1), (G, 1, -G)]:
        want = ho.tau_by_path(x, P, word)
        assert np.abs(c.evaluate(word) - want).max() < 1e-10 * max(1.0, np.abs(want).max())


def test_cocycle_condition(example):
    c = ho.hol(example.Kc.basis[:, 1], example.P)
    G = example.P.domain.n_generators
    rng = np.random.default_rng(4)
    letters = [s for r in range(G) for s in (r + 1, -(r + 1))]
    for _ in range(50):
        a = tuple(rng.choice(letters, size=rng.integers(1, 4)))
        b = tuple(rng.choice(letters, size=rng.integers(1, 4)))
        lhs = c.evaluate(a + b)
        rhs = c.evaluate(a) + mobius.ad(c.rho_word(a), c.evaluate(b))
        assert np.abs(lhs - rhs).max() < 1e-9 * max(1.0, np.abs(lhs).max())


def test_coboundary_distance_basics(bolza_example):
    rho = bolza_example.P.rho
    rng = np.random.default_rng(2)
    t0 = np.tensordot(random_complex(rng, 3), ho.SL2_BASIS, axes=1)
    tau = np.array([t0 - mobius.ad(g, t0) for g in rho])
    assert ho.coboundary_distance(tau, rho) < 1e-12
    fitted, _ = ho.coboundary_fit(tau, rho)
    assert np.abs(fitted - t0).max() < 1e-10
    assert ho.coboundary_distance(np.zeros_like(tau), rho) == 0.0


def test_vertex_moves_have_trivial_class(example):
    for i in range(example.T.n_vertices):
        x = tg.vertex_move_field(example.X, example.P, i)
        assert ho.coboundary_distance(ho.hol(x, example.P)) < 1e-8


def test_real_kernel_has_nontrivial_classes(bolza_example):
    # the pattern is infinitesimally rigid, so no real kernel vector is a coboundary
    for k in range(bolza_example.Kr.dim):
        x = bolza_example.Kr.basis[:, k]
        assert ho.coboundary_distance(ho.hol(x, bolza_example.P)) > 1e-3


def test_holonomy_derivative_matches_cocycle(example):
    rng = np.random.default_rng(11)
    B = example.Kc.basis
    for _ in range(3):
        x = B @ random_complex(rng, B.shape[1])
        x /= np.linalg.norm(x)
        fd = ho.holonomy_derivative(example.X, x, example.P)
        assert np.abs(fd - ho.hol(x, example.P).tau).max() < 1e-4
