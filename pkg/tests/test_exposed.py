from dataclasses import replace
from itertools import combinations, product

import numpy as np
import pytest
from scipy.optimize import linprog

from normforge import (Functional, NormSpec, decompose_Dnm, exposed_points,
                       minimal_support_witness, verify_lemma_geometry)
from normforge.exposed import DualGeometry, not_exposed
from oracles import hand_maximized_radius, random_normspec


def is_convex_combination(target, others):
    """LP feasibility: target = sum l_i o_i, l >= 0, sum l = 1."""
    if len(others) == 0:
        return False
    A = np.vstack([np.array(others).T, np.ones(len(others))])
    b = np.append(target, 1.0)
    res = linprog(np.zeros(len(others)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


def test_canonical3_points(canonical3):
    pts = exposed_points(canonical3)
    assert len(pts) == 6
    witnesses = {tuple(p.witness) for p in pts}
    expected = {tuple(s * np.eye(3)[i]) for i in range(3) for s in (1.0, -1.0)}
    assert witnesses == expected
    for p in pts:
        # hand maximization: with x = e_0 + z, |z_i| <= 1 - 2t for the other coords ->
        # t = 1/2 at z = 0; g = -e*_0 only gives (1 + 1) / 2 = 1
        assert p.radius == pytest.approx(0.5, abs=1e-9)
        assert np.array_equal(p.witness, p.f.to_dense())


def test_dual_square_points():
    # max(|x + y|, |x - y|) is the l1 norm; its dual ball is the square
    N = NormSpec.from_dense([[1, 1], [1, -1]])
    pts = exposed_points(N)
    assert {tuple(p.f.to_dense()) for p in pts} == set(product((1.0, -1.0), repeat=2))
    for p in pts:
        oracle = hand_maximized_radius(N, p.f.to_dense(), p.witness)
        assert p.radius == pytest.approx(oracle, abs=1e-6)
        assert p.radius == pytest.approx(0.5, abs=1e-9)
        assert np.allclose(p.witness, 0.5 * p.f.to_dense())
        # the corner e_0 of the face has radius 0, so it is not a witness
        corner = np.array([1.0, 0.0]) if p.f.coeff(0) > 0 else np.array([-1.0, 0.0])
        assert hand_maximized_radius(N, p.f.to_dense(), corner) <= 1e-6


def test_radius_is_tight_and_maximal(rng):
    for _ in range(6):
        N = random_normspec(rng, dim_max=2, pairs_max=6)
        geo = DualGeometry(N)
        for p in exposed_points(N, supports=False):
            row = p.f.to_dense()
            assert p.radius == pytest.approx(geo.radius_at(row, p.witness), abs=1e-9)
            assert p.radius == pytest.approx(hand_maximized_radius(N, row, p.witness), abs=1e-6)
            # no face point on a fine grid does better
            verts = N.vertices().vertices
            face = verts[verts @ row >= 1 - 1e-9]
            for s in np.linspace(0, 1, 101):
                x = s * face[0] + (1 - s) * face[-1]
                assert geo.radius_at(row, x) <= p.radius + 1e-9


def test_dual_vertices_match_lp_oracle(rng):
    for _ in range(10):
        N = random_normspec(rng, dim_max=3, pairs_max=8)
        rows = np.vstack([N.matrix, -N.matrix])
        expected = set()
        for i, row in enumerate(rows):
            others = [r for k, r in enumerate(rows) if k != i]
            if not is_convex_combination(row, others):
                expected.add(tuple(row))
        got = {tuple(p.f.to_dense()) for p in exposed_points(N, supports=False)}
        assert got == expected
        assert len(got) // 2 <= N.k
        assert (len(got) // 2 == N.k) == (not not_exposed(N))


def test_convex_combination_element_not_exposed():
    N = NormSpec.from_dense([[1, 1], [1, -1], [1, 0]])
    assert not_exposed(N) == [2]
    assert len(exposed_points(N)) == 4


def test_exposed_set_is_boundary(rng):
    for _ in range(6):
        N = random_normspec(rng, dim_max=3, pairs_max=8)
        pts = exposed_points(N, supports=False)
        fmat = np.array([p.f.to_dense() for p in pts])
        verts = N.vertices().vertices
        assert np.all((verts @ fmat.T).max(axis=1) >= 1 - 1e-9)


def test_minimal_support_examples(canonical3):
    n, x, r = minimal_support_witness(canonical3, canonical3.boundary[0])
    assert n == 1 and np.array_equal(x, [1.0, 0.0, 0.0]) and r == pytest.approx(0.5, abs=1e-12)
    N = NormSpec.from_dense([[1, 1], [1, -1]])
    n, x, r = minimal_support_witness(N, N.boundary[0])
    # single-coordinate candidates are face corners with radius 0
    assert n == 2 and np.allclose(x, [0.5, 0.5]) and r == pytest.approx(0.5, abs=1e-12)


def test_minimal_support_brute_force(rng):
    N = random_normspec(rng, dim_max=3, pairs_max=6)
    geo = DualGeometry(N)
    for p in exposed_points(N, supports=False):
        n, x, r = minimal_support_witness(N, p.f)
        assert np.count_nonzero(x) <= n and r > 0
        assert r == pytest.approx(geo.radius_at(p.f.to_dense(), x), abs=1e-9)
        # no smaller coordinate subset admits a positive radius witness
        for size in range(1, n):
            for S in combinations(range(N.dim), size):
                _, t = geo.best_witness(p.f.to_dense(), S)
                assert t <= 1e-9


def test_lemma_geometry_canonical(canonical3):
    pts = exposed_points(canonical3)
    rep = verify_lemma_geometry(pts, canonical3)
    assert rep.passed
    seps = {round(canonical3(q.witness - p.witness), 12) for p in pts for q in pts if p is not q}
    assert seps <= {1.0, 2.0}


def test_lemma_single_point():
    N = NormSpec.canonical(1)
    pts = exposed_points(N)
    assert all(p.radius == pytest.approx(1.0, abs=1e-12) for p in pts)
    rep = verify_lemma_geometry(pts[:1], N)
    assert rep.passed
    assert not any(c.name == "pairwise_separation" for c in rep.checks)


def test_lemma_detects_inflated_radius(canonical3, tri):
    for N in (canonical3, tri):
        pts = exposed_points(N, supports=False)
        bad = [replace(pts[0], radius=pts[0].radius * 1.1)] + pts[1:]
        rep = verify_lemma_geometry(bad, N)
        assert not rep.passed
        assert any(c.name == "radius_admissible" for c in rep.failures)


def test_lemma_random(rng):
    for _ in range(4):
        N = random_normspec(rng, dim_max=3, pairs_max=6)
        assert verify_lemma_geometry(exposed_points(N, supports=False), N).passed


def test_dnm_canonical():
    for d in (1, 2, 3):
        N = NormSpec.canonical(d)
        dec = decompose_Dnm(exposed_points(N), N)
        assert list(dec.classes) == [(1, 1)]
        assert len(dec.classes[(1, 1)]) == 2 * d
        assert dec.passed


def test_dnm_dual_square():
    N = NormSpec.from_dense([[1, 1], [1, -1]])
    dec = decompose_Dnm(exposed_points(N), N)
    assert list(dec.classes) == [(2, 1)]
    assert dec.passed


def test_dnm_cover_and_lazy(rng, tri):
    assert decompose_Dnm([]).classes == {}
    pts = exposed_points(tri, supports=False)
    with pytest.raises(ValueError):
        decompose_Dnm(pts)
    dec = decompose_Dnm(pts, tri)
    members = [p.key() for ps in dec.classes.values() for p in ps]
    assert sorted(members) == sorted(p.key() for p in pts)
    assert dec.passed
    for (n, m), ps in dec.classes.items():
        for p in ps:
            assert p.class_radius >= 2.0 ** -m - 1e-12
            assert np.count_nonzero(p.class_witness) <= n
            assert np.abs(p.class_witness).max() <= m


def test_witness_normed(rng):
    N = random_normspec(rng, dim_max=3, pairs_max=8)
    for p in exposed_points(N):
        assert N(p.witness) == pytest.approx(1.0, abs=1e-9)
        assert p.f(p.witness) == pytest.approx(1.0, abs=1e-9)
        assert p.radius <= N(p.witness) + 1e-9
        assert isinstance(p.f, Functional)
