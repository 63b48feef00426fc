"""Acceptance criteria, one test each, each printing a single PASS/FAIL line."""
import io
import json
from dataclasses import replace

import numpy as np
import pytest

from normforge import (Functional, NormSpec, SmoothNorm, build_approx_norm, convex_reconstruct,
                       decompose_Dnm, dual_norm, exposed_points, h_approx, j_approx, l1_norm,
                       lambda_weights, level_sequence, smooth_value_and_gradient,
                       verify_lemma_geometry, verify_sandwich)
from normforge.cli import run
from normforge.io import normspec_to_json
from normforge.smooth import central_difference_gradient
from oracles import brute_force_dual_norm, random_normspec, random_sparse_functional


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail=""):
        with capsys.disabled():
            status = "PASS" if ok else "FAIL"
            print(f"\n[acceptance {number}] {status} {title}" + (f" ({detail})" if detail else ""))
        assert ok, f"criterion {number} failed: {detail}"
    return emit


def test_criterion_1_leveling_identities(report):
    rng = np.random.default_rng(1)
    worst = 0.0
    bad = []
    for trial in range(1000):
        f = random_sparse_functional(rng)
        L = level_sequence(f)
        dense = np.abs(f.to_dense())
        for n in range(1, L.M + 1):
            h = h_approx(L, n)
            if np.any(np.abs(h.to_dense()) > dense):
                bad.append((trial, "domination", n))
            expect = sum((L.p(i) - L.p(i + 1)) * len(L.G(i)) for i in range(1, n + 1))
            worst = max(worst, abs(l1_norm(h) - expect))
            if abs(l1_norm(h) - expect) > 1e-12:
                bad.append((trial, "l1", n))
            res = l1_norm(f - h)
            for m in range(n + 1, L.M + 1):
                if l1_norm(f - j_approx(L, n, m)) > 2 * res + 1e-12:
                    bad.append((trial, "j residual", n, m))
            if n < L.M:
                lam = lambda_weights(L, n)
                if abs(sum(w for _, w in lam) - 1) > 1e-12:
                    bad.append((trial, "lambda sum", n))
                rec = convex_reconstruct(L, n)
                if np.max(np.abs(rec.to_dense() - f.to_dense())) > 1e-12:
                    bad.append((trial, "reconstruct", n))
        if h_approx(L, L.M) != f:
            bad.append((trial, "h(f,M)"))
    report(1, "leveling identities on 1000 functionals", not bad,
           f"max l1 identity error {worst:.2e}; failures {bad[:3]}")


def hand_leveling(values):
    """Recompute h(f,1), j(f,1,2), lambda_2 directly from the level definitions."""
    a = np.abs(values)
    p = sorted(set(a[a > 0]), reverse=True) + [0.0]
    G = [np.flatnonzero(a >= t) for t in p[:-1]]
    w = [np.where(np.isin(np.arange(a.size), g), np.sign(values), 0.0) for g in G]
    h1 = (p[0] - p[1]) * w[0]
    res = np.abs(values - h1).sum()
    j12 = h1 + res / len(G[1]) * w[1]
    lam2 = (p[1] - p[2]) * len(G[1]) / res
    return h1, j12, lam2


def test_criterion_2_fixture_exactness(report):
    f = Functional.from_dense([0.5, 0.5, 0.25])
    h1, j12, lam2 = hand_leveling(f.to_dense())
    L = level_sequence(f)
    # hand values: p = (1/2, 1/4), h = 1/4 (1,1,0), residual l1 = 3/4, g = 3/4 / 3 (1,1,1)
    assert h1.tolist() == [0.25, 0.25, 0.0]
    assert j12.tolist() == [0.5, 0.5, 0.25]
    assert lam2 == 1.0
    ok = (h_approx(L, 1).to_dense().tolist() == h1.tolist()
          and j_approx(L, 1, 2).to_dense().tolist() == j12.tolist()
          and lambda_weights(L, 1) == [(2, lam2)])
    report(2, "fixture f=(0.5,0.5,0.25)", ok,
           "h=(0.25,0.25,0) j(1,2)=(0.5,0.5,0.25) lambda_2=1, oracle-recomputed")


def test_criterion_3_sandwich(report):
    rng = np.random.default_rng(3)
    specs = [random_normspec(rng, dim_max=5, pairs_max=20) for _ in range(50)]
    failures, worst_low, worst_up = [], np.inf, np.inf
    for i, N in enumerate(specs):
        for eps in (0.5, 0.1):
            rep = verify_sandwich(build_approx_norm(N, eps))
            if not rep.passed:
                failures.append((i, eps))
            worst_low = min(worst_low, min(r.lower_margin for r in rep.rows))
            worst_up = min(worst_up, min(r.upper_margin(eps) for r in rep.rows))
    canon = []
    for d in (1, 2, 3, 4):
        for eps in (0.5, 0.1):
            rep = verify_sandwich(build_approx_norm(NormSpec.canonical(d), eps))
            canon.append(rep.passed and all(abs(r.ratio - (1 + eps / 2)) <= 1e-12
                                            for r in rep.rows))
    report(3, "sandwich on 50 random specs x eps {0.5, 0.1} and canonical ratio 1+eps/2",
           not failures and all(canon),
           f"min lower margin {worst_low:.3e}, min upper margin {worst_up:.3e}, "
           f"failures {failures[:3]}")


def test_criterion_4_dual_norm_oracle(report):
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(200):
        N = random_normspec(rng, dim_max=3, pairs_max=8)
        coeffs = rng.normal(size=N.dim)
        f = Functional.from_dense(coeffs)
        worst = max(worst, abs(dual_norm(N, f) - brute_force_dual_norm(N.matrix, coeffs)))
    report(4, "dual norm vs exhaustive-subset oracle on 200 pairs", worst <= 1e-9,
           f"max abs error {worst:.2e}")


def test_criterion_5_smoothing(report):
    rng = np.random.default_rng(5)
    problems = []
    worst_fd = worst_euler = 0.0
    for trial in range(6):
        N = random_normspec(rng, dim_max=5, pairs_max=20)
        assert N.k <= 20
        for eps in (0.5, 0.1):
            S = SmoothNorm.for_epsilon(N, eps)
            xs = rng.normal(size=(10_000, N.dim))
            val, grad = S.values(xs)
            base = N.norms(xs)
            if np.any(val < base - 1e-9) or np.any(val > (1 + eps) * base + 1e-9):
                problems.append((trial, eps, "sandwich"))
            euler = np.max(np.abs(np.einsum("ij,ij->i", grad, xs) - val) / val)
            worst_euler = max(worst_euler, euler)
            for x in xs[:100]:
                x = x / N(x)
                _, g = smooth_value_and_gradient(S, x)
                fd = central_difference_gradient(S, x, 1e-5)
                worst_fd = max(worst_fd, np.linalg.norm(g - fd) / np.linalg.norm(g))
    ok = not problems and worst_fd <= 1e-5 and worst_euler <= 1e-9
    report(5, "smoothing sandwich, gradient vs finite differences, Euler identity", ok,
           f"max FD rel err {worst_fd:.2e}, max Euler rel err {worst_euler:.2e}, {problems[:3]}")


def test_criterion_6_canonical_exposed(report):
    N = NormSpec.canonical(3)
    pts = exposed_points(N)
    expected = {tuple(s * e) for e in np.eye(3) for s in (1.0, -1.0)}
    # hand maximization at x = e_0: for |z| small the binding functionals are e*_0 (value 1)
    # and e*_1, e*_2 (value |z_i|); the norm equals f(e_0 + z) = 1 + z_0 as long as
    # |z_i| <= 1 + z_0, and -e*_0 gives 1 at z_0 = -1, so the radius is 1/2 in the sup norm
    ok = (len(pts) == 6
          and all(abs(p.radius - 0.5) <= 1e-9 for p in pts)
          and {tuple(p.witness) for p in pts} == expected)
    rep = verify_lemma_geometry(pts, N)
    dec = decompose_Dnm(pts, N)
    seps = [N(q.witness - p.witness) for p in pts for q in pts if p is not q]
    ok = ok and rep.passed and dec.passed and list(dec.classes) == [(1, 1)] \
        and len(dec.classes[(1, 1)]) == 6 and min(seps) >= 0.5
    report(6, "canonical dim 3: six exposed points, radius 1/2, lemma checks, D_(1,1)", ok,
           f"min separation {min(seps)}, failures {[c.name for c in rep.failures]}")


def test_criterion_7_negative_controls(report):
    tri = NormSpec.from_dense([[1, 0], [0, 1], [0.8, 0.6]])
    rng = np.random.default_rng(7)
    specs = [tri] + [random_normspec(rng, dim_max=3, pairs_max=8) for _ in range(5)]
    missed, redundant = [], 0
    for i, N in enumerate(specs):
        A = build_approx_norm(N, 0.5)
        kept = set(A.induced.boundary)
        for drop in range(len(A.elements)):
            # an element pruned from the induced boundary is dominated; dropping it
            # leaves the norm unchanged, so it is not a corruption
            if A.elements[drop].scaled not in kept:
                redundant += 1
                continue
            if verify_sandwich(A.with_elements(
                    e for k, e in enumerate(A.elements) if k != drop)).passed:
                missed.append((i, "removal", drop))
        shrunk = A.with_elements(replace(e, scaled=e.scaled * 0.9) for e in A.elements)
        if verify_sandwich(shrunk).passed:
            missed.append((i, "scale"))
        pts = exposed_points(N, supports=False)
        for k in range(len(pts)):
            bad = pts[:k] + [replace(pts[k], radius=pts[k].radius * 1.1)] + pts[k + 1:]
            if verify_lemma_geometry(bad, N).passed:
                missed.append((i, "radius", k))
    report(7, "negative controls: element removal, -10% scale, +10% radius", not missed,
           f"undetected {missed[:3]}, dominated elements skipped {redundant}")


def _cli(argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(argv, stdout=out, stderr=err)
    return code, out.getvalue()


def test_criterion_8_determinism(report, tmp_path):
    rng = np.random.default_rng(8)
    N = random_normspec(rng, dim_max=3, pairs_max=8)
    norm = tmp_path / "n.json"
    norm.write_text(json.dumps(normspec_to_json(N)))
    blobs = []
    d = tmp_path / "run"
    d.mkdir()
    for _ in range(2):
        outputs = []
        outputs.append(_cli(["approximate", "--norm", str(norm), "--epsilon", "0.3",
                             "--out", str(d / "a.json")]))
        outputs.append(_cli(["verify", "--norm", str(norm), "--approx", str(d / "a.json"),
                             "--epsilon", "0.3", "--csv", str(d / "v.csv")]))
        outputs.append(_cli(["smooth", "--norm", str(norm), "--epsilon", "0.2", "--samples",
                             "500", "--seed", "11", "--csv", str(d / "s.csv")]))
        outputs.append(_cli(["analyze", "--norm", str(norm), "--seed", "2",
                             "--csv", str(d / "x.csv")]))
        files = [(d / name).read_bytes() for name in ("a.json", "v.csv", "s.csv", "x.csv")]
        blobs.append((outputs, files))
    ok = blobs[0] == blobs[1] and all(code == 0 for code, _ in blobs[0][0])
    report(8, "byte-identical CLI JSON/CSV across repeated runs", ok)
