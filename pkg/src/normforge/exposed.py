"""Strongly exposed points of a polyhedral dual ball and their witnesses.

For a polyhedral norm the w*-strongly exposed points of the dual ball are its
vertices.  A vertex ``f`` is witnessed by a unit vector ``x`` with ``f(x) = 1``
and a radius ``r > 0`` such that ``||x + z|| = f(x + z)`` whenever ``||z|| < r``.
For a fixed ``x`` the best radius is

    r(x) = min_{g != f} (1 - g(x)) / ||f - g||*

over the other dual vertices ``g``; we maximize it over the face
``{x : f(x) = 1, ||x|| <= 1}`` as a small linear program in ``(x, t)``, solved
by enumerating the vertices of the feasible polytope.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from . import _kernels
from .config import FEASIBILITY_TOL, dim_cap
from .core import Functional
from .errors import CapExceededError
from .normspec import NormSpec, dedup_rows, dual_norm

TOL = 1e-9
MAX_M = 64
SUBSET_DIM_CAP = 8


@dataclass(frozen=True, eq=False)
class ExposedPoint:
    f: Functional
    witness: np.ndarray
    radius: float
    n_f: int | None = None
    m_f: int | None = None
    class_witness: np.ndarray | None = None  # witness certifying membership in D_{n_f, m_f}
    class_radius: float | None = None

    def key(self) -> tuple:
        return tuple(self.f.to_dense().tolist())


class DualGeometry:
    """Dual-ball vertices of a NormSpec and the witness programs over them."""

    def __init__(self, N: NormSpec):
        if N.dim > dim_cap():
            raise CapExceededError(f"cap exceeded: dim {N.dim} > cap {dim_cap()}")
        self.N = N
        verts = N.vertices().vertices
        self.vertex_reps: list[int] = []
        self.non_vertex_reps: list[int] = []
        for i, row in enumerate(N.matrix):
            face = verts[verts @ row >= 1.0 - TOL]
            if face.shape[0] and np.linalg.matrix_rank(face, tol=1e-9) == N.dim:
                self.vertex_reps.append(i)
            else:
                self.non_vertex_reps.append(i)
        rows = []
        for i in self.vertex_reps:
            rows.append(N.matrix[i])
            rows.append(-N.matrix[i])
        self.vertices = np.array(rows) + 0.0

    def others(self, f: np.ndarray) -> np.ndarray:
        keep = np.abs(self.vertices - f).max(axis=1) > 0
        return self.vertices[keep]

    def gaps(self, f: np.ndarray, others: np.ndarray) -> np.ndarray:
        """||f - g||* for each row g."""
        verts = self.N.vertices().vertices
        return ((f - others) @ verts.T).max(axis=1)

    def radius_at(self, f: np.ndarray, x: np.ndarray) -> float:
        others = self.others(f)
        if others.shape[0] == 0:
            return float("inf")
        return float(((1.0 - others @ x) / self.gaps(f, others)).min())

    def best_witness(self, f: np.ndarray, support=None, box: float | None = None):
        """Maximize r(x) over the face with x supported on ``support``.

        Returns (x, r); r is -inf when the restricted face is empty.  Among
        optimal x the lexicographically smallest is returned.
        """
        d = self.N.dim
        S = list(range(d)) if support is None else sorted(support)
        fs = f[S]
        if not np.any(fs):
            return np.zeros(d), float("-inf")
        others = self.others(f)
        gaps = self.gaps(f, others)
        k = len(S)
        rows = [np.append(others[:, S], gaps[:, None], axis=1)]
        rhs = [np.ones(others.shape[0])]
        t_row = np.zeros((1, k + 1))
        t_row[0, k] = -1.0
        rows.append(t_row)
        rhs.append(np.zeros(1))
        if box is not None:
            eye = np.hstack([np.eye(k), np.zeros((k, 1))])
            rows += [eye, -eye]
            rhs += [np.full(k, box), np.full(k, box)]
        amat = np.vstack(rows)
        cvec = np.concatenate(rhs)
        emat = np.append(fs, 0.0)[None, :]
        pts = _kernels.polytope_vertices(amat, cvec, emat, np.ones(1), FEASIBILITY_TOL)
        if pts.shape[0] == 0:
            return np.zeros(d), float("-inf")
        t_best = pts[:, -1].max()
        opt = dedup_rows(pts[pts[:, -1] >= t_best - TOL][:, :k])
        x = np.zeros(d)
        x[S] = opt[0]
        return x + 0.0, float(t_best)


def exposed_points(N: NormSpec, supports: bool = True) -> list[ExposedPoint]:
    """All dual-ball vertices (both signs) with maximal-radius witnesses.

    With ``supports`` each point also carries its minimal witness support
    ``n_f`` and the D_{n,m} class index ``m_f``.
    """
    geo = DualGeometry(N)
    points = []
    for row in geo.vertices:
        x, t = geo.best_witness(row)
        if not t > TOL:
            continue  # face without relative interior: not strongly exposed
        f = Functional.from_dense(row)
        pt = ExposedPoint(f, x, t)
        if supports:
            pt = _with_class(geo, pt)
        points.append(pt)
    points.sort(key=ExposedPoint.key)
    return points


def not_exposed(N: NormSpec) -> list[int]:
    """Indices of boundary representatives that are not dual-ball vertices."""
    return DualGeometry(N).non_vertex_reps


def minimal_support_witness(N: NormSpec, f: Functional, _geo: DualGeometry | None = None):
    """(n_f, witness, radius): the fewest basis vectors spanning a positive-radius witness."""
    if N.dim > SUBSET_DIM_CAP:
        raise CapExceededError(f"cap exceeded: subset search needs dim <= {SUBSET_DIM_CAP}")
    geo = _geo or DualGeometry(N)
    row = f.to_dense()
    for n in range(1, N.dim + 1):
        best = None
        for S in combinations(range(N.dim), n):
            x, t = geo.best_witness(row, S)
            if t > TOL and (best is None or t > best[1] + TOL):
                best = (x, t)
        if best is not None:
            return n, best[0], best[1]
    raise ValueError(f"{f!r} has no positive-radius witness; it is not strongly exposed")


def _class_index(geo: DualGeometry, row: np.ndarray, n: int):
    """Minimal m with an n-supported witness of radius >= 2^-m and coefficients <= m."""
    for m in range(1, MAX_M + 1):
        best = None
        for S in combinations(range(geo.N.dim), n):
            x, t = geo.best_witness(row, S, box=float(m))
            if t >= 2.0 ** -m - 1e-12 and (best is None or t > best[1] + TOL):
                best = (x, t)
        if best is not None:
            return m, best[0], best[1]
    raise ValueError(f"no D_(n,m) class with m <= {MAX_M}")


def _with_class(geo: DualGeometry, pt: ExposedPoint) -> ExposedPoint:
    n, _, _ = minimal_support_witness(geo.N, pt.f, geo)
    m, x, t = _class_index(geo, pt.f.to_dense(), n)
    return ExposedPoint(pt.f, pt.witness, pt.radius, n, m, x, t)


@dataclass
class Check:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class LemmaReport:
    checks: list[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def verify_lemma_geometry(points: list[ExposedPoint], N: NormSpec, samples: int = 32,
                          seed: int = 0) -> LemmaReport:
    """Re-derive the separation lemma's conclusions for a set of witnessed points.

    Checks, per point: the witness is a unit vector normed by f; the claimed
    radius is admissible (||x_f + z|| = f(x_f + z) on the open r_f-ball, via
    the closed-form bound over dual vertices); r_f <= ||x_f||.  Per ordered
    pair: ||x_g - x_f|| >= r_f, and g(x_f + z) < ||x_f + z|| for z of norm
    0.9 r_f taken from unit-ball vertex directions and random directions.
    """
    geo = DualGeometry(N)
    rng = np.random.default_rng(seed)
    report = LemmaReport()
    add = report.checks.append
    verts = N.vertices().vertices
    for i, p in enumerate(points):
        row = p.f.to_dense()
        label = f"point {i} {p.f!r}"
        nx = N(p.witness)
        fx = float(row @ p.witness)
        err = max(abs(nx - 1.0), abs(fx - 1.0))
        add(Check("witness_normed", err <= TOL, TOL - err, label))
        cap = geo.radius_at(row, p.witness)
        add(Check("radius_admissible", p.radius <= cap + TOL, cap - p.radius, label))
        add(Check("radius_le_norm", p.radius <= nx + TOL, nx - p.radius, label))
        dirs = rng.standard_normal((samples, N.dim))
        dirs = np.vstack([verts, dirs[np.any(dirs != 0, axis=1)]])
        zs = 0.9 * p.radius * dirs / N.norms(dirs)[:, None]
        ys = p.witness + zs
        ny = N.norms(ys)
        for jdx, q in enumerate(points):
            if jdx == i:
                continue
            pair = f"{label} vs point {jdx} {q.f!r}"
            sep = N(q.witness - p.witness)
            add(Check("pairwise_separation", sep >= p.radius - TOL, sep - p.radius, pair))
            gap = float((ny - ys @ q.f.to_dense()).min())
            add(Check("strict_domination", gap > 0.0, gap, pair))
    return report


@dataclass
class DnmDecomposition:
    classes: dict[tuple[int, int], list[ExposedPoint]]
    checks: list[Check]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def decompose_Dnm(points: list[ExposedPoint], N: NormSpec | None = None) -> DnmDecomposition:
    """Group points by (n_f, m_f) and verify each class is uniformly separated.

    Points lacking class data are annotated first, which requires ``N``.
    Within a class the certifying witnesses must be 2^-m apart in norm and
    the functionals pairwise distinct.
    """
    if not points:
        return DnmDecomposition({}, [])
    if any(p.m_f is None for p in points):
        if N is None:
            raise ValueError("points lack (n_f, m_f); pass the NormSpec to compute them")
        geo = DualGeometry(N)
        points = [p if p.m_f is not None else _with_class(geo, p) for p in points]
    if N is None:
        raise ValueError("a NormSpec is required to measure witness separation")
    classes: dict[tuple[int, int], list[ExposedPoint]] = {}
    for p in points:
        classes.setdefault((p.n_f, p.m_f), []).append(p)
    checks = []
    for (n, m), members in sorted(classes.items()):
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                p, q = members[a], members[b]
                sep = N(q.class_witness - p.class_witness)
                label = f"D_({n},{m}): {p.f!r} vs {q.f!r}"
                checks.append(Check("class_separation", sep >= 2.0 ** -m - TOL,
                                    sep - 2.0 ** -m, label))
                dist = dual_norm(N, p.f - q.f)
                checks.append(Check("distinct_functionals", dist > 0.0, dist, label))
    return DnmDecomposition(dict(sorted(classes.items())), checks)
