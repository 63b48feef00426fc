"""Finite-support approximation of a boundary-represented norm.

Every boundary element ``f`` of the source norm is replaced by scaled
leveled copies ``(1 + 2^-r eps) j(f, n, m)``, where ``r`` is the l1 class of
``f`` and ``n`` is the first level at which every later ``j(f, n, m)`` is
within ``2^-(r+2) eps`` of ``f`` in dual norm.  The max over these elements is
a norm squeezed strictly between ``||x||`` and ``(1 + eps)||x||``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import Functional, l1_norm, linear_combine
from .errors import InvalidNormError, NormforgeError
from .leveling import j_approx, level_sequence
from .normspec import NormSpec, dual_norm

TOL = 1e-9


def r_class(f: Functional) -> int:
    """Smallest positive integer r with ||f||_1 <= r (up to 1e-12 relative rounding)."""
    return max(1, math.ceil(l1_norm(f) * (1.0 - 1e-12)))


def _check_eps(eps: float) -> None:
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")


def minimal_n(N: NormSpec, f: Functional, eps: float) -> tuple[int, int]:
    """(r, n) for a boundary element f of N.

    n is the first level with dual_norm(f - j(f, n, m)) < 2^-(r+2) eps for
    every m in n+1..M.  A single-level f returns n = 1 = M (then j == f).
    """
    _check_eps(eps)
    dn = dual_norm(N, f)
    if abs(dn - 1.0) > TOL:
        raise ValueError(f"{f!r} is not a boundary element of {N.name!r}: dual norm {dn}")
    r = r_class(f)
    L = level_sequence(f)
    if L.M == 1:
        return r, 1
    bound = 2.0 ** -(r + 2) * eps
    for n in range(1, L.M):
        if all(dual_norm(N, f - j_approx(L, n, m)) < bound for m in range(n + 1, L.M + 1)):
            return r, n
    raise NormforgeError(f"no admissible level for {f!r}")  # unreachable: j(f, M-1, M) == f


@dataclass(frozen=True, eq=False)
class ApproxElement:
    source_index: int
    f_source: Functional
    r: int
    n: int
    m: int
    scale: float
    j: Functional
    scaled: Functional
    distance: float  # dual_norm(source, f_source - j)


@dataclass(frozen=True, eq=False)
class ApproxNorm:
    source: NormSpec
    epsilon: float
    elements: tuple[ApproxElement, ...]
    m_extra: int = 1
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def induced(self) -> NormSpec:
        """The approximating norm as a NormSpec (dominated elements pruned)."""
        if "induced" not in self._cache:
            self._cache["induced"] = NormSpec.from_functionals(
                self.source.dim, [e.scaled for e in self.elements],
                name=f"{self.source.name}~eps{self.epsilon:g}", drop_dominated=True)
        return self._cache["induced"]

    def values(self, xs) -> np.ndarray:
        """Row-wise max_e |scaled_e(x)|, computed without building ``induced``."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        if not self.elements:
            return np.zeros(xs.shape[0])
        mat = np.array([e.scaled.to_dense() for e in self.elements])
        return np.abs(xs @ mat.T).max(axis=1)

    def with_elements(self, elements) -> "ApproxNorm":
        return replace(self, elements=tuple(elements), _cache={})


def build_approx_norm(N: NormSpec, eps: float, m_extra: int = 1) -> ApproxNorm:
    _check_eps(eps)
    if m_extra < 1:
        raise ValueError("m_extra must be >= 1")
    elements = []
    for idx, f in enumerate(N.boundary):
        r, n = minimal_n(N, f, eps)
        L = level_sequence(f)
        scale = 1.0 + 2.0 ** -r * eps
        bound = 2.0 ** -(r + 2) * eps
        if n == L.M:
            elements.append(ApproxElement(idx, f, r, n, n, scale, f, f * scale, 0.0))
            continue
        for m in range(n + 1, min(n + m_extra, L.M) + 1):
            j = j_approx(L, n, m)
            dist = dual_norm(N, f - j)
            if not dist < bound:  # guaranteed by minimal_n
                raise NormforgeError(f"element {idx} at (n={n}, m={m}) misses the bound")
            elements.append(ApproxElement(idx, f, r, n, m, scale, j,
                                          linear_combine([(scale, j)]), dist))
    return ApproxNorm(N, float(eps), tuple(elements), m_extra)


@dataclass
class SandwichRow:
    ball: str  # "source" or "approx": whose unit-ball vertex this is
    vertex_id: int
    vertex: np.ndarray
    source_norm: float
    approx_norm: float
    r: int
    lower_factor: float

    @property
    def ratio(self) -> float:
        return self.approx_norm / self.source_norm

    @property
    def lower_margin(self) -> float:
        return self.approx_norm - self.lower_factor * self.source_norm

    def upper_margin(self, eps: float) -> float:
        return (1.0 + eps) * self.source_norm - self.approx_norm


@dataclass
class SandwichReport:
    epsilon: float
    rows: list[SandwichRow]
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def records(self) -> list[dict]:
        return [{
            "vertex_id": f"{row.ball}:{row.vertex_id}",
            "source_norm": row.source_norm,
            "approx_norm": row.approx_norm,
            "ratio": row.ratio,
            "lower_margin": row.lower_margin,
            "upper_margin": row.upper_margin(self.epsilon),
        } for row in self.rows]


def lower_factor(r: int, eps: float) -> float:
    return (1.0 + 2.0 ** -r * eps) * (1.0 - 2.0 ** -(r + 2) * eps)


def verify_sandwich(A: ApproxNorm) -> SandwichReport:
    """Check ||v|| < |||v||| <= (1 + eps)||v|| vertex by vertex.

    Vertices of the source ball cover the upper bound (a convex function
    peaks at vertices); vertices of the approximating ball cover the lower
    bound.  The lower bound at v is the quantitative one,
    (1 + 2^-r eps)(1 - 2^-(r+2) eps), with r the smallest l1 class among
    source boundary elements attaining the norm at v.
    """
    eps = A.epsilon
    src = A.source
    classes = np.array([r_class(b) for b in src.boundary])
    failures: list[str] = []
    points = [("source", src.vertices().vertices)]
    try:
        points.append(("approx", A.induced.vertices().vertices))
    except InvalidNormError as exc:
        failures.append(f"approximating boundary does not define a norm: {exc}")
    rows = []
    for ball, verts in points:
        s_norm = src.norms(verts)
        a_norm = A.values(verts)
        attain = np.abs(verts @ src.matrix.T) >= (1.0 - TOL) * s_norm[:, None]
        for vid, v in enumerate(verts):
            r = int(classes[attain[vid]].min())
            row = SandwichRow(ball, vid, v, float(s_norm[vid]), float(a_norm[vid]), r,
                              lower_factor(r, eps))
            rows.append(row)
            if row.lower_margin < -TOL:
                failures.append(f"lower bound fails at {ball} vertex {vid} {v.tolist()}: "
                                f"margin {row.lower_margin:.3e}")
            if row.upper_margin(eps) < -TOL:
                failures.append(f"upper bound fails at {ball} vertex {vid} {v.tolist()}: "
                                f"margin {row.upper_margin(eps):.3e}")
    return SandwichReport(eps, rows, failures)


@dataclass
class ElementCheck:
    index: int
    source_index: int
    distance: float
    distance_bound: float
    dual_norm: float
    dual_bound: float

    @property
    def passed(self) -> bool:
        return self.distance < self.distance_bound and self.dual_norm <= self.dual_bound + TOL


def verify_elements(A: ApproxNorm) -> list[ElementCheck]:
    """Per-element membership bound and upper-bound chain, recomputed from scratch."""
    eps = A.epsilon
    out = []
    for k, e in enumerate(A.elements):
        r = r_class(e.f_source)
        scale = 1.0 + 2.0 ** -r * eps
        j = linear_combine([(1.0 / scale, e.scaled)])
        out.append(ElementCheck(
            k, e.source_index,
            dual_norm(A.source, e.f_source - j), 2.0 ** -(r + 2) * eps,
            dual_norm(A.source, e.scaled), scale * (1.0 + 2.0 ** -(r + 2) * eps)))
    return out


@dataclass
class SupportRecord:
    index: int
    source_index: int
    m: int
    source_support: int
    scaled_support: int
    level_support: int  # |G(f_source, m)|
    within_level_set: bool


@dataclass
class SupportProfile:
    records: list[SupportRecord]

    @property
    def max_support(self) -> int:
        return max((r.scaled_support for r in self.records), default=0)

    @property
    def mean_support(self) -> float:
        return float(np.mean([r.scaled_support for r in self.records])) if self.records else 0.0

    @property
    def max_source_support(self) -> int:
        return max((r.source_support for r in self.records), default=0)

    @property
    def all_within(self) -> bool:
        return all(r.within_level_set for r in self.records)


def support_profile(A: ApproxNorm) -> SupportProfile:
    records = []
    for k, e in enumerate(A.elements):
        L = level_sequence(e.f_source)
        G = L.G(min(e.m, L.M))
        records.append(SupportRecord(k, e.source_index, e.m, e.f_source.nnz, e.scaled.nnz,
                                     len(G), e.scaled.support <= G))
    return SupportProfile(records)
