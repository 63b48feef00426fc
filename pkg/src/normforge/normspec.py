"""Polyhedral norms given by a finite symmetric boundary.

A :class:`NormSpec` stores one representative ``b`` of every pair ``{b, -b}``
and evaluates ``||x|| = max_b |b(x)|``.  Everything that needs the unit ball's
geometry (dual norms, the basis constant, equivalence ratios) goes through the
exact vertex set, which is enumerated once per spec and memoized.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .config import FEASIBILITY_TOL, VERTEX_DEDUP_TOL, dim_cap
from .core import Functional, as_vector
from .errors import CapExceededError, DimensionMismatchError, InvalidNormError

ATTAIN_TOL = 1e-9


@dataclass(frozen=True)
class VertexSet:
    """Unit-ball vertices, one per row, sorted lexicographically."""

    vertices: np.ndarray

    def __len__(self) -> int:
        return self.vertices.shape[0]

    def __iter__(self):
        return iter(self.vertices)


def dedup_rows(points: np.ndarray, tol: float = VERTEX_DEDUP_TOL) -> np.ndarray:
    """Drop rows within ``tol`` (max-abs) of an earlier row; sort the rest."""
    if points.shape[0] == 0:
        return points.reshape(0, points.shape[1] if points.ndim == 2 else 0)
    order = np.lexsort(points.T[::-1])
    kept: list[np.ndarray] = []
    stack = np.empty((0, points.shape[1]))
    for row in points[order]:
        if stack.shape[0] and np.min(np.abs(stack - row).max(axis=1)) <= tol:
            continue
        kept.append(row)
        stack = np.vstack([stack, row])
    out = np.array(kept) + 0.0  # normalize -0.0
    return out[np.lexsort(out.T[::-1])]


@dataclass(frozen=True, eq=False)
class NormSpec:
    """A norm ``x -> max_b |b(x)|`` over a finite boundary.

    Construction checks that the boundary spans the dual (so the max is a
    norm), that no representative is repeated up to sign, and, when the
    dimension is within the enumeration cap, that every representative
    attains the norm at some unit vector.
    """

    dim: int
    boundary: tuple[Functional, ...]
    name: str = "norm"
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        boundary = tuple(self.boundary)
        object.__setattr__(self, "boundary", boundary)
        if self.dim < 1:
            raise InvalidNormError("dim must be positive")
        if not boundary:
            raise InvalidNormError("boundary must be non-empty")
        for i, b in enumerate(boundary):
            if b.dim != self.dim:
                raise DimensionMismatchError(f"boundary[{i}] has dim {b.dim}, expected {self.dim}")
            if b.is_zero():
                raise InvalidNormError(f"boundary[{i}] is the zero functional")
        mat = np.array([b.to_dense() for b in boundary])
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)
        rank = np.linalg.matrix_rank(mat)
        if rank < self.dim:
            raise InvalidNormError(
                f"boundary of {self.name!r} has rank {rank} < dim {self.dim}; max is not a norm")
        seen: dict[bytes, int] = {}
        for i, row in enumerate(mat):
            for key in ((row + 0.0).tobytes(), (-row + 0.0).tobytes()):
                if key in seen:
                    raise InvalidNormError(
                        f"boundary[{i}] repeats boundary[{seen[key]}] up to sign")
            seen[(row + 0.0).tobytes()] = i
        if self.dim <= dim_cap():
            best = self.attainment()
            bad = np.flatnonzero(best < 1.0 - ATTAIN_TOL)
            if bad.size:
                i = int(bad[0])
                raise InvalidNormError(
                    f"boundary[{i}] = {boundary[i]!r} is dominated: max over the unit ball "
                    f"is {best[i]:.12g} < 1")

    @classmethod
    def canonical(cls, dim: int, name: str | None = None) -> "NormSpec":
        """The sup-norm, boundary {e*_0, ..., e*_(dim-1)}."""
        return cls(dim, tuple(Functional.coordinate(dim, i) for i in range(dim)),
                   name or f"canonical{dim}")

    @classmethod
    def from_dense(cls, rows, name: str = "norm", drop_dominated: bool = False) -> "NormSpec":
        rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
        return cls.from_functionals(rows.shape[1], [Functional.from_dense(r) for r in rows],
                                    name=name, drop_dominated=drop_dominated)

    @classmethod
    def from_functionals(cls, dim: int, functionals: Sequence[Functional], name: str = "norm",
                         drop_dominated: bool = False) -> "NormSpec":
        """Build a spec, optionally discarding duplicates and dominated elements.

        With ``drop_dominated`` the resulting norm is unchanged (a dominated
        element never realizes the max) but the boundary is minimal enough to
        pass the construction checks.
        """
        fs = [f for f in functionals if not f.is_zero()]
        if not drop_dominated:
            return cls(dim, tuple(fs), name)
        unique: list[Functional] = []
        keys: set[bytes] = set()
        for f in fs:
            row = f.to_dense() + 0.0
            if row.tobytes() in keys or (-row + 0.0).tobytes() in keys:
                continue
            keys.add(row.tobytes())
            unique.append(f)
        mat = np.array([f.to_dense() for f in unique]) if unique else np.zeros((0, dim))
        if mat.shape[0] == 0 or np.linalg.matrix_rank(mat) < dim:
            raise InvalidNormError(f"functionals for {name!r} do not span the dual space")
        verts = _enumerate(mat, dim)
        best = (verts @ mat.T).max(axis=0) if verts.shape[0] else np.zeros(len(unique))
        kept = [f for f, v in zip(unique, best) if v >= 1.0 - ATTAIN_TOL]
        return cls(dim, tuple(kept), name)

    @property
    def k(self) -> int:
        """Number of boundary representatives."""
        return len(self.boundary)

    def vertices(self) -> VertexSet:
        with self._lock:
            vs = self._cache.get("vertices")
            if vs is None:
                raw = _enumerate(self.matrix, self.dim)
                vs = VertexSet(raw)
                vs.vertices.setflags(write=False)
                self._cache["vertices"] = vs
        return vs

    def attainment(self) -> np.ndarray:
        """max over unit-ball vertices of b(v), for each representative b."""
        return (self.vertices().vertices @ self.matrix.T).max(axis=0)

    def norms(self, xs) -> np.ndarray:
        """Row-wise norm of a 2-D array."""
        xs = np.asarray(xs, dtype=np.float64)
        if xs.ndim != 2 or xs.shape[1] != self.dim:
            raise DimensionMismatchError(f"expected shape (n, {self.dim}), got {xs.shape}")
        return np.abs(xs @ self.matrix.T).max(axis=1)

    def __call__(self, x) -> float:
        return eval_norm(self, x)

    def __repr__(self) -> str:
        return f"NormSpec(name={self.name!r}, dim={self.dim}, k={self.k})"


def _enumerate(mat: np.ndarray, dim: int) -> np.ndarray:
    cap = dim_cap()
    if dim > cap:
        raise CapExceededError(f"cap exceeded: dim {dim} > vertex-enumeration cap {cap}")
    raw = _kernels.ball_vertices(mat, FEASIBILITY_TOL)
    return dedup_rows(raw)


def eval_norm(N: NormSpec, x) -> float:
    x = as_vector(x, N.dim)
    return float(np.abs(N.matrix @ x).max())


def unit_ball_vertices(N: NormSpec) -> VertexSet:
    return N.vertices()


def dual_norm(N: NormSpec, f: Functional) -> float:
    """sup{f(x) : ||x|| <= 1}, attained at a vertex of the unit ball."""
    if f.dim != N.dim:
        raise DimensionMismatchError(f"functional dim {f.dim} vs norm dim {N.dim}")
    if f.is_zero():
        return 0.0
    verts = N.vertices().vertices
    return float(max(0.0, (verts[:, f.indices] @ f.coeffs).max()))


def basis_constant_L(N: NormSpec) -> float:
    """Largest dual norm of a coordinate functional; dual_norm <= L * l1_norm."""
    return float(np.abs(N.vertices().vertices).max())


def equivalence_ratio(A: NormSpec, B: NormSpec) -> tuple[float, float]:
    """(min, max) of ||x||_A / ||x||_B over x != 0."""
    if A.dim != B.dim:
        raise DimensionMismatchError(f"dims differ: {A.dim} vs {B.dim}")
    pts = np.vstack([A.vertices().vertices, B.vertices().vertices])
    ratio = A.norms(pts) / B.norms(pts)
    return float(ratio.min()), float(ratio.max())


__all__ = [
    "NormSpec", "VertexSet", "eval_norm", "unit_ball_vertices", "dual_norm",
    "basis_constant_L", "equivalence_ratio", "dedup_rows",
]
