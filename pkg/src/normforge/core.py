"""Sparse functionals, dense vectors and the l1 machinery."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatchError


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float64 array, optionally checking its length."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(f"vector has dim {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


@dataclass(frozen=True, eq=False)
class Functional:
    """A finitely supported linear functional on R^dim.

    Entries are kept sorted by index with no stored zeros.  Build instances
    with :meth:`from_pairs`, :meth:`from_dict` or :meth:`from_dense`.
    """

    dim: int
    indices: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        val = np.asarray(self.coeffs, dtype=np.float64).reshape(-1)
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if idx.shape != val.shape:
            raise ValueError("indices and coeffs must have equal length")
        if idx.size:
            if np.any(np.diff(idx) <= 0):
                raise ValueError("indices must be strictly increasing")
            if idx[0] < 0 or idx[-1] >= self.dim:
                raise ValueError(f"index out of range for dim {self.dim}")
            if np.any(val == 0.0):
                raise ValueError("zero coefficients must not be stored")
            if not np.all(np.isfinite(val)):
                raise ValueError("coefficients must be finite")
        idx.setflags(write=False)
        val.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "coeffs", val)

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[int, float]]) -> "Functional":
        acc: dict[int, float] = {}
        for i, c in pairs:
            acc[int(i)] = acc.get(int(i), 0.0) + float(c)
        return cls.from_dict(dim, acc)

    @classmethod
    def from_dict(cls, dim: int, entries: Mapping[int, float]) -> "Functional":
        items = sorted((int(i), float(c)) for i, c in entries.items() if c != 0.0)
        return cls(dim, np.array([i for i, _ in items], dtype=np.int64),
                   np.array([c for _, c in items], dtype=np.float64))

    @classmethod
    def from_dense(cls, coords) -> "Functional":
        arr = np.asarray(coords, dtype=np.float64).reshape(-1)
        nz = np.flatnonzero(arr)
        return cls(arr.size, nz, arr[nz])

    @classmethod
    def zero(cls, dim: int) -> "Functional":
        return cls(dim, np.zeros(0, dtype=np.int64), np.zeros(0))

    @classmethod
    def coordinate(cls, dim: int, index: int, value: float = 1.0) -> "Functional":
        return cls(dim, np.array([index]), np.array([value]))

    @property
    def support(self) -> frozenset[int]:
        return frozenset(int(i) for i in self.indices)

    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def is_zero(self) -> bool:
        return self.indices.size == 0

    def coeff(self, index: int) -> float:
        pos = np.searchsorted(self.indices, index)
        if pos < self.indices.size and self.indices[pos] == index:
            return float(self.coeffs[pos])
        return 0.0

    def to_dict(self) -> dict[int, float]:
        return {int(i): float(c) for i, c in zip(self.indices, self.coeffs)}

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.indices] = self.coeffs
        return out

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def __neg__(self) -> "Functional":
        return Functional(self.dim, self.indices, -self.coeffs)

    def __add__(self, other: "Functional") -> "Functional":
        return linear_combine([(1.0, self), (1.0, other)])

    def __sub__(self, other: "Functional") -> "Functional":
        return linear_combine([(1.0, self), (-1.0, other)])

    def __mul__(self, a: float) -> "Functional":
        return linear_combine([(float(a), self)])

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Functional):
            return NotImplemented
        return (self.dim == other.dim
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.coeffs, other.coeffs))

    def __hash__(self) -> int:
        return hash((self.dim, self.indices.tobytes(), self.coeffs.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(f"{i}: {c:g}" for i, c in self.to_dict().items())
        return f"Functional(dim={self.dim}, {{{body}}})"


def evaluate(f: Functional, x) -> float:
    """f(x) as a sparse dot product."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != f.dim:
        raise DimensionMismatchError(f"functional dim {f.dim} vs vector shape {x.shape}")
    if f.indices.size == 0:
        return 0.0
    return float(np.dot(f.coeffs, x[f.indices]))


def l1_norm(f: Functional) -> float:
    """Sum of absolute coefficients."""
    return float(np.abs(f.coeffs).sum())


def linear_combine(terms: Iterable[tuple[float, Functional]]) -> Functional:
    """Coefficient-wise sum of scaled functionals.

    Terms are accumulated in the given order; coefficients that end up
    exactly 0.0 are dropped (no epsilon).
    """
    terms = list(terms)
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    dim = terms[0][1].dim
    acc: dict[int, float] = {}
    for a, f in terms:
        if f.dim != dim:
            raise DimensionMismatchError(f"cannot combine dims {dim} and {f.dim}")
        a = float(a)
        for i, c in zip(f.indices.tolist(), f.coeffs.tolist()):
            acc[i] = acc.get(i, 0.0) + a * c
    return Functional.from_dict(dim, acc)
