"""Top-down leveling of a finitely supported functional.

Level values ``p_1 > p_2 > ... > p_M > 0`` are the distinct absolute
coefficients of ``f`` in decreasing order, and level sets are
``G_i = {k : |f_k| >= p_i}``.  From these we build

* ``w(f, i)``: the sign pattern of ``f`` on ``G_i``;
* ``h(f, n) = sum_{i<=n} (p_i - p_{i+1}) w(f, i)``, which flattens ``f``
  below level ``p_{n+1}``;
* ``j(f, n, m) = h(f, n) + (||f - h(f, n)||_1 / |G_m|) w(f, m)``, which
  re-spreads the discarded l1 mass uniformly over ``G_m``;
* weights ``lambda_m`` with ``sum_m lambda_m j(f, n, m) == f``.

Throughout, ``p_{M+1} = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Functional, l1_norm, linear_combine
from .errors import LevelingError


@dataclass(frozen=True, eq=False)
class LevelingDecomposition:
    f: Functional
    levels: tuple[tuple[float, frozenset[int]], ...]

    @property
    def M(self) -> int:
        return len(self.levels)

    def p(self, i: int) -> float:
        """Level value p_i for 1 <= i <= M + 1 (p_{M+1} = 0)."""
        if i == self.M + 1:
            return 0.0
        self._check(i, 1, self.M)
        return self.levels[i - 1][0]

    def G(self, i: int) -> frozenset[int]:
        self._check(i, 1, self.M)
        return self.levels[i - 1][1]

    def _check(self, i, lo, hi):
        if not lo <= i <= hi:
            raise LevelingError(f"level index {i} outside {lo}..{hi}")


def level_sequence(f: Functional) -> LevelingDecomposition:
    if f.is_zero():
        raise LevelingError("zero functional has no leveling")
    mags = np.abs(f.coeffs)
    # exact equality classes: np.unique compares binary64 values exactly
    values = np.unique(mags)[::-1]
    levels = []
    for p in values:
        members = frozenset(int(i) for i in f.indices[mags >= p])
        levels.append((float(p), members))
    return LevelingDecomposition(f, tuple(levels))


def w_pattern(L: LevelingDecomposition, i: int) -> Functional:
    """Sign pattern of f on the level set G_i."""
    G = L.G(i)
    return Functional.from_dict(L.f.dim, {k: float(np.sign(L.f.coeff(k))) for k in G})


def h_approx(L: LevelingDecomposition, n: int) -> Functional:
    """h(f, n): f with every coefficient shrunk toward 0 by p_{n+1}, clipped to G_n.

    Computed coefficient-wise as ``f_k - p_{n+1} sgn(f_k)`` on ``G_n``, which
    equals the telescoped level sum and makes ``h(f, M) == f`` exact.
    """
    L._check(n, 1, L.M)
    cut = L.p(n + 1)
    f = L.f
    entries = {}
    for k in L.G(n):
        c = f.coeff(k)
        entries[k] = c - cut * np.sign(c)
    return Functional.from_dict(f.dim, entries)


def h_level_sum(L: LevelingDecomposition, n: int) -> Functional:
    """h(f, n) evaluated literally as the sum of (p_i - p_{i+1}) w(f, i)."""
    L._check(n, 1, L.M)
    return linear_combine([(L.p(i) - L.p(i + 1), w_pattern(L, i)) for i in range(1, n + 1)])


def residual_l1(L: LevelingDecomposition, n: int) -> float:
    """||f - h(f, n)||_1."""
    return l1_norm(L.f - h_approx(L, n))


def g_correction(L: LevelingDecomposition, n: int, m: int) -> Functional:
    _check_nm(L, n, m)
    mass = residual_l1(L, n)
    return linear_combine([(mass / len(L.G(m)), w_pattern(L, m))])


def j_approx(L: LevelingDecomposition, n: int, m: int) -> Functional:
    """j(f, n, m) = h(f, n) + g(f, n, m); supported in G_m."""
    _check_nm(L, n, m)
    return linear_combine([(1.0, h_approx(L, n)), (1.0, g_correction(L, n, m))])


def _check_nm(L: LevelingDecomposition, n: int, m: int) -> None:
    if not (1 <= n < m <= L.M):
        raise LevelingError(f"need 1 <= n < m <= M={L.M}, got n={n}, m={m}")


def lambda_weights(L: LevelingDecomposition, n: int) -> list[tuple[int, float]]:
    """Convex weights (m, lambda_m), m = n+1..M, with sum lambda_m j(f,n,m) == f."""
    if not 1 <= n < L.M:
        raise LevelingError(f"need 1 <= n < M={L.M}; residual vanishes at n={n}")
    mass = residual_l1(L, n)
    return [(m, (L.p(m) - L.p(m + 1)) * len(L.G(m)) / mass) for m in range(n + 1, L.M + 1)]


def convex_reconstruct(L: LevelingDecomposition, n: int) -> Functional:
    weights = lambda_weights(L, n)
    return linear_combine([(lam, j_approx(L, n, m)) for m, lam in weights])
