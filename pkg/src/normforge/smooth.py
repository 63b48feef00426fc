"""C-infinity (away from 0) norms from a finite boundary via p-power aggregation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import as_vector
from .normspec import NormSpec


def choose_p(k: int, eps: float) -> int:
    """Smallest even p >= 2 with k**(1/p) <= 1 + eps."""
    if k < 1 or eps <= 0:
        raise ValueError("need k >= 1 and eps > 0")
    if k == 1:
        return 2
    p = max(2, math.ceil(math.log(k) / math.log1p(eps)))
    p += p % 2
    while k ** (1.0 / p) > 1.0 + eps:
        p += 2
    while p > 2 and k ** (1.0 / (p - 2)) <= 1.0 + eps:
        p -= 2
    return p


@dataclass(frozen=True)
class SmoothNorm:
    """x -> (sum_b b(x)^p)^(1/p) / scale over the boundary of ``base``.

    With the default ``scale=1`` this dominates ``base`` and stays within a
    factor k**(1/p) above it.
    """

    base: NormSpec
    p: int
    scale: float = 1.0

    def __post_init__(self):
        if self.p < 2 or self.p % 2:
            raise ValueError(f"p must be an even integer >= 2, got {self.p}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def for_epsilon(cls, base: NormSpec, eps: float, normalize: bool = False) -> "SmoothNorm":
        p = choose_p(base.k, eps)
        return cls(base, p, base.k ** (1.0 / p) if normalize else 1.0)

    @property
    def k(self) -> int:
        return self.base.k

    def values(self, xs) -> tuple[np.ndarray, np.ndarray]:
        """Values and gradients for each row of ``xs``."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        value, grad = _kernels.smooth_values(self.base.matrix, xs, self.p)
        return value / self.scale, grad / self.scale

    def __call__(self, x) -> float:
        return float(self.values(as_vector(x, self.base.dim)[None, :])[0][0])


def smooth_value_and_gradient(S: SmoothNorm, x) -> tuple[float, np.ndarray]:
    x = as_vector(x, S.base.dim)
    if not np.any(x):
        raise ValueError("gradient undefined at the origin")
    value, grad = S.values(x[None, :])
    return float(value[0]), grad[0]


def central_difference_gradient(func, x, step: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        out[i] = (func(x + e) - func(x - e)) / (2.0 * step)
    return out
