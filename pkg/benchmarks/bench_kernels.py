#!/usr/bin/env python3
"""Numba vs pure-numpy timings for the three hot kernels.

Usage:
    python3 benchmarks/bench_kernels.py [--repeat N] [--seed S]
"""
from __future__ import annotations

import argparse
import time
from itertools import product

import numpy as np

from normforge import _kernels


def best_of(fn, repeat):
    fn()  # warm up (JIT compile on first call)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def cases(rng):
    for d, k in ((3, 20), (4, 30), (5, 24), (6, 16)):
        bmat = rng.normal(size=(k, d))
        yield f"ball_vertices d={d} k={k}", (
            lambda b=bmat: _kernels.ball_vertices_numpy(b, 1e-9),
            lambda b=bmat: _kernels._ball_vertices_nb(b, 1e-9))
    for nv, rows in ((3, 20), (4, 24), (5, 20)):
        A = np.vstack([rng.normal(size=(rows, nv)), np.eye(nv), -np.eye(nv)])
        c = np.ones(A.shape[0])
        E = rng.normal(size=(1, nv))
        e = np.array([0.3])
        yield f"polytope_vertices vars={nv} rows={A.shape[0]}", (
            lambda A=A, c=c, E=E, e=e: _kernels.polytope_vertices_numpy(A, c, E, e, 1e-9),
            lambda A=A, c=c, E=E, e=e: _kernels._polytope_vertices_nb(A, c, E, e, 1e-9))
    for (d, k), n in product(((5, 20),), (10_000, 100_000)):
        bmat = rng.normal(size=(k, d))
        xs = rng.normal(size=(n, d))
        yield f"smooth_values d={d} k={k} n={n} p=32", (
            lambda b=bmat, x=xs: _kernels.smooth_values_numpy(b, x, 32),
            lambda b=bmat, x=xs: _kernels._smooth_values_nb(b, x, 32))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    if _kernels.numba is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<48}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, (np_fn, nb_fn) in cases(rng):
        t_np = best_of(np_fn, args.repeat)
        t_nb = best_of(nb_fn, args.repeat)
        print(f"{name:<48}{t_np * 1e3:>12.3f}{t_nb * 1e3:>12.3f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
