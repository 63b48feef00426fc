"""Hot numeric kernels.

Each kernel has a numba implementation and a pure-numpy twin with the same
pivoting and feasibility rules.  The public names (``ball_vertices``,
``polytope_vertices``, ``smooth_values``) resolve to the numba version unless
numba is missing or ``NORMFORGE_DISABLE_NUMBA=1``.
"""
from itertools import combinations

import numpy as np

from .config import numba_disabled

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

PIVOT_TOL = 1e-12
_CHUNK = 20000


def _sign_matrix(d):
    """All 2**d sign vectors as columns, shape (d, 2**d)."""
    grid = ((np.arange(2 ** d)[None, :] >> np.arange(d)[:, None]) & 1).astype(np.float64)
    return 1.0 - 2.0 * grid


# ---------------------------------------------------------------- numpy path

def _batched_lu(mats):
    """Partial-pivot LU of a stack of square matrices.

    Returns (lu, perm, ok); ``ok`` is False where a pivot falls below
    PIVOT_TOL times the matrix's largest entry.
    """
    lu = np.array(mats, dtype=np.float64, copy=True)
    nb, n, _ = lu.shape
    perm = np.tile(np.arange(n), (nb, 1))
    scale = np.abs(lu).reshape(nb, -1).max(axis=1) if n else np.zeros(nb)
    ok = scale > 0
    rows = np.arange(nb)
    for k in range(n):
        piv = k + np.argmax(np.abs(lu[:, k:, k]), axis=1)
        lu[rows, [k] * nb], lu[rows, piv] = lu[rows, piv].copy(), lu[rows, [k] * nb].copy()
        perm[rows, k], perm[rows, piv] = perm[rows, piv].copy(), perm[rows, k].copy()
        pivval = lu[:, k, k]
        ok &= np.abs(pivval) > PIVOT_TOL * scale
        safe = np.where(ok, pivval, 1.0)
        factors = lu[:, k + 1:, k] / safe[:, None]
        lu[:, k + 1:, k] = factors
        lu[:, k + 1:, k + 1:] -= factors[:, :, None] * lu[:, k, None, k + 1:]
    return lu, perm, ok


def _batched_lu_solve(lu, perm, rhs):
    """Solve with factors from ``_batched_lu``; rhs has shape (nb, n, nrhs)."""
    nb, n, _ = lu.shape
    y = np.take_along_axis(rhs, perm[:, :, None], axis=1).copy()
    for i in range(n):
        if i:
            y[:, i, :] -= np.einsum("bj,bjr->br", lu[:, i, :i], y[:, :i, :])
    for i in range(n - 1, -1, -1):
        if i < n - 1:
            y[:, i, :] -= np.einsum("bj,bjr->br", lu[:, i, i + 1:], y[:, i + 1:, :])
        diag = lu[:, i, i]
        y[:, i, :] /= np.where(diag == 0.0, 1.0, diag)[:, None]
    return y


def _combination_chunks(n, k):
    it = combinations(range(n), k)
    while True:
        block = list(_take(it, _CHUNK))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), k)


def _take(it, count):
    for _ in range(count):
        try:
            yield next(it)
        except StopIteration:
            return


def ball_vertices_numpy(bmat, tol):
    """Raw (non-deduplicated) vertices of {x : |bmat @ x| <= 1}."""
    bmat = np.ascontiguousarray(bmat, dtype=np.float64)
    k, d = bmat.shape
    signs = _sign_matrix(d)
    out = []
    for combo in _combination_chunks(k, d):
        lu, perm, ok = _batched_lu(bmat[combo])
        if not ok.any():
            continue
        lu, perm = lu[ok], perm[ok]
        rhs = np.broadcast_to(signs, (lu.shape[0],) + signs.shape)
        sol = _batched_lu_solve(lu, perm, rhs)  # (nb, d, 2**d)
        pts = np.transpose(sol, (0, 2, 1)).reshape(-1, d)
        vals = np.abs(pts @ bmat.T)
        feas = vals.max(axis=1) <= 1.0 + tol
        out.append(pts[feas])
    if not out:
        return np.zeros((0, d))
    return np.concatenate(out, axis=0)


def polytope_vertices_numpy(amat, cvec, emat, evec, tol):
    """Raw vertices of {y : amat @ y <= cvec, emat @ y == evec}."""
    amat = np.ascontiguousarray(amat, dtype=np.float64)
    emat = np.ascontiguousarray(emat, dtype=np.float64).reshape(-1, amat.shape[1])
    cvec = np.asarray(cvec, dtype=np.float64)
    evec = np.asarray(evec, dtype=np.float64)
    nv = amat.shape[1]
    neq = emat.shape[0]
    kfree = nv - neq
    out = []
    if kfree < 0 or kfree > amat.shape[0]:
        return np.zeros((0, nv))
    for combo in _combination_chunks(amat.shape[0], kfree):
        nb = combo.shape[0]
        mats = np.empty((nb, nv, nv))
        mats[:, :neq, :] = emat
        mats[:, neq:, :] = amat[combo]
        rhs = np.empty((nb, nv, 1))
        rhs[:, :neq, 0] = evec
        rhs[:, neq:, 0] = cvec[combo]
        lu, perm, ok = _batched_lu(mats)
        if not ok.any():
            continue
        sol = _batched_lu_solve(lu[ok], perm[ok], rhs[ok])[:, :, 0]
        feas = (sol @ amat.T - cvec).max(axis=1) <= tol
        out.append(sol[feas])
    if not out:
        return np.zeros((0, nv))
    return np.concatenate(out, axis=0)


def smooth_values_numpy(bmat, xs, p):
    """p-power aggregate of |bmat @ x| for each row x, plus gradients."""
    vals = np.asarray(xs, dtype=np.float64) @ np.asarray(bmat, dtype=np.float64).T
    top = np.abs(vals).max(axis=1)
    safe = np.where(top > 0, top, 1.0)
    ratio = vals / safe[:, None]
    s = (ratio ** p).sum(axis=1)
    value = top * s ** (1.0 / p)
    weights = ratio ** (p - 1) / (s ** ((p - 1.0) / p))[:, None]
    grad = weights @ bmat
    grad[top == 0] = np.nan
    return value, grad


# ---------------------------------------------------------------- numba path

if numba is not None:
    _jit = numba.njit(cache=True)

    @_jit
    def _lu_inplace(m, perm):
        n = m.shape[0]
        scale = 0.0
        for i in range(n):
            perm[i] = i
            for j in range(n):
                a = abs(m[i, j])
                if a > scale:
                    scale = a
        if scale == 0.0:
            return False
        ok = True
        for k in range(n):
            piv = k
            best = abs(m[k, k])
            for i in range(k + 1, n):
                a = abs(m[i, k])
                if a > best:
                    best = a
                    piv = i
            if piv != k:
                for j in range(n):
                    tmp = m[k, j]
                    m[k, j] = m[piv, j]
                    m[piv, j] = tmp
                t = perm[k]
                perm[k] = perm[piv]
                perm[piv] = t
            if not best > PIVOT_TOL * scale:
                ok = False
                return ok
            for i in range(k + 1, n):
                fac = m[i, k] / m[k, k]
                m[i, k] = fac
                for j in range(k + 1, n):
                    m[i, j] -= fac * m[k, j]
        return ok

    @_jit
    def _lu_solve_vec(lu, perm, b, out):
        n = lu.shape[0]
        for i in range(n):
            out[i] = b[perm[i]]
        for i in range(n):
            acc = out[i]
            for j in range(i):
                acc -= lu[i, j] * out[j]
            out[i] = acc
        for i in range(n - 1, -1, -1):
            acc = out[i]
            for j in range(i + 1, n):
                acc -= lu[i, j] * out[j]
            out[i] = acc / lu[i, i]

    @_jit
    def _next_combination(idx, n):
        k = idx.shape[0]
        i = k - 1
        while i >= 0 and idx[i] == n - k + i:
            i -= 1
        if i < 0:
            return False
        idx[i] += 1
        for j in range(i + 1, k):
            idx[j] = idx[j - 1] + 1
        return True

    @_jit
    def _grow(buf, count):
        if count < buf.shape[0]:
            return buf
        new = np.empty((buf.shape[0] * 2, buf.shape[1]))
        new[:count] = buf[:count]
        return new

    @_jit
    def ball_vertices_numba(bmat, tol):
        k, d = bmat.shape
        signs = _sign_matrix_nb(d)
        buf = np.empty((64, d))
        count = 0
        if d > k:
            return buf[:0]
        idx = np.arange(d)
        m = np.empty((d, d))
        perm = np.empty(d, dtype=np.int64)
        x = np.empty(d)
        col = np.empty(d)
        while True:
            for r in range(d):
                for c in range(d):
                    m[r, c] = bmat[idx[r], c]
            if _lu_inplace(m, perm):
                for s in range(signs.shape[1]):
                    for r in range(d):
                        col[r] = signs[r, s]
                    _lu_solve_vec(m, perm, col, x)
                    feas = True
                    for row in range(k):
                        acc = 0.0
                        for c in range(d):
                            acc += bmat[row, c] * x[c]
                        if abs(acc) > 1.0 + tol:
                            feas = False
                            break
                    if feas:
                        buf = _grow(buf, count)
                        buf[count, :] = x
                        count += 1
            if not _next_combination(idx, k):
                break
        return buf[:count].copy()

    @_jit
    def _sign_matrix_nb(d):
        n = 2 ** d
        out = np.empty((d, n))
        for s in range(n):
            for r in range(d):
                out[r, s] = -1.0 if (s >> r) & 1 else 1.0
        return out

    @_jit
    def polytope_vertices_numba(amat, cvec, emat, evec, tol):
        na, nv = amat.shape
        neq = emat.shape[0]
        kfree = nv - neq
        buf = np.empty((64, nv))
        count = 0
        if kfree < 0 or kfree > na:
            return buf[:0]
        m = np.empty((nv, nv))
        rhs = np.empty(nv)
        y = np.empty(nv)
        perm = np.empty(nv, dtype=np.int64)
        idx = np.arange(kfree)
        while True:
            for r in range(neq):
                for c in range(nv):
                    m[r, c] = emat[r, c]
                rhs[r] = evec[r]
            for r in range(kfree):
                for c in range(nv):
                    m[neq + r, c] = amat[idx[r], c]
                rhs[neq + r] = cvec[idx[r]]
            if _lu_inplace(m, perm):
                _lu_solve_vec(m, perm, rhs, y)
                feas = True
                for row in range(na):
                    acc = 0.0
                    for c in range(nv):
                        acc += amat[row, c] * y[c]
                    if acc - cvec[row] > tol:
                        feas = False
                        break
                if feas:
                    buf = _grow(buf, count)
                    buf[count, :] = y
                    count += 1
            if kfree == 0 or not _next_combination(idx, na):
                break
        return buf[:count].copy()

    @_jit
    def smooth_values_numba(bmat, xs, p):
        n, d = xs.shape
        k = bmat.shape[0]
        value = np.empty(n)
        grad = np.empty((n, d))
        vals = np.empty(k)
        for i in range(n):
            top = 0.0
            for b in range(k):
                acc = 0.0
                for c in range(d):
                    acc += bmat[b, c] * xs[i, c]
                vals[b] = acc
                if abs(acc) > top:
                    top = abs(acc)
            if top == 0.0:
                value[i] = 0.0
                grad[i, :] = np.nan
                continue
            s = 0.0
            for b in range(k):
                s += (vals[b] / top) ** p
            value[i] = top * s ** (1.0 / p)
            denom = s ** ((p - 1.0) / p)
            for c in range(d):
                grad[i, c] = 0.0
            for b in range(k):
                w = (vals[b] / top) ** (p - 1) / denom
                for c in range(d):
                    grad[i, c] += w * bmat[b, c]
        return value, grad

    def _ball_vertices_nb(bmat, tol):
        return ball_vertices_numba(np.ascontiguousarray(bmat, dtype=np.float64), float(tol))

    def _polytope_vertices_nb(amat, cvec, emat, evec, tol):
        amat = np.ascontiguousarray(amat, dtype=np.float64)
        emat = np.ascontiguousarray(emat, dtype=np.float64).reshape(-1, amat.shape[1])
        return polytope_vertices_numba(
            amat,
            np.ascontiguousarray(cvec, dtype=np.float64),
            emat,
            np.ascontiguousarray(evec, dtype=np.float64).reshape(-1),
            float(tol),
        )

    def _smooth_values_nb(bmat, xs, p):
        return smooth_values_numba(
            np.ascontiguousarray(bmat, dtype=np.float64),
            np.ascontiguousarray(xs, dtype=np.float64),
            int(p),
        )


USING_NUMBA = numba is not None and not numba_disabled()

if USING_NUMBA:
    ball_vertices = _ball_vertices_nb
    polytope_vertices = _polytope_vertices_nb
    smooth_values = _smooth_values_nb
else:
    ball_vertices = ball_vertices_numpy
    polytope_vertices = polytope_vertices_numpy
    smooth_values = smooth_values_numpy
