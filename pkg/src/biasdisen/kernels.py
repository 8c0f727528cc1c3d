"""Hot numeric kernels.

Every kernel exists twice: a jit-compiled loop (``*_numba``) and a vectorised
numpy version (``*_numpy``). The public names dispatch on the backend chosen at
import time (see :mod:`biasdisen._backend`). Both variants are always importable
so tests and the benchmark can compare them in one process.
"""

import numpy as np

from ._backend import USE_NUMBA, njit


# ---------------------------------------------------------------------------
# CSR sparse x dense product


@njit(cache=True)
def spmm_numba(indptr, indices, data, h):
    n_rows = indptr.shape[0] - 1
    p = h.shape[1]
    out = np.zeros((n_rows, p))
    for i in range(n_rows):
        for jj in range(indptr[i], indptr[i + 1]):
            j = indices[jj]
            v = data[jj]
            for c in range(p):
                out[i, c] += v * h[j, c]
    return out


def spmm_numpy(indptr, indices, data, h):
    n_rows = indptr.shape[0] - 1
    out = np.zeros((n_rows, h.shape[1]))
    if data.shape[0] == 0:
        return out
    contrib = data[:, None] * h[indices]
    starts = indptr[:-1]
    nonempty = starts < indptr[1:]
    out[nonempty] = np.add.reduceat(contrib, starts[nonempty], axis=0)
    return out


# ---------------------------------------------------------------------------
# k nearest neighbours (squared Euclidean, ties to the lower index)


@njit(cache=True)
def _select_k(dist, k, out_row):
    thr = np.partition(dist, k - 1)[k - 1]
    count = 0
    for j in range(dist.shape[0]):
        if dist[j] < thr:
            out_row[count] = j
            count += 1
    for j in range(dist.shape[0]):
        if count == k:
            break
        if dist[j] == thr:
            out_row[count] = j
            count += 1
    out_row[:count].sort()


@njit(cache=True)
def knn_numba(x, k):
    n, d = x.shape
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        dist = np.empty(n)
        for j in range(n):
            s = 0.0
            for r in range(d):
                t = x[i, r] - x[j, r]
                s += t * t
            dist[j] = s
        dist[i] = np.inf
        _select_k(dist, k, out[i])
    return out


def knn_numpy(x, k, block_bytes=1 << 26):
    n, d = x.shape
    out = np.empty((n, k), dtype=np.int64)
    block = max(1, block_bytes // (8 * n * max(d, 1)))
    for start in range(0, n, block):
        stop = min(n, start + block)
        diff = x[start:stop, None, :] - x[None, :, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        rows = np.arange(stop - start)
        dist[rows, rows + start] = np.inf
        thr = np.partition(dist, k - 1, axis=1)[:, k - 1 : k]
        less = dist < thr
        tied = dist == thr
        need = k - less.sum(axis=1, keepdims=True)
        take = less | (tied & (np.cumsum(tied, axis=1) <= need))
        out[start:stop] = np.nonzero(take)[1].reshape(stop - start, k)
    return out


# ---------------------------------------------------------------------------
# 1-D Wasserstein-1 between empirical samples, with the a.e. gradient
#
# Along the merged sorted support z_0 <= ... <= z_{N-1} the CDF gap after point
# t is c_t = i_a/n_a - i_b/n_b (tracked as the integer i_a*n_b - i_b*n_a).
# W1 = sum_t |c_t| (z_{t+1} - z_t) and dW1/dz_t = |c_{t-1}| - |c_t|.


@njit(cache=True)
def w1_numba(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    n = na + nb
    z = np.empty(n)
    z[:na] = a
    z[na:] = b
    order = np.argsort(z, kind="mergesort")
    denom = float(na) * float(nb)
    grad = np.empty(n)
    total = 0.0
    gap = 0
    prev = 0.0
    for t in range(n):
        idx = order[t]
        if idx < na:
            gap += nb
        else:
            gap -= na
        cur = abs(gap) / denom
        grad[idx] = prev - cur
        if t < n - 1:
            total += cur * (z[order[t + 1]] - z[idx])
        prev = cur
    return total, grad[:na].copy(), grad[na:].copy()


def w1_numpy(a, b):
    na = a.shape[0]
    nb = b.shape[0]
    z = np.concatenate((a, b))
    order = np.argsort(z, kind="stable")
    zs = z[order]
    steps = np.where(order < na, nb, -na).astype(np.int64)
    cur = np.abs(np.cumsum(steps)) / (float(na) * float(nb))
    prev = np.concatenate(([0.0], cur[:-1]))
    total = float(np.dot(cur[:-1], np.diff(zs)))
    grad = np.empty(na + nb)
    grad[order] = prev - cur
    return total, grad[:na], grad[na:]


@njit(cache=True)
def w1_columns_numba(a, b):
    p = a.shape[1]
    values = np.empty(p)
    ga = np.empty_like(a)
    gb = np.empty_like(b)
    for c in range(p):
        v, g0, g1 = w1_numba(np.ascontiguousarray(a[:, c]), np.ascontiguousarray(b[:, c]))
        values[c] = v
        ga[:, c] = g0
        gb[:, c] = g1
    return values, ga, gb


def w1_columns_numpy(a, b):
    p = a.shape[1]
    values = np.empty(p)
    ga = np.empty_like(a)
    gb = np.empty_like(b)
    for c in range(p):
        values[c], ga[:, c], gb[:, c] = w1_numpy(a[:, c], b[:, c])
    return values, ga, gb


# ---------------------------------------------------------------------------
# dispatch

IMPLEMENTATIONS = {
    "spmm": {"numba": spmm_numba, "numpy": spmm_numpy},
    "knn": {"numba": knn_numba, "numpy": knn_numpy},
    "w1": {"numba": w1_numba, "numpy": w1_numpy},
    "w1_columns": {"numba": w1_columns_numba, "numpy": w1_columns_numpy},
}

_ACTIVE = "numba" if USE_NUMBA else "numpy"


def spmm(indptr, indices, data, h):
    return IMPLEMENTATIONS["spmm"][_ACTIVE](indptr, indices, data, np.ascontiguousarray(h, dtype=np.float64))


def knn(x, k):
    return IMPLEMENTATIONS["knn"][_ACTIVE](np.ascontiguousarray(x, dtype=np.float64), int(k))


def w1(a, b):
    return IMPLEMENTATIONS["w1"][_ACTIVE](
        np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64)
    )


def w1_columns(a, b):
    return IMPLEMENTATIONS["w1_columns"][_ACTIVE](
        np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64)
    )
