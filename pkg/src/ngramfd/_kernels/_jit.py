"""numba kernels. Loop forms of the functions in ``_numpy``."""

import numpy as np
from numba import njit


@njit(cache=True)
def window_codes(ids, offsets, n, base):
    ntexts = offsets.shape[0] - 1
    total = 0
    for t in range(ntexts):
        m = offsets[t + 1] - offsets[t] - n + 1
        if m > 0:
            total += m
    out = np.empty(total, dtype=np.int64)
    top = 1
    for _ in range(n - 1):
        top *= base
    pos = 0
    for t in range(ntexts):
        lo = offsets[t]
        hi = offsets[t + 1]
        if hi - lo < n:
            continue
        code = 0
        for k in range(n):
            code = code * base + ids[lo + k]
        out[pos] = code
        pos += 1
        for s in range(lo + 1, hi - n + 1):
            code = (code - ids[s - 1] * top) * base + ids[s + n - 1]
            out[pos] = code
            pos += 1
    return out


@njit(cache=True)
def _snap_row(d, k, scale):
    tol = 1e-12 * scale
    for j in range(k):
        if abs(d[j]) <= tol:
            d[j] = 0.0


@njit(cache=True)
def hull_delta1(W, F, sizes):
    L, K = W.shape
    D = np.zeros((L, K))
    for i in range(L):
        k = sizes[i]
        mean = 0.0
        scale = 1.0
        for j in range(k):
            mean += W[i, j] * F[i, j]
            if 1.0 + abs(F[i, j]) > scale:
                scale = 1.0 + abs(F[i, j])
        for j in range(k):
            D[i, j] = F[i, j] - mean
        _snap_row(D[i], k, scale)
    return D


@njit(cache=True)
def hull_delta2(W, P, sizes):
    L, K = W.shape
    D = np.zeros((L, K))
    for i in range(L):
        k = sizes[i]
        scale = 1.0
        if i > 0:
            kl = sizes[i - 1]
            for m in range(kl):
                c = 0.0
                for j in range(k):
                    c += W[i, j] * P[i - 1, m, j]
                for j in range(k):
                    D[i, j] += W[i - 1, m] * (P[i - 1, m, j] - c)
                    if 1.0 + abs(P[i - 1, m, j]) > scale:
                        scale = 1.0 + abs(P[i - 1, m, j])
        if i < L - 1:
            kr = sizes[i + 1]
            for r in range(kr):
                c = 0.0
                for j in range(k):
                    c += W[i, j] * P[i, j, r]
                for j in range(k):
                    D[i, j] += W[i + 1, r] * (P[i, j, r] - c)
                    if 1.0 + abs(P[i, j, r]) > scale:
                        scale = 1.0 + abs(P[i, j, r])
        _snap_row(D[i], k, scale)
    return D


@njit(cache=True)
def hull_update(W, D, sizes, alpha):
    L, K = W.shape
    out = W.copy()
    for i in range(L):
        k = sizes[i]
        nrm = 0.0
        for j in range(k):
            nrm += D[i, j] * D[i, j]
        nrm = np.sqrt(nrm)
        if nrm == 0.0:
            continue
        wmin = np.inf
        for j in range(k):
            out[i, j] = W[i, j] - alpha * D[i, j] / nrm
            if out[i, j] < wmin:
                wmin = out[i, j]
        total = 0.0
        for j in range(k):
            out[i, j] -= wmin
            total += out[i, j]
        for j in range(k):
            if total > 0.0:
                out[i, j] /= total
            else:
                out[i, j] = 1.0 / k
    return out
