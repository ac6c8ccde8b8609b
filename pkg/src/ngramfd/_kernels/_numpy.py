"""Vectorized numpy implementations of the hot kernels.

Same signatures and results as the numba versions in ``_jit``.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def window_codes(ids, offsets, n, base):
    ids = np.asarray(ids, dtype=np.int64)
    offsets = np.asarray(offsets, dtype=np.int64)
    if ids.size < n:
        return np.empty(0, dtype=np.int64)
    windows = sliding_window_view(ids, n)
    powers = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
    codes = windows @ powers
    starts = np.arange(windows.shape[0], dtype=np.int64)
    owner = np.searchsorted(offsets, starts, side="right") - 1
    valid = starts + n <= offsets[owner + 1]
    return codes[valid]


def _mask(sizes, k):
    return np.arange(k)[None, :] < sizes[:, None]


def _snap(d, scale):
    d[np.abs(d) <= 1e-12 * scale[:, None]] = 0.0
    return d


def hull_delta1(W, F, sizes):
    mask = _mask(sizes, W.shape[1])
    mean = (W * F).sum(axis=1)
    d = np.where(mask, F - mean[:, None], 0.0)
    scale = 1.0 + np.abs(np.where(mask, F, 0.0)).max(axis=1, initial=0.0)
    return _snap(d, scale)


def hull_delta2(W, P, sizes):
    L, K = W.shape
    mask = _mask(sizes, K)
    d = np.zeros((L, K))
    scale = np.ones(L)
    if L > 1:
        # left term for positions 1..L-1: pair index i-1, rows m over left cands, cols j
        Bl = P - np.einsum("ij,imj->im", W[1:], P)[:, :, None]
        d[1:] += np.einsum("im,imj->ij", W[:-1], Bl)
        # right term for positions 0..L-2: rows j over current cands, cols k over right
        Br = P - np.einsum("ij,ijk->ik", W[:-1], P)[:, None, :]
        d[:-1] += np.einsum("ik,ijk->ij", W[1:], Br)
        pmax = np.abs(P).max(axis=(1, 2))
        scale[1:] = np.maximum(scale[1:], 1.0 + pmax)
        scale[:-1] = np.maximum(scale[:-1], 1.0 + pmax)
    d = np.where(mask, d, 0.0)
    return _snap(d, scale)


def hull_update(W, D, sizes, alpha):
    K = W.shape[1]
    mask = _mask(sizes, K)
    nrm = np.sqrt((D * D).sum(axis=1))
    moving = nrm > 0.0
    safe = np.where(moving, nrm, 1.0)
    what = W - alpha * D / safe[:, None]
    wmin = np.where(mask, what, np.inf).min(axis=1, initial=np.inf)
    shifted = np.where(mask, what - wmin[:, None], 0.0)
    total = shifted.sum(axis=1)
    uniform = np.where(mask, 1.0 / np.maximum(sizes, 1)[:, None], 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        proj = np.where((total > 0.0)[:, None], shifted / total[:, None], uniform)
    return np.where(moving[:, None], proj, W)
