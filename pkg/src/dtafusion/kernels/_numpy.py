"""Pure-numpy reference implementations of the hot kernels.

Every function here has a numba twin in ``_numba.py`` with the same signature
and semantics; parity is enforced by tests/test_kernels.py. Keep these
vectorized but simple — they are the fallback path and the ground truth.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided

BACKEND_NAME = "numpy"


def neighbor_sum(h, src, dst, n_nodes):
    """Sum rows of h over directed edges: out[dst[e]] += h[src[e]].

    h: (N, F) float64, src/dst: (E,) int64. Returns (n_nodes, F).
    """
    out = np.zeros((n_nodes, h.shape[1]), dtype=h.dtype)
    np.add.at(out, dst, h[src])
    return out


def segment_sum(h, seg, n_seg):
    """Sum rows of h into n_seg segments: out[seg[i]] += h[i]."""
    out = np.zeros((n_seg, h.shape[1]), dtype=h.dtype)
    np.add.at(out, seg, h)
    return out


def conv1d_forward(x, w, stride):
    """Valid-mode strided 1D convolution (cross-correlation), single input channel.

    x: (B, L), w: (C, K). Returns (B, T, C) with T = (L - K) // stride + 1.
    """
    B, L = x.shape
    C, K = w.shape
    T = (L - K) // stride + 1
    sb, sl = x.strides
    windows = as_strided(x, shape=(B, T, K), strides=(sb, sl * stride, sl))
    return windows @ w.T


def conv1d_backward_x(gy, w, L, stride):
    """Gradient of conv1d_forward w.r.t. x. gy: (B, T, C) -> (B, L)."""
    B, T, C = gy.shape
    K = w.shape[1]
    gx = np.zeros((B, L), dtype=gy.dtype)
    contrib = gy @ w  # (B, T, K)
    for k in range(K):
        gx[:, k : k + T * stride : stride] += contrib[:, :, k]
    return gx


def conv1d_backward_w(gy, x, K, stride):
    """Gradient of conv1d_forward w.r.t. w. Returns (C, K)."""
    B, T, C = gy.shape
    sb, sl = x.strides
    windows = as_strided(x, shape=(B, T, K), strides=(sb, sl * stride, sl))
    return np.einsum("btc,btk->ck", gy, windows)


def contact_pairs(coords, threshold):
    """Indices (i, j) with i < j and ||coords[i] - coords[j]|| <= threshold.

    coords: (N, 3). Returns two int64 arrays. Blocked to bound memory.
    """
    n = coords.shape[0]
    thr2 = threshold * threshold
    ii_parts, jj_parts = [], []
    block = 512
    for start in range(0, n, block):
        stop = min(start + block, n)
        diff = coords[start:stop, None, :] - coords[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        bi, bj = np.nonzero(d2 <= thr2)
        keep = start + bi < bj
        ii_parts.append((start + bi[keep]).astype(np.int64))
        jj_parts.append(bj[keep].astype(np.int64))
    if not ii_parts:
        z = np.zeros(0, dtype=np.int64)
        return z, z.copy()
    return np.concatenate(ii_parts), np.concatenate(jj_parts)


def ci_pair_stats(y, p):
    """Concordance sums over all ordered pairs with y_i > y_j.

    Returns (s, z): s = sum of h(p_i - p_j) with h = 1/0.5/0 for >0/=0/<0,
    z = number of such pairs. Blocked O(n^2).
    """
    n = y.shape[0]
    s = 0.0
    z = 0
    block = 512
    for start in range(0, n, block):
        stop = min(start + block, n)
        dy = y[start:stop, None] - y[None, :]
        mask = dy > 0
        dp = p[start:stop, None] - p[None, :]
        s += float(np.sum(mask & (dp > 0)) + 0.5 * np.sum(mask & (dp == 0)))
        z += int(np.sum(mask))
    return s, z
