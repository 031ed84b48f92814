"""Numba-jitted kernels. Same signatures and semantics as ``_numpy.py``.

All kernels are single-threaded njit loops: scatter updates stay deterministic
(bitwise-identical across runs), which the trainer's determinism contract needs.
"""

import numpy as np
from numba import njit

BACKEND_NAME = "numba"


@njit(cache=True)
def neighbor_sum(h, src, dst, n_nodes):
    out = np.zeros((n_nodes, h.shape[1]), dtype=h.dtype)
    for e in range(src.shape[0]):
        s = src[e]
        d = dst[e]
        for f in range(h.shape[1]):
            out[d, f] += h[s, f]
    return out


@njit(cache=True)
def segment_sum(h, seg, n_seg):
    out = np.zeros((n_seg, h.shape[1]), dtype=h.dtype)
    for i in range(h.shape[0]):
        g = seg[i]
        for f in range(h.shape[1]):
            out[g, f] += h[i, f]
    return out


@njit(cache=True)
def conv1d_forward(x, w, stride):
    B, L = x.shape
    C, K = w.shape
    T = (L - K) // stride + 1
    out = np.zeros((B, T, C), dtype=x.dtype)
    for b in range(B):
        for t in range(T):
            base = t * stride
            for c in range(C):
                acc = 0.0
                for k in range(K):
                    acc += x[b, base + k] * w[c, k]
                out[b, t, c] = acc
    return out


@njit(cache=True)
def conv1d_backward_x(gy, w, L, stride):
    B, T, C = gy.shape
    K = w.shape[1]
    gx = np.zeros((B, L), dtype=gy.dtype)
    for b in range(B):
        for t in range(T):
            base = t * stride
            for c in range(C):
                g = gy[b, t, c]
                for k in range(K):
                    gx[b, base + k] += g * w[c, k]
    return gx


@njit(cache=True)
def conv1d_backward_w(gy, x, K, stride):
    B, T, C = gy.shape
    gw = np.zeros((C, K), dtype=gy.dtype)
    for b in range(B):
        for t in range(T):
            base = t * stride
            for c in range(C):
                g = gy[b, t, c]
                for k in range(K):
                    gw[c, k] += g * x[b, base + k]
    return gw


@njit(cache=True)
def contact_pairs(coords, threshold):
    n = coords.shape[0]
    thr2 = threshold * threshold
    count = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = coords[i, 0] - coords[j, 0]
            dy = coords[i, 1] - coords[j, 1]
            dz = coords[i, 2] - coords[j, 2]
            if dx * dx + dy * dy + dz * dz <= thr2:
                count += 1
    ii = np.empty(count, dtype=np.int64)
    jj = np.empty(count, dtype=np.int64)
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = coords[i, 0] - coords[j, 0]
            dy = coords[i, 1] - coords[j, 1]
            dz = coords[i, 2] - coords[j, 2]
            if dx * dx + dy * dy + dz * dz <= thr2:
                ii[k] = i
                jj[k] = j
                k += 1
    return ii, jj


@njit(cache=True)
def ci_pair_stats(y, p):
    n = y.shape[0]
    s = 0.0
    z = 0
    for i in range(n):
        for j in range(n):
            if y[i] > y[j]:
                z += 1
                d = p[i] - p[j]
                if d > 0.0:
                    s += 1.0
                elif d == 0.0:
                    s += 0.5
    return s, z
