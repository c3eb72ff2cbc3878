"""Numba-compiled hot kernels.

Each function here has a matching pure-numpy twin in ``numpy_ops`` with the
same signature; ``viewmatch.kernels`` picks one set at import time. Kernels
are compiled without fastmath so results do not depend on the host's SIMD
width, and with cache=True so the JIT cost is paid once per machine.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def conv3x3_forward(xpad, weights, bias):
    """3x3 stride-1 convolution on a zero-padded input.

    xpad: (B, C_in, H+2, W+2) float32, weights: (C_out, C_in, 3, 3),
    bias: (C_out,). Returns (B, C_out, H, W).
    """
    B, CI, Hp, Wp = xpad.shape
    CO = weights.shape[0]
    H = Hp - 2
    W = Wp - 2
    out = np.empty((B, CO, H, W), dtype=np.float32)
    for b in range(B):
        for co in range(CO):
            for h in range(H):
                for w in range(W):
                    out[b, co, h, w] = bias[co]
            for ci in range(CI):
                for kh in range(3):
                    for kw in range(3):
                        wv = weights[co, ci, kh, kw]
                        for h in range(H):
                            for w in range(W):
                                out[b, co, h, w] += wv * xpad[b, ci, h + kh, w + kw]
    return out


@njit(cache=True)
def conv3x3_backward(xpad, weights, dout):
    """Gradients of conv3x3_forward.

    Returns (dxpad, dweights, dbias); dxpad has the padded shape and the
    caller strips the border.
    """
    B, CI, Hp, Wp = xpad.shape
    CO = weights.shape[0]
    H = Hp - 2
    W = Wp - 2
    dxpad = np.zeros((B, CI, Hp, Wp), dtype=np.float32)
    dweights = np.zeros((CO, CI, 3, 3), dtype=np.float32)
    dbias = np.zeros(CO, dtype=np.float32)
    acc = np.empty(W, dtype=np.float32)
    for b in range(B):
        for co in range(CO):
            s = np.float32(0.0)
            for h in range(H):
                for w in range(W):
                    s += dout[b, co, h, w]
            dbias[co] += s
            for ci in range(CI):
                for kh in range(3):
                    for kw in range(3):
                        wv = weights[co, ci, kh, kw]
                        for w in range(W):
                            acc[w] = np.float32(0.0)
                        for h in range(H):
                            for w in range(W):
                                g = dout[b, co, h, w]
                                dxpad[b, ci, h + kh, w + kw] += wv * g
                                acc[w] += xpad[b, ci, h + kh, w + kw] * g
                        s2 = np.float32(0.0)
                        for w in range(W):
                            s2 += acc[w]
                        dweights[co, ci, kh, kw] += s2
    return dxpad, dweights, dbias


@njit(cache=True)
def maxpool2_forward(x):
    """2x2 max pooling, stride 2.

    Returns (out, switches) where switches[b,c,i,j] in {0,1,2,3} encodes the
    row-major window offset (2*dy+dx) of the first maximum.
    """
    B, C, H, W = x.shape
    H2 = H // 2
    W2 = W // 2
    out = np.empty((B, C, H2, W2), dtype=np.float32)
    switches = np.empty((B, C, H2, W2), dtype=np.uint8)
    for b in range(B):
        for c in range(C):
            for i in range(H2):
                for j in range(W2):
                    best = x[b, c, 2 * i, 2 * j]
                    arg = np.uint8(0)
                    v = x[b, c, 2 * i, 2 * j + 1]
                    if v > best:
                        best = v
                        arg = np.uint8(1)
                    v = x[b, c, 2 * i + 1, 2 * j]
                    if v > best:
                        best = v
                        arg = np.uint8(2)
                    v = x[b, c, 2 * i + 1, 2 * j + 1]
                    if v > best:
                        best = v
                        arg = np.uint8(3)
                    out[b, c, i, j] = best
                    switches[b, c, i, j] = arg
    return out, switches


@njit(cache=True)
def maxpool2_backward(dout, switches):
    """Routes each pooled gradient back to its argmax cell."""
    B, C, H2, W2 = dout.shape
    dx = np.zeros((B, C, 2 * H2, 2 * W2), dtype=np.float32)
    for b in range(B):
        for c in range(C):
            for i in range(H2):
                for j in range(W2):
                    a = switches[b, c, i, j]
                    dx[b, c, 2 * i + a // 2, 2 * j + a % 2] = dout[b, c, i, j]
    return dx


@njit(cache=True)
def bilinear_gather(imgs, iy0, wy, ix0, wx):
    """Bilinear sampling with precomputed per-axis indices and weights.

    imgs: (B, H, W) float32; iy0/ix0: int32 floor indices; wy/wx: float32
    fractional weights. Index i0+1 must stay in range (guaranteed by the
    shared coordinate helper).
    """
    B = imgs.shape[0]
    OH = iy0.shape[0]
    OW = ix0.shape[0]
    out = np.empty((B, OH, OW), dtype=np.float32)
    one = np.float32(1.0)
    for b in range(B):
        for i in range(OH):
            y0 = iy0[i]
            ty = wy[i]
            for j in range(OW):
                x0 = ix0[j]
                tx = wx[j]
                a = imgs[b, y0, x0]
                c = imgs[b, y0, x0 + 1]
                d = imgs[b, y0 + 1, x0]
                e = imgs[b, y0 + 1, x0 + 1]
                top = a * (one - tx) + c * tx
                bot = d * (one - tx) + e * tx
                out[b, i, j] = top * (one - ty) + bot * ty
    return out


@njit(cache=True)
def box3_mean(padded):
    """3x3 box filter over an edge-padded batch (B, H+2, W+2) -> (B, H, W)."""
    B, Hp, Wp = padded.shape
    H = Hp - 2
    W = Wp - 2
    out = np.empty((B, H, W), dtype=np.float32)
    ninth = np.float32(1.0) / np.float32(9.0)
    for b in range(B):
        for h in range(H):
            for w in range(W):
                s = np.float32(0.0)
                for dy in range(3):
                    for dx in range(3):
                        s += padded[b, h + dy, w + dx]
                out[b, h, w] = s * ninth
    return out
