"""Pure-numpy fallbacks for the hot kernels.

Data-movement kernels (pooling, resize, box filter) reproduce the numba
backend bit for bit: they apply the same float32 operations in the same
order. The convolution pair instead lowers to im2col + BLAS matmul, whose
accumulation order differs from the numba loops, so conv results agree with
the numba backend only to float32 round-off (see tests/test_kernels.py).
"""

import numpy as np


def _im2col(xpad):
    # (B, CI, Hp, Wp) -> (CI*9, B*H*W) patch matrix for a 3x3 window
    B, CI, Hp, Wp = xpad.shape
    H, W = Hp - 2, Wp - 2
    sb, sc, sh, sw = xpad.strides
    view = np.lib.stride_tricks.as_strided(
        xpad,
        shape=(CI, 3, 3, B, H, W),
        strides=(sc, sh, sw, sb, sh, sw),
        writeable=False,
    )
    return np.ascontiguousarray(view.reshape(CI * 9, B * H * W))


def conv3x3_forward(xpad, weights, bias):
    B, CI, Hp, Wp = xpad.shape
    CO = weights.shape[0]
    H, W = Hp - 2, Wp - 2
    cols = _im2col(xpad)
    out = weights.reshape(CO, CI * 9) @ cols
    out += bias[:, None]
    return np.ascontiguousarray(
        out.reshape(CO, B, H, W).transpose(1, 0, 2, 3)
    )


def conv3x3_backward(xpad, weights, dout):
    B, CI, Hp, Wp = xpad.shape
    CO = weights.shape[0]
    H, W = Hp - 2, Wp - 2
    cols = _im2col(xpad)
    dflat = np.ascontiguousarray(dout.transpose(1, 0, 2, 3)).reshape(CO, B * H * W)
    dweights = (dflat @ cols.T).reshape(CO, CI, 3, 3)
    dbias = dflat.sum(axis=1)
    dcols = weights.reshape(CO, CI * 9).T @ dflat
    # scatter-add the patch gradients back onto the padded image
    dcols = dcols.reshape(CI, 3, 3, B, H, W)
    dxpad = np.zeros((B, CI, Hp, Wp), dtype=np.float32)
    for kh in range(3):
        for kw in range(3):
            dxpad[:, :, kh:kh + H, kw:kw + W] += dcols[:, kh, kw].transpose(1, 0, 2, 3)
    return dxpad, dweights, dbias


def maxpool2_forward(x):
    B, C, H, W = x.shape
    H2, W2 = H // 2, W // 2
    windows = x.reshape(B, C, H2, 2, W2, 2).transpose(0, 1, 2, 4, 3, 5)
    windows = windows.reshape(B, C, H2, W2, 4)
    switches = windows.argmax(axis=-1).astype(np.uint8)
    out = np.take_along_axis(windows, switches[..., None].astype(np.intp), axis=-1)
    return np.ascontiguousarray(out[..., 0]), switches


def maxpool2_backward(dout, switches):
    B, C, H2, W2 = dout.shape
    dx4 = np.zeros((B, C, H2, W2, 4), dtype=np.float32)
    np.put_along_axis(dx4, switches[..., None].astype(np.intp), dout[..., None], axis=-1)
    dx = dx4.reshape(B, C, H2, W2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
    return np.ascontiguousarray(dx.reshape(B, C, 2 * H2, 2 * W2))


def bilinear_gather(imgs, iy0, wy, ix0, wx):
    a = imgs[:, iy0[:, None], ix0[None, :]]
    c = imgs[:, iy0[:, None], ix0[None, :] + 1]
    d = imgs[:, iy0[:, None] + 1, ix0[None, :]]
    e = imgs[:, iy0[:, None] + 1, ix0[None, :] + 1]
    one = np.float32(1.0)
    tx = wx[None, None, :]
    ty = wy[None, :, None]
    top = a * (one - tx) + c * tx
    bot = d * (one - tx) + e * tx
    return top * (one - ty) + bot * ty


def box3_mean(padded):
    B, Hp, Wp = padded.shape
    H, W = Hp - 2, Wp - 2
    acc = np.zeros((B, H, W), dtype=np.float32)
    for dy in range(3):
        for dx in range(3):
            acc += padded[:, dy:dy + H, dx:dx + W]
    return acc * (np.float32(1.0) / np.float32(9.0))
