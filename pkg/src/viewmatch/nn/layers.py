"""Network layers with hand-written backward passes.

Every layer follows the same protocol: ``forward(x, train=False)`` returns
the output and caches whatever the gradient needs, ``backward(dout)``
accumulates parameter gradients in place and returns the input gradient.
Activations are float32 throughout; batch dimensions are explicit (a 4-D
conv input is (B, C, H, W)), but single samples without the batch axis are
accepted and returned in kind.
"""

import numpy as np

from viewmatch import kernels
from viewmatch.errors import ConfigError, ShapeError
from viewmatch.nn.tensor import Tensor, as_f32, ensure_finite


class Conv3x3:
    """3x3 convolution, stride 1, zero padding 1: spatial size is preserved."""

    def __init__(self, c_in, c_out, rng=None, weight=None, bias=None):
        if weight is not None:
            self.weight = Tensor(weight)
            if self.weight.shape != (c_out, c_in, 3, 3):
                raise ShapeError(f"conv weight must be ({c_out},{c_in},3,3)")
        else:
            std = np.sqrt(2.0 / (c_in * 9))
            self.weight = Tensor(rng.standard_normal((c_out, c_in, 3, 3)) * std)
        self.bias = Tensor(np.zeros(c_out) if bias is None else bias)
        if self.bias.shape != (c_out,):
            raise ShapeError(f"conv bias must have {c_out} entries")
        self.c_in = c_in
        self.c_out = c_out
        self._ctx = None

    def forward(self, x, train=False):
        x = as_f32(x, "conv input")
        squeeze = x.ndim == 3
        if squeeze:
            x = x[None]
        if x.ndim != 4 or x.shape[1] != self.c_in:
            raise ShapeError(
                f"conv expects (B,{self.c_in},H,W), got {x.shape}"
            )
        B, C, H, W = x.shape
        if H < 3 or W < 3:
            raise ShapeError("conv input must be at least 3x3")
        xpad = np.zeros((B, C, H + 2, W + 2), dtype=np.float32)
        xpad[:, :, 1:-1, 1:-1] = x
        out = kernels.conv3x3_forward(xpad, self.weight.data, self.bias.data)
        ensure_finite(out, "conv output")
        self._ctx = (xpad, squeeze)
        return out[0] if squeeze else out

    def backward(self, dout):
        xpad, squeeze = self._ctx
        dout = as_f32(dout, "conv output gradient")
        if squeeze:
            dout = dout[None]
        if dout.shape != (xpad.shape[0], self.c_out, xpad.shape[2] - 2, xpad.shape[3] - 2):
            raise ShapeError(f"conv gradient has wrong shape {dout.shape}")
        dxpad, dw, db = kernels.conv3x3_backward(xpad, self.weight.data, dout)
        self.weight.add_grad(dw)
        self.bias.add_grad(db)
        dx = np.ascontiguousarray(dxpad[:, :, 1:-1, 1:-1])
        return dx[0] if squeeze else dx

    def parameters(self):
        return [self.weight, self.bias]

    def state_items(self, prefix):
        return [(prefix + ".weight", self.weight.data), (prefix + ".bias", self.bias.data)]


class Dense:
    """Fully connected layer: out = x @ W.T + b, weight shape (f_out, f_in)."""

    def __init__(self, f_in, f_out, rng=None, weight=None, bias=None):
        if weight is not None:
            self.weight = Tensor(weight)
            if self.weight.shape != (f_out, f_in):
                raise ShapeError(f"dense weight must be ({f_out},{f_in})")
        else:
            std = np.sqrt(2.0 / f_in)
            self.weight = Tensor(rng.standard_normal((f_out, f_in)) * std)
        self.bias = Tensor(np.zeros(f_out) if bias is None else bias)
        if self.bias.shape != (f_out,):
            raise ShapeError(f"dense bias must have {f_out} entries")
        self.f_in = f_in
        self.f_out = f_out
        self._ctx = None

    def forward(self, x, train=False):
        x = as_f32(x, "dense input")
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None]
        if x.ndim != 2 or x.shape[1] != self.f_in:
            raise ShapeError(f"dense expects (B,{self.f_in}), got {x.shape}")
        out = x @ self.weight.data.T + self.bias.data
        ensure_finite(out, "dense output")
        self._ctx = (x, squeeze)
        return out[0] if squeeze else out

    def backward(self, dout, need_dx=True):
        x, squeeze = self._ctx
        dout = as_f32(dout, "dense output gradient")
        if squeeze:
            dout = dout[None]
        if dout.shape != (x.shape[0], self.f_out):
            raise ShapeError(f"dense gradient has wrong shape {dout.shape}")
        self.weight.add_grad(dout.T @ x)
        self.bias.add_grad(dout.sum(axis=0))
        if not need_dx:
            return None
        dx = dout @ self.weight.data
        return dx[0] if squeeze else dx

    def parameters(self):
        return [self.weight, self.bias]

    def state_items(self, prefix):
        return [(prefix + ".weight", self.weight.data), (prefix + ".bias", self.bias.data)]


class ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x, train=False):
        x = as_f32(x, "relu input")
        self._mask = x > 0
        return np.where(self._mask, x, np.float32(0.0))

    def backward(self, dout):
        dout = as_f32(dout, "relu gradient")
        if dout.shape != self._mask.shape:
            raise ShapeError("relu gradient shape mismatch")
        return np.where(self._mask, dout, np.float32(0.0))

    def parameters(self):
        return []

    def state_items(self, prefix):
        return []


class Softmax:
    """Row-wise softmax with max subtraction (never overflows)."""

    def __init__(self):
        self._out = None

    def forward(self, x, train=False):
        x = as_f32(x, "softmax input")
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None]
        if x.shape[-1] < 2:
            raise ShapeError("softmax needs at least 2 classes")
        shifted = x - x.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        out = e / e.sum(axis=-1, keepdims=True)
        self._out = out
        self._squeeze = squeeze
        return out[0] if squeeze else out

    def backward(self, dout):
        dout = as_f32(dout, "softmax gradient")
        if self._squeeze:
            dout = dout[None]
        s = self._out
        inner = (dout * s).sum(axis=-1, keepdims=True)
        dx = s * (dout - inner)
        return dx[0] if self._squeeze else dx

    def parameters(self):
        return []

    def state_items(self, prefix):
        return []


class MaxPool2:
    """2x2 max pooling with stride 2; gradient goes to the first max of each
    window in row-major order."""

    def __init__(self):
        self._ctx = None

    def forward(self, x, train=False):
        x = as_f32(x, "maxpool input")
        squeeze = x.ndim == 3
        if squeeze:
            x = x[None]
        B, C, H, W = x.shape
        if H % 2 or W % 2:
            raise ShapeError(f"maxpool needs even spatial dims, got {H}x{W}")
        out, switches = kernels.maxpool2_forward(x)
        self._ctx = (switches, squeeze)
        return out[0] if squeeze else out

    def backward(self, dout):
        switches, squeeze = self._ctx
        dout = as_f32(dout, "maxpool gradient")
        if squeeze:
            dout = dout[None]
        if dout.shape != switches.shape:
            raise ShapeError("maxpool gradient shape mismatch")
        dx = kernels.maxpool2_backward(dout, switches)
        return dx[0] if squeeze else dx

    def parameters(self):
        return []

    def state_items(self, prefix):
        return []


class BatchNorm:
    """Per-channel batch normalization.

    Works on (B, C, H, W) with statistics over (B, H, W), or on (B, C)
    with statistics over B. Train mode uses batch statistics and updates
    running means/vars with momentum 0.9; eval mode uses the running values.
    """

    EPS = 1e-5
    MOMENTUM = 0.9

    def __init__(self, channels):
        self.gamma = Tensor(np.ones(channels))
        self.beta = Tensor(np.zeros(channels))
        self.running_mean = np.zeros(channels, dtype=np.float32)
        self.running_var = np.ones(channels, dtype=np.float32)
        self.channels = channels
        self._ctx = None

    def _axes_and_shape(self, x):
        if x.ndim == 4:
            if x.shape[1] != self.channels:
                raise ShapeError(f"batchnorm expects {self.channels} channels, got {x.shape}")
            return (0, 2, 3), (1, self.channels, 1, 1)
        if x.ndim == 2:
            if x.shape[1] != self.channels:
                raise ShapeError(f"batchnorm expects {self.channels} features, got {x.shape}")
            return (0,), (1, self.channels)
        raise ShapeError(f"batchnorm expects 2-D or 4-D input, got {x.ndim}-D")

    def forward(self, x, train=False):
        x = as_f32(x, "batchnorm input")
        axes, bshape = self._axes_and_shape(x)
        if train:
            if x.shape[0] < 2:
                raise ConfigError("batchnorm in train mode needs a batch of at least 2")
            mean = x.mean(axis=axes, dtype=np.float64)
            var = x.var(axis=axes, dtype=np.float64)
            self.running_mean = (
                self.MOMENTUM * self.running_mean + (1.0 - self.MOMENTUM) * mean
            ).astype(np.float32)
            self.running_var = (
                self.MOMENTUM * self.running_var + (1.0 - self.MOMENTUM) * var
            ).astype(np.float32)
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = (1.0 / np.sqrt(var + self.EPS)).astype(np.float32).reshape(bshape)
        xhat = (x - mean.astype(np.float32).reshape(bshape)) * inv_std
        out = self.gamma.data.reshape(bshape) * xhat + self.beta.data.reshape(bshape)
        self._ctx = (xhat, inv_std, axes, bshape, train)
        return out

    def backward(self, dout):
        xhat, inv_std, axes, bshape, train = self._ctx
        dout = as_f32(dout, "batchnorm gradient")
        if dout.shape != xhat.shape:
            raise ShapeError("batchnorm gradient shape mismatch")
        self.gamma.add_grad(
            (dout * xhat).sum(axis=axes, dtype=np.float64).astype(np.float32)
        )
        self.beta.add_grad(dout.sum(axis=axes, dtype=np.float64).astype(np.float32))
        dxhat = dout * self.gamma.data.reshape(bshape)
        if not train:
            return dxhat * inv_std
        m = xhat.size // self.channels
        sum_dxhat = dxhat.sum(axis=axes, dtype=np.float64).astype(np.float32).reshape(bshape)
        sum_dxhat_xhat = (
            (dxhat * xhat).sum(axis=axes, dtype=np.float64).astype(np.float32).reshape(bshape)
        )
        dx = (inv_std / np.float32(m)) * (
            np.float32(m) * dxhat - sum_dxhat - xhat * sum_dxhat_xhat
        )
        return dx

    def parameters(self):
        return [self.gamma, self.beta]

    def state_items(self, prefix):
        return [
            (prefix + ".gamma", self.gamma.data),
            (prefix + ".beta", self.beta.data),
            (prefix + ".running_mean", self.running_mean),
            (prefix + ".running_var", self.running_var),
        ]


class Dropout:
    """Inverted dropout: survivors scaled by 1/(1-p) in train, identity in eval."""

    def __init__(self, p, rng):
        if not 0.0 <= p < 1.0:
            raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
        self.p = float(p)
        self.rng = rng
        self._mult = None

    def forward(self, x, train=False):
        x = as_f32(x, "dropout input")
        if not train or self.p == 0.0:
            self._mult = None
            return x
        keep = self.rng.random(x.shape, dtype=np.float32) >= np.float32(self.p)
        self._mult = keep.astype(np.float32) * np.float32(1.0 / (1.0 - self.p))
        return x * self._mult

    def backward(self, dout):
        dout = as_f32(dout, "dropout gradient")
        if self._mult is None:
            return dout
        return dout * self._mult

    def parameters(self):
        return []

    def state_items(self, prefix):
        return []
