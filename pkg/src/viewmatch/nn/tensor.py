"""Float32 parameter buffers with paired gradients."""

import numpy as np

from viewmatch.errors import NumericError, ShapeError


def ensure_finite(arr, what):
    """Raise NumericError if arr contains NaN or Inf.

    Uses min/max so no boolean temporary is allocated; NaN propagates
    through both reductions.
    """
    if arr.size == 0:
        return arr
    lo = arr.min()
    hi = arr.max()
    if not (np.isfinite(lo) and np.isfinite(hi)):
        raise NumericError(f"non-finite values in {what}")
    return arr


def as_f32(arr, what="input"):
    out = np.ascontiguousarray(arr, dtype=np.float32)
    ensure_finite(out, what)
    return out


class Tensor:
    """A float32 array plus a same-shape gradient buffer (zero-initialized)."""

    __slots__ = ("data", "grad")

    def __init__(self, data):
        self.data = as_f32(data, "tensor data")
        self.grad = np.zeros_like(self.data)

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def zero_grad(self):
        self.grad.fill(0.0)

    def add_grad(self, delta):
        if delta.shape != self.grad.shape:
            raise ShapeError(
                f"gradient shape {delta.shape} does not match parameter {self.grad.shape}"
            )
        self.grad += delta

    def __repr__(self):
        return f"Tensor(shape={self.data.shape})"
