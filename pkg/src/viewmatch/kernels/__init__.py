"""Hot-kernel dispatch.

The numerically heavy inner loops (3x3 convolution, 2x2 max pooling,
bilinear resampling, speckle smoothing) exist twice: numba-JIT loops in
``numba_ops`` and vectorized numpy in ``numpy_ops``. Selection happens once
at import time from the ``VIEWMATCH_BACKEND`` environment variable:

    VIEWMATCH_BACKEND=numba   force the JIT kernels (error if numba missing)
    VIEWMATCH_BACKEND=numpy   force the pure-numpy fallbacks
    unset / auto              numba when importable, numpy otherwise

``benchmarks/bench_kernels.py`` times the two sets against each other.
"""

import os

__all__ = [
    "BACKEND",
    "conv3x3_forward",
    "conv3x3_backward",
    "maxpool2_forward",
    "maxpool2_backward",
    "bilinear_gather",
    "box3_mean",
    "resize_coords",
    "get_backend",
]


def _load(name):
    if name == "numba":
        from viewmatch.kernels import numba_ops as ops
    elif name == "numpy":
        from viewmatch.kernels import numpy_ops as ops
    else:
        raise ValueError(f"unknown kernel backend {name!r} (use 'numba' or 'numpy')")
    return ops


_requested = os.environ.get("VIEWMATCH_BACKEND", "auto").strip().lower()
if _requested == "auto":
    try:
        _ops = _load("numba")
        BACKEND = "numba"
    except ImportError:
        _ops = _load("numpy")
        BACKEND = "numpy"
else:
    _ops = _load(_requested)
    BACKEND = _requested

conv3x3_forward = _ops.conv3x3_forward
conv3x3_backward = _ops.conv3x3_backward
maxpool2_forward = _ops.maxpool2_forward
maxpool2_backward = _ops.maxpool2_backward
bilinear_gather = _ops.bilinear_gather
box3_mean = _ops.box3_mean


def get_backend(name):
    """Return the raw kernel module for an explicit backend name (benchmarks
    and cross-backend tests; normal code uses the module-level functions)."""
    return _load(name)


def resize_coords(in_size, out_size):
    """Align-corners source coordinates for a 1-D bilinear resize.

    Returns (floor indices int32, fractional weights float32); floor+1 is
    clamped so kernels can always read index+1.
    """
    import numpy as np

    if out_size < 1 or in_size < 2:
        raise ValueError("resize needs in_size >= 2 and out_size >= 1")
    if out_size == 1:
        pos = np.zeros(1, dtype=np.float64)
    else:
        pos = np.arange(out_size, dtype=np.float64) * ((in_size - 1) / (out_size - 1))
    i0 = np.floor(pos).astype(np.int32)
    np.minimum(i0, in_size - 2, out=i0)
    frac = (pos - i0).astype(np.float32)
    return i0, frac
