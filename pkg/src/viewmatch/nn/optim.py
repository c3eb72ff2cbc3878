"""Adam with optional L2 parameter penalty folded into the gradient."""

import numpy as np

from viewmatch.errors import ConfigError, ShapeError
from viewmatch.nn.tensor import ensure_finite


class AdamState:
    """Optimizer state for a fixed parameter list.

    Moment buffers are allocated lazily on the first step so the state can be
    constructed before parameters exist. beta1/beta2/eps use the conventional
    defaults; the step counter increases strictly by one per update.
    """

    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr < 0:
            raise ConfigError(f"learning rate must be >= 0, got {lr}")
        self.lr = float(lr)
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)
        self.step = 0
        self.m = None
        self.v = None


def adam_step(params, state, l2_weight=0.0):
    """One Adam update over params (a sequence of Tensors), in place.

    The L2 penalty enters as grad + l2_weight * param before the moment
    updates. Gradients are left untouched; callers zero them per step.
    """
    if l2_weight < 0:
        raise ConfigError(f"l2_weight must be >= 0, got {l2_weight}")
    params = list(params)
    if state.m is None:
        state.m = [np.zeros_like(p.data) for p in params]
        state.v = [np.zeros_like(p.data) for p in params]
    if len(state.m) != len(params):
        raise ShapeError("parameter list does not match optimizer state")
    state.step += 1
    b1 = np.float32(state.beta1)
    b2 = np.float32(state.beta2)
    c1 = np.float32(1.0 - state.beta1)
    c2 = np.float32(1.0 - state.beta2)
    corr1 = np.float32(1.0 - state.beta1 ** state.step)
    corr2 = np.float32(1.0 - state.beta2 ** state.step)
    lr = np.float32(state.lr)
    eps = np.float32(state.eps)
    lam = np.float32(l2_weight)
    for p, m, v in zip(params, state.m, state.v):
        if m.shape != p.data.shape:
            raise ShapeError(
                f"optimizer moment shape {m.shape} does not match parameter {p.data.shape}"
            )
        g = p.grad if l2_weight == 0.0 else p.grad + lam * p.data
        m *= b1
        m += c1 * g
        v *= b2
        v += c2 * (g * g)
        update = (m / corr1) / (np.sqrt(v / corr2) + eps)
        p.data -= lr * update
        ensure_finite(p.data, "adam-updated parameter")
