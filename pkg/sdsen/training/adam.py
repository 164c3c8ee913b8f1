"""
Adam with bias correction, operating in place on parameter tensors.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from ..autograd import Tensor
from ..errors import GradientError


@dataclass
class AdamState:
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    t: int = 0


def adam_step(
    params: Mapping[str, Tensor],
    state: AdamState,
    lr: float,
    betas: Tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
    grads: Optional[Mapping[str, np.ndarray]] = None,
) -> AdamState:
    """
    One Adam update. Gradients come from ``grads`` when given, else from each
    parameter's ``.grad``; a missing gradient is an error naming the parameter.
    """
    beta1, beta2 = betas
    resolved = {}
    for name, p in params.items():
        g = grads.get(name) if grads is not None else p.grad
        if g is None:
            raise GradientError(f"parameter {name} has no gradient")
        if g.shape != p.shape:
            raise GradientError(f"parameter {name}: gradient shape {g.shape} != {p.shape}")
        resolved[name] = g

    state.t += 1
    correction1 = 1.0 - beta1**state.t
    correction2 = 1.0 - beta2**state.t
    for name, p in params.items():
        g = resolved[name]
        m = state.m.get(name)
        if m is None:
            m = state.m[name] = np.zeros_like(p.data)
            state.v[name] = np.zeros_like(p.data)
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        m_hat = m / correction1
        v_hat = v / correction2
        p.data -= (lr * m_hat / (np.sqrt(v_hat) + eps)).astype(p.data.dtype)
    return state


def clip_grad_norm(params: Mapping[str, Tensor], max_norm: float) -> float:
    """Scale all gradients so their global L2 norm is at most max_norm; returns the norm."""
    squares = [
        float(np.sum(p.grad.astype(np.float64) ** 2)) for p in params.values() if p.grad is not None
    ]
    total = math.sqrt(sum(squares))
    if total > max_norm:
        scale = max_norm / (total + 1e-12)
        for p in params.values():
            if p.grad is not None:
                p.grad *= scale
    return total
