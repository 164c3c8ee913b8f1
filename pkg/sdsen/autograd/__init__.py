"""
Numpy tensor with reverse-mode automatic differentiation.
"""

from .functional import (
    add,
    broadcast_to,
    concat,
    concat_channels,
    conv2d,
    global_avg_pool,
    leaky_relu,
    max_over,
    mean_over,
    mse_loss,
    mul_channelwise,
    relu,
    roll,
    rot90,
    sigmoid,
    stack,
    sub,
)
from .gradcheck import GradcheckResult, gradcheck
from .tensor import Function, Tensor, get_default_dtype, precision, set_default_dtype

__all__ = [
    "Function",
    "Tensor",
    "GradcheckResult",
    "add",
    "broadcast_to",
    "concat",
    "concat_channels",
    "conv2d",
    "get_default_dtype",
    "global_avg_pool",
    "gradcheck",
    "leaky_relu",
    "max_over",
    "mean_over",
    "mse_loss",
    "mul_channelwise",
    "precision",
    "relu",
    "roll",
    "rot90",
    "set_default_dtype",
    "sigmoid",
    "stack",
    "sub",
]
