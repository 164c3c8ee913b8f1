"""
Parameterised layers. Each layer owns its weight/bias tensors and exposes them by
local name; the model graph prefixes them with the layer's registered name.
"""

import math
from typing import Dict

import numpy as np

from ..autograd import Tensor, conv2d, global_avg_pool, mul_channelwise, relu, sigmoid
from ..gconv import P4Filter, p4conv_p4, p4conv_z2


def he_uniform(shape, fan_in: int, rng: np.random.Generator) -> Tensor:
    bound = math.sqrt(6.0 / fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)


def zeros_param(*shape: int) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad=True)


class Layer:
    def parameters(self) -> Dict[str, Tensor]:
        return {"weight": self.weight, "bias": self.bias}

    def __call__(self, x: Tensor) -> Tensor:
        raise NotImplementedError


class Conv2dLayer(Layer):
    """Size-preserving planar convolution."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int, rng: np.random.Generator):
        self.kernel = kernel
        self.weight = he_uniform(
            (out_channels, in_channels, kernel, kernel), in_channels * kernel * kernel, rng
        )
        self.bias = zeros_param(out_channels)

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias, stride=1, padding=(self.kernel - 1) // 2)


class P4ConvZ2Layer(Layer):
    def __init__(self, in_channels: int, out_channels: int, kernel: int, rng: np.random.Generator):
        self.weight = he_uniform(
            (out_channels, in_channels, 1, kernel, kernel), in_channels * kernel * kernel, rng
        )
        self.bias = zeros_param(out_channels)

    def __call__(self, x: Tensor) -> Tensor:
        return p4conv_z2(x, P4Filter(self.weight, self.bias))


class P4ConvP4Layer(Layer):
    def __init__(self, in_channels: int, out_channels: int, kernel: int, rng: np.random.Generator):
        self.weight = he_uniform(
            (out_channels, in_channels, 4, kernel, kernel), in_channels * 4 * kernel * kernel, rng
        )
        self.bias = zeros_param(out_channels)

    def __call__(self, x: Tensor) -> Tensor:
        return p4conv_p4(x, P4Filter(self.weight, self.bias))


class SqueezeExcitation(Layer):
    """Channel attention: pool, reduce, rectify, expand, sigmoid, rescale."""

    def __init__(self, channels: int, reduction: int, rng: np.random.Generator):
        hidden = channels // reduction
        self.reduce = Conv2dLayer(channels, hidden, 1, rng)
        self.expand = Conv2dLayer(hidden, channels, 1, rng)

    def parameters(self) -> Dict[str, Tensor]:
        return {
            "reduce.weight": self.reduce.weight,
            "reduce.bias": self.reduce.bias,
            "expand.weight": self.expand.weight,
            "expand.bias": self.expand.bias,
        }

    def __call__(self, x: Tensor) -> Tensor:
        attention = sigmoid(self.expand(relu(self.reduce(global_avg_pool(x)))))
        return mul_channelwise(x, attention)
