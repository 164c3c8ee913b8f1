"""
Differentiable primitives composed by the G-convolution layers and the models.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from ..errors import ConfigurationError, ShapeError
from .im2col import col2im, im2col
from .tensor import Function, Tensor


class Conv2d(Function):
    """Cross-correlation with zero padding, lowered to one matrix multiply."""

    def forward(
        self,
        x: np.ndarray,
        weight: np.ndarray,
        bias: Optional[np.ndarray] = None,
        *,
        stride: int = 1,
        padding: int = 0,
    ) -> np.ndarray:
        if x.ndim != 4 or weight.ndim != 4:
            raise ShapeError("conv2d", x.shape, weight.shape, "expected 4-d input and weight")
        if x.shape[1] != weight.shape[1]:
            raise ShapeError("conv2d", x.shape, weight.shape, "input channels differ")
        c_out, _, kh, kw = weight.shape
        if kh % 2 == 0 or kw % 2 == 0:
            raise ConfigurationError(f"conv2d kernel must be odd, got {kh}x{kw}")
        if stride < 1 or padding < 0:
            raise ConfigurationError(f"conv2d stride={stride} padding={padding} out of range")
        if bias is not None and bias.shape != (c_out,):
            raise ShapeError("conv2d bias", bias.shape, (c_out,))

        self.x = x
        self.weight = weight
        self.has_bias = bias is not None
        self.stride, self.padding = stride, padding

        cols = im2col(x, kh, kw, stride, padding)
        n = x.shape[0]
        out_h = (x.shape[2] + 2 * padding - kh) // stride + 1
        out_w = (x.shape[3] + 2 * padding - kw) // stride + 1
        out = cols @ weight.reshape(c_out, -1).T
        if bias is not None:
            out += bias
        return np.ascontiguousarray(out.reshape(n, out_h, out_w, c_out).transpose(0, 3, 1, 2))

    def backward(self, grad: np.ndarray) -> Tuple[Optional[np.ndarray], ...]:
        c_out, _, kh, kw = self.weight.shape
        grad_mat = grad.transpose(0, 2, 3, 1).reshape(-1, c_out)
        # columns are recomputed rather than kept alive between forward and backward
        cols = im2col(self.x, kh, kw, self.stride, self.padding)
        grad_weight = (grad_mat.T @ cols).reshape(self.weight.shape)
        grad_cols = grad_mat @ self.weight.reshape(c_out, -1)
        grad_x = col2im(grad_cols, self.x.shape, kh, kw, self.stride, self.padding)
        if self.has_bias:
            return grad_x, grad_weight, grad_mat.sum(axis=0)
        return grad_x, grad_weight


def conv2d(
    x: Tensor, weight: Tensor, bias: Optional[Tensor] = None, stride: int = 1, padding: int = 0
) -> Tensor:
    if bias is None:
        return Conv2d.apply(x, weight, stride=stride, padding=padding)
    return Conv2d.apply(x, weight, bias, stride=stride, padding=padding)


class LeakyReLU(Function):
    def forward(self, x: np.ndarray, slope: float) -> np.ndarray:
        if not 0.0 <= slope < 1.0:
            raise ConfigurationError(f"leaky_relu slope must lie in [0, 1), got {slope}")
        # x == 0 takes the positive branch
        self.mask = np.where(x >= 0, 1.0, slope).astype(x.dtype)
        return x * self.mask

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * self.mask,)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    return LeakyReLU.apply(x, slope=slope)


def relu(x: Tensor) -> Tensor:
    return LeakyReLU.apply(x, slope=0.0)


class Sigmoid(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        e = np.exp(-np.abs(x))
        self.out = np.where(x >= 0, 1.0 / (1.0 + e), e / (1.0 + e)).astype(x.dtype)
        return self.out

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (grad * self.out * (1.0 - self.out),)


def sigmoid(x: Tensor) -> Tensor:
    return Sigmoid.apply(x)


def add(a: Tensor, b: Tensor) -> Tensor:
    return a + b


def sub(a: Tensor, b: Tensor) -> Tensor:
    return a - b


class MulChannelwise(Function):
    """x[N, C, H, W] scaled by s[N, C, 1, 1] (or s[C])."""

    def forward(self, x: np.ndarray, scale: np.ndarray) -> np.ndarray:
        if x.ndim != 4:
            raise ShapeError("mul_channelwise", x.shape, scale.shape, "expected 4-d input")
        n, c = x.shape[:2]
        if scale.shape == (c,):
            view = scale.reshape(1, c, 1, 1)
        elif scale.shape == (n, c, 1, 1):
            view = scale
        else:
            raise ShapeError(
                "mul_channelwise", x.shape, scale.shape, "scale must be (N,C,1,1) or (C,)"
            )
        self.x, self.view, self.scale_shape = x, view, scale.shape
        return x * view

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        grad_scale = (grad * self.x).sum(axis=(2, 3), keepdims=True)
        if self.scale_shape != grad_scale.shape:
            grad_scale = grad_scale.sum(axis=0).reshape(self.scale_shape)
        return grad * self.view, grad_scale


def mul_channelwise(x: Tensor, scale: Tensor) -> Tensor:
    return MulChannelwise.apply(x, scale)


class Concat(Function):
    def forward(self, *xs: np.ndarray, axis: int) -> np.ndarray:
        first = xs[0]
        axis = axis % first.ndim

        def others(shape: Tuple[int, ...]) -> Tuple[int, ...]:
            return shape[:axis] + shape[axis + 1 :]

        for other in xs[1:]:
            if other.ndim != first.ndim or others(other.shape) != others(first.shape):
                raise ShapeError("concat", first.shape, other.shape, f"only axis {axis} may differ")
        self.axis = axis
        self.splits = np.cumsum([x.shape[axis] for x in xs])[:-1]
        return np.concatenate(xs, axis=axis)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, ...]:
        return tuple(np.ascontiguousarray(g) for g in np.split(grad, self.splits, axis=self.axis))


def concat(xs: Sequence[Tensor], axis: int = 1) -> Tensor:
    if len(xs) == 1:
        return xs[0]
    return Concat.apply(*xs, axis=axis)


def concat_channels(xs: Sequence[Tensor]) -> Tensor:
    """Concatenate along axis 1; N and the trailing spatial axes must agree."""
    return concat(xs, axis=1)


class Stack(Function):
    def forward(self, *xs: np.ndarray, axis: int) -> np.ndarray:
        for other in xs[1:]:
            if other.shape != xs[0].shape:
                raise ShapeError("stack", xs[0].shape, other.shape)
        self.axis = axis
        return np.stack(xs, axis=axis)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, ...]:
        return tuple(np.ascontiguousarray(g) for g in np.moveaxis(grad, self.axis, 0))


def stack(xs: Sequence[Tensor], axis: int = 0) -> Tensor:
    return Stack.apply(*xs, axis=axis)


class BroadcastTo(Function):
    def forward(self, x: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        self.in_shape = x.shape
        try:
            return np.ascontiguousarray(np.broadcast_to(x, shape))
        except ValueError as e:
            raise ShapeError("broadcast_to", x.shape, shape) from e

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        extra = grad.ndim - len(self.in_shape)
        g = grad.sum(axis=tuple(range(extra))) if extra else grad
        axes = tuple(d for d, size in enumerate(self.in_shape) if size == 1 and g.shape[d] != 1)
        if axes:
            g = g.sum(axis=axes, keepdims=True)
        return (g,)


def broadcast_to(x: Tensor, shape: Tuple[int, ...]) -> Tensor:
    return BroadcastTo.apply(x, shape=tuple(shape))


class GlobalAvgPool(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.ndim != 4:
            raise ShapeError("global_avg_pool", x.shape, (0, 0, 0, 0), "expected (N, C, H, W)")
        self.in_shape = x.shape
        return x.mean(axis=(2, 3), keepdims=True)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        h, w = self.in_shape[2:]
        return (np.broadcast_to(grad / (h * w), self.in_shape).astype(grad.dtype),)


def global_avg_pool(x: Tensor) -> Tensor:
    return GlobalAvgPool.apply(x)


class MSELoss(Function):
    def forward(self, pred: np.ndarray, target: np.ndarray) -> np.ndarray:
        if pred.shape != target.shape:
            raise ShapeError("mse_loss", pred.shape, target.shape)
        self.diff = pred - target
        return np.asarray(np.mean(self.diff * self.diff), dtype=pred.dtype)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        g = (2.0 / self.diff.size) * grad * self.diff
        g = g.astype(self.diff.dtype)
        return g, -g


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    return MSELoss.apply(pred, target)


class Rot90(Function):
    """Counter-clockwise rotation of the last two axes by 90 degrees * times."""

    def forward(self, x: np.ndarray, times: int) -> np.ndarray:
        self.times = times % 4
        return np.ascontiguousarray(np.rot90(x, self.times, axes=(-2, -1)))

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.ascontiguousarray(np.rot90(grad, -self.times, axes=(-2, -1))),)


def rot90(x: Tensor, times: int = 1) -> Tensor:
    return Rot90.apply(x, times=times)


class Roll(Function):
    def forward(self, x: np.ndarray, shift: int, axis: int) -> np.ndarray:
        self.shift, self.axis = shift, axis
        return np.roll(x, shift, axis=axis)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        return (np.roll(grad, -self.shift, axis=self.axis),)


def roll(x: Tensor, shift: int, axis: int) -> Tensor:
    return Roll.apply(x, shift=shift, axis=axis)


class MaxOverAxis(Function):
    """Max along one axis; the gradient goes to the first maximal index."""

    def forward(self, x: np.ndarray, axis: int) -> np.ndarray:
        self.axis = axis
        self.in_shape = x.shape
        self.index = np.expand_dims(np.argmax(x, axis=axis), axis)
        return np.take_along_axis(x, self.index, axis=axis).squeeze(axis)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        out = np.zeros(self.in_shape, dtype=grad.dtype)
        np.put_along_axis(out, self.index, np.expand_dims(grad, self.axis), axis=self.axis)
        return (out,)


def max_over(x: Tensor, axis: int) -> Tensor:
    return MaxOverAxis.apply(x, axis=axis)


class MeanOverAxis(Function):
    def forward(self, x: np.ndarray, axis: int) -> np.ndarray:
        self.axis = axis
        self.in_shape = x.shape
        return x.mean(axis=axis)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray]:
        extent = self.in_shape[self.axis]
        g = np.expand_dims(grad / extent, self.axis)
        return (np.broadcast_to(g, self.in_shape).astype(grad.dtype),)


def mean_over(x: Tensor, axis: int) -> Tensor:
    return MeanOverAxis.apply(x, axis=axis)
