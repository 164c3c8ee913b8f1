"""
im2col / col2im lowering for planar cross-correlation, plus the direct-summation
reference used to check it.
"""

from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigurationError


def output_extent(size: int, kernel: int, stride: int, padding: int) -> int:
    span = size + 2 * padding - kernel
    if span < 0 or span % stride != 0:
        raise ConfigurationError(
            f"extent {size} with kernel {kernel}, stride {stride}, padding {padding} "
            f"does not give an exact output size"
        )
    return span // stride + 1


def im2col(x: np.ndarray, kh: int, kw: int, stride: int = 1, pad: int = 0) -> np.ndarray:
    """Lower (N, C, H, W) to (N*Ho*Wo, C*kh*kw); column order is (c, ky, kx)."""
    n, c, h, w = x.shape
    out_h = output_extent(h, kh, stride, pad)
    out_w = output_extent(w, kw, stride, pad)

    img = np.pad(x, [(0, 0), (0, 0), (pad, pad), (pad, pad)], mode="constant")
    col = np.empty((n, out_h, out_w, c, kh, kw), dtype=x.dtype)
    for y in range(kh):
        y_max = y + stride * out_h
        for xk in range(kw):
            x_max = xk + stride * out_w
            patch = img[:, :, y:y_max:stride, xk:x_max:stride]
            col[:, :, :, :, y, xk] = patch.transpose(0, 2, 3, 1)
    return col.reshape(n * out_h * out_w, c * kh * kw)


def col2im(
    col: np.ndarray,
    input_shape: Tuple[int, int, int, int],
    kh: int,
    kw: int,
    stride: int = 1,
    pad: int = 0,
) -> np.ndarray:
    """Adjoint of im2col: scatter-add columns back onto an (N, C, H, W) array."""
    n, c, h, w = input_shape
    out_h = output_extent(h, kh, stride, pad)
    out_w = output_extent(w, kw, stride, pad)

    col = col.reshape(n, out_h, out_w, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
    img = np.zeros((n, c, h + 2 * pad, w + 2 * pad), dtype=col.dtype)
    for y in range(kh):
        y_max = y + stride * out_h
        for xk in range(kw):
            x_max = xk + stride * out_w
            img[:, :, y:y_max:stride, xk:x_max:stride] += col[:, :, y, xk, :, :]
    return img[:, :, pad : pad + h, pad : pad + w]


def conv2d_direct(
    x: np.ndarray,
    weight: np.ndarray,
    bias: Optional[np.ndarray] = None,
    stride: int = 1,
    padding: int = 0,
) -> np.ndarray:
    """Cross-correlation by explicit summation. Slow; for tests and property checks."""
    n, c_in, h, w = x.shape
    c_out, _, kh, kw = weight.shape
    out_h = output_extent(h, kh, stride, padding)
    out_w = output_extent(w, kw, stride, padding)
    out = np.zeros((n, c_out, out_h, out_w), dtype=np.float64)
    for b in range(n):
        for o in range(c_out):
            for i in range(out_h):
                for j in range(out_w):
                    acc = 0.0 if bias is None else float(bias[o])
                    for ci in range(c_in):
                        for u in range(kh):
                            row = i * stride + u - padding
                            if row < 0 or row >= h:
                                continue
                            for v in range(kw):
                                col = j * stride + v - padding
                                if 0 <= col < w:
                                    acc += float(x[b, ci, row, col]) * float(weight[o, ci, u, v])
                    out[b, o, i, j] = acc
    return out
