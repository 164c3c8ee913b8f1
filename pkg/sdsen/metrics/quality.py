"""
Full-reference image quality: PSNR and SSIM on [3, H, W] arrays in [0, 1].

SSIM uses an 11x11 Gaussian window (sigma 1.5), K1 = 0.01, K2 = 0.03 and dynamic
range 1.0. The window is applied without padding, so only fully covered positions
count. The score is the mean over positions of each RGB channel, then over channels.
"""

import math

import numpy as np
from scipy import signal

from ..errors import ShapeError

WINDOW = 11
SIGMA = 1.5
K1 = 0.01
K2 = 0.03


def _as_pair(x, y, op: str):
    x = np.asarray(getattr(x, "data", x), dtype=np.float64)
    y = np.asarray(getattr(y, "data", y), dtype=np.float64)
    if x.shape != y.shape:
        raise ShapeError(op, x.shape, y.shape)
    return x, y


def psnr(x, y, max_val: float = 1.0) -> float:
    """10 * log10(max_val^2 / mse); identical images give +inf."""
    x, y = _as_pair(x, y, "psnr")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_val**2 / mse)


def gaussian_window(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    offsets = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(offsets**2) / (2.0 * sigma**2))
    g /= g.sum()
    return np.outer(g, g)


def ssim_map(x: np.ndarray, y: np.ndarray, data_range: float = 1.0) -> np.ndarray:
    """SSIM map of two [H, W] planes over the valid region."""
    window = gaussian_window()
    c1, c2 = (K1 * data_range) ** 2, (K2 * data_range) ** 2

    def blur(plane: np.ndarray) -> np.ndarray:
        return signal.correlate2d(plane, window, mode="valid")

    mu_x, mu_y = blur(x), blur(y)
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_x * mu_y
    numerator = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    denominator = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return numerator / denominator


def ssim(x, y, data_range: float = 1.0) -> float:
    x, y = _as_pair(x, y, "ssim")
    if x.ndim == 2:
        x, y = x[None], y[None]
    if x.ndim != 3 or min(x.shape[-2:]) < WINDOW:
        raise ShapeError("ssim", x.shape, (WINDOW, WINDOW), "image smaller than the window")
    return float(np.mean([ssim_map(x[c], y[c], data_range).mean() for c in range(x.shape[0])]))


def format_score(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.6f}"
