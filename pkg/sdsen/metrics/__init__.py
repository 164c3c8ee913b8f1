"""
Image quality metrics and manifest evaluation.
"""

from .quality import gaussian_window, psnr, ssim, ssim_map

__all__ = ["gaussian_window", "psnr", "ssim", "ssim_map"]
