"""
8-bit RGB PNG I/O. Images are float32 arrays [3, H, W] with values byte / 255.
"""

from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..errors import DataError

PathLike = Union[str, Path]


def to_bytes(image: np.ndarray) -> np.ndarray:
    """[3, H, W] floats -> [H, W, 3] uint8; clamps to [0, 1], rounds half away from zero."""
    clamped = np.clip(np.asarray(image, dtype=np.float64), 0.0, 1.0)
    return np.floor(clamped * 255.0 + 0.5).astype(np.uint8).transpose(1, 2, 0)


def from_bytes(pixels: np.ndarray) -> np.ndarray:
    return (pixels.astype(np.float32) / np.float32(255.0)).transpose(2, 0, 1).copy()


def load_image(path: PathLike) -> np.ndarray:
    path = Path(path)
    try:
        with Image.open(path) as img:
            if img.mode != "RGB":
                img = img.convert("RGB")
            pixels = np.asarray(img, dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as e:
        raise DataError(f"cannot read image {path}: {e}") from e
    return from_bytes(pixels)


def save_image(image: np.ndarray, path: PathLike) -> Path:
    path = Path(path)
    if image.ndim != 3 or image.shape[0] != 3:
        raise DataError(f"cannot save {path}: expected [3, H, W], got {image.shape}")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(to_bytes(image), mode="RGB").save(path, format="PNG")
    except OSError as e:
        raise DataError(f"cannot write image {path}: {e}") from e
    return path


def image_size(path: PathLike) -> tuple:
    """(height, width) without decoding the pixels."""
    try:
        with Image.open(path) as img:
            return img.height, img.width
    except (OSError, UnidentifiedImageError) as e:
        raise DataError(f"cannot read image {path}: {e}") from e
