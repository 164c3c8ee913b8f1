"""
Random crops and augmentation of paired rainy/clean images.
"""

import math
from typing import List, Sequence, Tuple

import numpy as np
from scipy import ndimage

from ..errors import DataError
from .config import Augment, TrainConfig

ImagePair = Tuple[np.ndarray, np.ndarray]


def _sample_indices(count: int, batch: int, rng: np.random.Generator) -> np.ndarray:
    # concatenated permutations: every pair appears before any repeats
    chunks: List[np.ndarray] = []
    filled = 0
    while filled < batch:
        chunks.append(rng.permutation(count))
        filled += count
    return np.concatenate(chunks)[:batch]


def _crop(pair: ImagePair, size: int, rng: np.random.Generator) -> ImagePair:
    rainy, clean = pair
    h, w = rainy.shape[1:]
    top = int(rng.integers(0, h - size + 1)) if h > size else 0
    left = int(rng.integers(0, w - size + 1)) if w > size else 0
    window = (slice(None), slice(top, top + size), slice(left, left + size))
    return rainy[window], clean[window]


def _rotate_bilinear(image: np.ndarray, angle: float) -> np.ndarray:
    return ndimage.rotate(image, angle, axes=(2, 1), reshape=False, order=1, mode="reflect")


def _center_crop(image: np.ndarray, size: int) -> np.ndarray:
    h, w = image.shape[1:]
    top, left = (h - size) // 2, (w - size) // 2
    return image[:, top : top + size, left : left + size]


def augment_pair(pair: ImagePair, config: TrainConfig, rng: np.random.Generator) -> ImagePair:
    """Crop (and augment) one pair; rainy and clean always see the same transform."""
    crop = config.crop
    if config.augment is Augment.ROT_RANGE:
        angle = float(rng.uniform(*config.rot_range))
        theta = math.radians(angle)
        h, w = pair[0].shape[1:]
        # the rotated crop stays inside real content when the image allows it; smaller
        # images fill the corners by reflection, never with zeros
        window = min(math.ceil(crop * (abs(math.cos(theta)) + abs(math.sin(theta)))), h, w)
        rainy, clean = _crop(pair, window, rng)
        return (
            _center_crop(_rotate_bilinear(rainy, angle), crop),
            _center_crop(_rotate_bilinear(clean, angle), crop),
        )
    rainy, clean = _crop(pair, crop, rng)
    if config.augment is Augment.C4:
        times = int(rng.integers(0, 4))
        rainy = np.rot90(rainy, times, axes=(1, 2))
        clean = np.rot90(clean, times, axes=(1, 2))
    return rainy, clean


def make_batch(
    dataset: Sequence[ImagePair], config: TrainConfig, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Return (rainy, clean) batches of shape [batch, 3, crop, crop]."""
    if not dataset:
        raise DataError("cannot draw a batch from an empty dataset")
    for index, (rainy, clean) in enumerate(dataset):
        if rainy.shape != clean.shape:
            raise DataError(f"sample {index}: rainy {rainy.shape} and clean {clean.shape} differ")
        if min(rainy.shape[1:]) < config.crop:
            raise DataError(
                f"sample {index}: size {rainy.shape[1:]} is smaller than crop {config.crop}"
            )

    rainy_batch, clean_batch = [], []
    for index in _sample_indices(len(dataset), config.batch, rng):
        rainy, clean = augment_pair(dataset[index], config, rng)
        rainy_batch.append(rainy)
        clean_batch.append(clean)
    return (
        np.ascontiguousarray(np.stack(rainy_batch), dtype=np.float32),
        np.ascontiguousarray(np.stack(clean_batch), dtype=np.float32),
    )
