"""
Synthetic tilted rain streaks on procedural or user backgrounds.

Streak angles are degrees from vertical, positive clockwise as seen on screen. Each
streak is an anti-aliased line segment whose pixel coverage is
clip(width / 2 + 0.5 - distance(pixel centre, segment), 0, 1).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from scipy import ndimage

from ..errors import ConfigurationError, DataError

logger = logging.getLogger(__name__)


class StreakSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    count: Tuple[int, int] = Field((20, 60), description="streak count range, inclusive")
    angles: Optional[List[float]] = Field(
        None, description="fixed angle set; overrides angle_range"
    )
    angle_range: Tuple[float, float] = Field(
        (-30.0, 30.0), description="uniform angle range, degrees"
    )
    length: Tuple[float, float] = Field((8.0, 24.0), description="streak length range, pixels")
    width: Tuple[float, float] = Field((1.0, 2.0), description="streak width range, pixels")
    intensity: Tuple[float, float] = Field((0.3, 0.8), description="streak intensity range")
    motion_blur: int = Field(0, ge=0, description="length of the directional blur kernel, 0 = off")

    @model_validator(mode="after")
    def _check(self) -> "StreakSpec":
        for name in ("count", "angle_range", "length", "width", "intensity"):
            low, high = getattr(self, name)
            if low > high:
                raise ValueError(f"{name} range reversed: {(low, high)}")
        if self.count[0] < 0:
            raise ValueError("count must be non-negative")
        if self.length[0] < 0 or self.width[0] <= 0:
            raise ValueError("length must be non-negative and width positive")
        if not 0.0 <= self.intensity[0] <= self.intensity[1] <= 1.0:
            raise ValueError(f"intensity must lie in [0, 1], got {self.intensity}")
        angles = self.angles if self.angles is not None else list(self.angle_range)
        if any(abs(a) > 90.0 for a in angles):
            raise ValueError("angles must lie in [-90, 90] degrees from vertical")
        return self


def make_streak_spec(**values) -> StreakSpec:
    try:
        return StreakSpec(**values)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


@dataclass
class StreakMeta:
    seed: int
    count: int
    angles: List[float] = field(default_factory=list)
    lengths: List[float] = field(default_factory=list)
    widths: List[float] = field(default_factory=list)
    intensities: List[float] = field(default_factory=list)
    centers: List[Tuple[float, float]] = field(default_factory=list)


@dataclass
class RainPair:
    """O = clamp(B + R) with R >= 0; all three are [3, H, W] in [0, 1]."""

    rainy: np.ndarray
    clean: np.ndarray
    rain: np.ndarray
    meta: StreakMeta

    @property
    def residual(self) -> np.ndarray:
        """O - B, the rain layer actually present after saturation."""
        return self.rainy - self.clean


def streak_direction(angle: float) -> Tuple[float, float]:
    """Unit (row, col) vector along a streak, pointing to its lower end."""
    theta = math.radians(angle)
    return math.cos(theta), -math.sin(theta)


def rasterize_streak(
    height: int,
    width: int,
    center: Tuple[float, float],
    angle: float,
    length: float,
    thickness: float,
    intensity: float,
) -> np.ndarray:
    """Coverage-weighted intensity of one streak on an [H, W] plane."""
    dr, dc = streak_direction(angle)
    half = length / 2.0
    reach = half + thickness / 2.0 + 1.0
    r0 = max(int(math.floor(center[0] - reach)), 0)
    r1 = min(int(math.ceil(center[0] + reach)) + 1, height)
    c0 = max(int(math.floor(center[1] - reach)), 0)
    c1 = min(int(math.ceil(center[1] + reach)) + 1, width)
    plane = np.zeros((height, width), dtype=np.float64)
    if r0 >= r1 or c0 >= c1:
        return plane

    rows, cols = np.mgrid[r0:r1, c0:c1].astype(np.float64)
    rel_r, rel_c = rows - center[0], cols - center[1]
    along = np.clip(rel_r * dr + rel_c * dc, -half, half)
    distance = np.hypot(rel_r - along * dr, rel_c - along * dc)
    coverage = np.clip(thickness / 2.0 + 0.5 - distance, 0.0, 1.0)
    plane[r0:r1, c0:c1] = intensity * coverage
    return plane


def sample_angles(spec: StreakSpec, count: int, rng: np.random.Generator) -> np.ndarray:
    if spec.angles is not None:
        return rng.choice(np.asarray(spec.angles, dtype=np.float64), size=count)
    return rng.uniform(spec.angle_range[0], spec.angle_range[1], size=count)


def _blur_kernel(length: int, angle: float) -> np.ndarray:
    kernel = np.zeros((length, length), dtype=np.float64)
    centre = (length - 1) / 2.0
    dr, dc = streak_direction(angle)
    for t in np.linspace(-centre, centre, 4 * length):
        kernel[int(round(centre + t * dr)), int(round(centre + t * dc))] = 1.0
    return kernel / kernel.sum()


def blur_along(plane: np.ndarray, length: int, angle: float) -> np.ndarray:
    """Smear one streak plane along its own direction; lengths below 2 are a no-op."""
    if length < 2:
        return plane
    return ndimage.convolve(plane, _blur_kernel(length, angle), mode="constant", cval=0.0)


def synth_rain(clean: np.ndarray, spec: StreakSpec, seed: int) -> RainPair:
    """Render streaks for ``clean`` [3, H, W]; deterministic in ``seed``."""
    if clean.ndim != 3 or clean.shape[0] != 3:
        raise DataError(f"background must be [3, H, W], got {clean.shape}")
    if clean.min() < 0.0 or clean.max() > 1.0:
        raise ConfigurationError("background values must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    _, h, w = clean.shape

    count = int(rng.integers(spec.count[0], spec.count[1] + 1))
    angles = sample_angles(spec, count, rng)
    lengths = rng.uniform(*spec.length, size=count)
    widths = rng.uniform(*spec.width, size=count)
    intensities = rng.uniform(*spec.intensity, size=count)
    centers = np.stack([rng.uniform(0, h, size=count), rng.uniform(0, w, size=count)], axis=1)

    plane = np.zeros((h, w), dtype=np.float64)
    for i in range(count):
        streak = rasterize_streak(
            h, w, tuple(centers[i]), angles[i], lengths[i], widths[i], intensities[i]
        )
        plane += blur_along(streak, spec.motion_blur, float(angles[i]))

    rain = np.repeat(np.clip(plane, 0.0, 1.0)[None], 3, axis=0).astype(np.float32)
    clean = clean.astype(np.float32)
    rainy = np.clip(clean + rain, 0.0, 1.0)
    meta = StreakMeta(
        seed=seed,
        count=count,
        angles=angles.tolist(),
        lengths=lengths.tolist(),
        widths=widths.tolist(),
        intensities=intensities.tolist(),
        centers=[(float(r), float(c)) for r, c in centers],
    )
    return RainPair(rainy=rainy, clean=clean, rain=rain, meta=meta)


def procedural_background(size: int, rng: np.random.Generator) -> np.ndarray:
    """Smooth colour gradient plus a few soft blobs, [3, size, size] in [0, 1]."""
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64) / max(size - 1, 1)
    start, end = rng.uniform(0.1, 0.7, size=3), rng.uniform(0.1, 0.7, size=3)
    direction = rng.uniform(0.0, 2.0 * math.pi)
    ramp = (rows * math.sin(direction) + cols * math.cos(direction) + 1.0) / 2.0
    image = start[:, None, None] + (end - start)[:, None, None] * ramp[None]
    for _ in range(int(rng.integers(2, 6))):
        cy, cx = rng.uniform(0, 1, size=2)
        radius = rng.uniform(0.05, 0.25)
        colour = rng.uniform(-0.3, 0.3, size=3)
        blob = np.exp(-((rows - cy) ** 2 + (cols - cx) ** 2) / (2 * radius**2))
        image += colour[:, None, None] * blob[None]
    return np.clip(image, 0.0, 1.0).astype(np.float32)
