"""
Exact 90-degree rotations of planes, p4 filters and p4 feature maps.

Rotation is counter-clockwise about the array centre; one step maps
out[r][c] = in[c][W-1-r]. Orientations are ordered 0, 90, 180, 270 degrees.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..autograd import Tensor, roll, rot90
from ..errors import ConfigurationError, ShapeError

ORIENTATIONS = 4


@dataclass
class P4Filter:
    """
    Filter bank on p4: weight [Kout, Kin, S, k, k] with S=1 (lifting, planar filter)
    or S=4 (group filter), and one bias per output regular channel.
    """

    weight: Tensor
    bias: Optional[Tensor] = None

    def __post_init__(self) -> None:
        if self.weight.ndim != 5:
            raise ShapeError("P4Filter", self.weight.shape, (0, 0, 0, 0, 0), "expected 5-d weight")
        _, _, s, kh, kw = self.weight.shape
        if s not in (1, ORIENTATIONS):
            raise ConfigurationError(f"P4Filter orientation extent must be 1 or 4, got {s}")
        if kh != kw or kh % 2 == 0:
            raise ConfigurationError(f"P4Filter kernel must be square and odd, got {kh}x{kw}")
        if self.bias is not None and self.bias.shape != (self.out_channels,):
            raise ShapeError("P4Filter bias", self.bias.shape, (self.out_channels,))

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def orientations(self) -> int:
        return self.weight.shape[2]

    @property
    def kernel(self) -> int:
        return self.weight.shape[3]


def rotate_plane_90(x: Tensor, times: int) -> Tensor:
    if times % ORIENTATIONS == 0:
        return x
    return rot90(x, times % ORIENTATIONS)


def rotate_p4_filter(psi: Tensor, r: int) -> Tensor:
    """
    Rotate a [Kout, Kin, 4, k, k] group filter by r steps: every orientation slice is
    rotated spatially and slice s of the result is slice (s - r) mod 4 of the input.
    """
    if psi.ndim != 5 or psi.shape[2] != ORIENTATIONS:
        raise ShapeError("rotate_p4_filter", psi.shape, (0, 0, ORIENTATIONS, 0, 0))
    r %= ORIENTATIONS
    if r == 0:
        return psi
    return roll(rot90(psi, r), r, axis=2)


def rotate_p4_features(x: Tensor, r: int) -> Tensor:
    """The p4 rotation action on a G-feature map [N, K, 4, H, W]."""
    r %= ORIENTATIONS
    if r == 0:
        return x
    return roll(rot90(x, r), r, axis=2)


def rotate_p4_array(x: np.ndarray, r: int) -> np.ndarray:
    """Numpy form of rotate_p4_features, for checks that need no graph."""
    return np.roll(np.rot90(x, r, axes=(-2, -1)), r, axis=2)
