"""
Brute-force G-convolution by nested summation over channels, input group elements and
filter support. Test-scale only; never on a training path.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..errors import ConfigurationError, ShapeError


@dataclass(frozen=True)
class GroupSpec:
    """Rotation parts of the input group H and output group I (1 = translations only, 4 = p4)."""

    input_rotations: int
    output_rotations: int

    def __post_init__(self) -> None:
        if self.input_rotations not in (1, 4) or self.output_rotations not in (1, 4):
            raise ConfigurationError(f"unsupported group spec {self}")


Z2 = GroupSpec(1, 1)
P4_FROM_Z2 = GroupSpec(1, 4)
P4_FROM_P4 = GroupSpec(4, 4)


def _pull_back(u: int, v: int, r: int) -> Tuple[int, int]:
    # inverse of r counter-clockwise quarter turns, on offsets from the filter centre
    for _ in range(r % 4):
        u, v = v, -u
    return u, v


def g_conv_oracle(
    f: np.ndarray,
    psi: np.ndarray,
    group: GroupSpec,
    bias: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    out[n, k, r, x] = sum_c sum_s sum_y f[n, c, s, x + y] * (T_r psi_k)(y, s) + bias[k]

    with (T_r psi)(y, s) = psi(R^-r y, s - r) and zero padding outside the image.
    ``f`` is [N, C, H, W] for a planar input or [N, C, 4, H, W] for a p4 input; ``psi``
    is [K, C, S, k, k]. Returns [N, K, 4, H, W], or [N, K, H, W] for a planar output.
    """
    if group.input_rotations == 1 and f.ndim == 4:
        f = f[:, :, None]
    if f.ndim != 5 or f.shape[2] != group.input_rotations:
        raise ShapeError("g_conv_oracle input", f.shape, (0, 0, group.input_rotations, 0, 0))
    if psi.ndim != 5 or psi.shape[2] != group.input_rotations or psi.shape[1] != f.shape[1]:
        raise ShapeError("g_conv_oracle filter", psi.shape, f.shape)

    n_batch, c_in, s_in, h, w = f.shape
    k_out, _, _, kh, kw = psi.shape
    c0 = kh // 2
    n_rot = group.output_rotations
    out = np.zeros((n_batch, k_out, n_rot, h, w), dtype=np.float64)

    for n in range(n_batch):
        for k in range(k_out):
            for r in range(n_rot):
                for i in range(h):
                    for j in range(w):
                        acc = 0.0 if bias is None else float(bias[k])
                        for c in range(c_in):
                            for s in range(s_in):
                                s_filter = (s - r) % s_in
                                for u in range(-c0, c0 + 1):
                                    if not 0 <= i + u < h:
                                        continue
                                    for v in range(-c0, c0 + 1):
                                        if not 0 <= j + v < w:
                                            continue
                                        pu, pv = _pull_back(u, v, r)
                                        acc += float(f[n, c, s, i + u, j + v]) * float(
                                            psi[k, c, s_filter, pu + c0, pv + c0]
                                        )
                        out[n, k, r, i, j] = acc
    if n_rot == 1:
        return out[:, :, 0]
    return out
