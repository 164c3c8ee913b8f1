"""
P4ConvZ2 and P4ConvP4 layers and orientation pooling.

A G-feature map is a Tensor of shape [N, K, 4, H, W]. Both layers expand the rotated
copies of their filter into one planar weight and run a single conv2d; gradients flow
back through the rotation permutations onto the canonical filter.
"""

from typing import Optional

from ..autograd import Tensor, broadcast_to, conv2d, max_over, mean_over, stack
from ..errors import ConfigurationError, ShapeError
from .rotations import ORIENTATIONS, P4Filter, rotate_p4_filter, rotate_plane_90


def check_gfeature(x: Tensor) -> None:
    if x.ndim != 5 or x.shape[2] != ORIENTATIONS:
        raise ShapeError(
            "G-feature map", x.shape, (0, 0, ORIENTATIONS, 0, 0), "expected [N, K, 4, H, W]"
        )


def flatten_orientations(x: Tensor) -> Tensor:
    """[N, K, 4, H, W] -> [N, 4K, H, W]; channel k, orientation s lands on 4k + s."""
    check_gfeature(x)
    n, k, s, h, w = x.shape
    return x.reshape(n, k * s, h, w)


def unflatten_orientations(x: Tensor) -> Tensor:
    n, c, h, w = x.shape
    if c % ORIENTATIONS:
        raise ShapeError(
            "unflatten_orientations",
            x.shape,
            (n, ORIENTATIONS, h, w),
            "channels not divisible by 4",
        )
    return x.reshape(n, c // ORIENTATIONS, ORIENTATIONS, h, w)


def _same_padding(kernel: int, padding: Optional[int]) -> int:
    expected = (kernel - 1) // 2
    if padding is not None and padding != expected:
        raise ConfigurationError(
            f"p4 layers are size-preserving: padding must be {expected}, got {padding}"
        )
    return expected


def _expanded_bias(bias: Optional[Tensor]) -> Optional[Tensor]:
    if bias is None:
        return None
    k = bias.shape[0]
    return broadcast_to(bias.reshape(k, 1), (k, ORIENTATIONS)).reshape(k * ORIENTATIONS)


def expand_z2_filter(psi: P4Filter) -> Tensor:
    """[Kout, Cin, 1, k, k] -> planar [4 Kout, Cin, k, k], row 4k + r = rotation r of filter k."""
    k_out, c_in, _, kh, kw = psi.weight.shape
    planar = psi.weight.reshape(k_out, c_in, kh, kw)
    rotated = stack([rotate_plane_90(planar, r) for r in range(ORIENTATIONS)], axis=1)
    return rotated.reshape(k_out * ORIENTATIONS, c_in, kh, kw)


def expand_p4_filter(psi: P4Filter) -> Tensor:
    """[Kout, Kin, 4, k, k] -> planar [4 Kout, 4 Kin, k, k]."""
    k_out, k_in, s, kh, kw = psi.weight.shape
    rotated = stack([rotate_p4_filter(psi.weight, r) for r in range(ORIENTATIONS)], axis=1)
    return rotated.reshape(k_out * ORIENTATIONS, k_in * s, kh, kw)


def p4conv_z2(x: Tensor, psi: P4Filter, padding: Optional[int] = None) -> Tensor:
    """Lift a planar image [N, Cin, H, W] to a G-feature map [N, Kout, 4, H, W]."""
    if psi.orientations != 1:
        raise ConfigurationError("p4conv_z2 needs a planar filter (orientation extent 1)")
    pad = _same_padding(psi.kernel, padding)
    out = conv2d(x, expand_z2_filter(psi), _expanded_bias(psi.bias), stride=1, padding=pad)
    return unflatten_orientations(out)


def p4conv_p4(x: Tensor, psi: P4Filter, padding: Optional[int] = None) -> Tensor:
    """Map a G-feature map [N, Kin, 4, H, W] to [N, Kout, 4, H, W]."""
    check_gfeature(x)
    if psi.orientations != ORIENTATIONS:
        raise ConfigurationError("p4conv_p4 needs a group filter (orientation extent 4)")
    if x.shape[1] != psi.in_channels:
        raise ShapeError("p4conv_p4", x.shape, psi.weight.shape, "regular channels differ")
    pad = _same_padding(psi.kernel, padding)
    weight, bias = expand_p4_filter(psi), _expanded_bias(psi.bias)
    out = conv2d(flatten_orientations(x), weight, bias, stride=1, padding=pad)
    return unflatten_orientations(out)


def orientation_pool(x: Tensor, mode: str = "max") -> Tensor:
    """Reduce the orientation axis: [N, K, 4, H, W] -> [N, K, H, W]."""
    check_gfeature(x)
    if mode == "max":
        return max_over(x, axis=2)
    if mode == "avg":
        return mean_over(x, axis=2)
    raise ConfigurationError(f"orientation_pool mode must be 'max' or 'avg', got {mode!r}")
