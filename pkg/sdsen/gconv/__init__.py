"""
p4 group convolutions: filter rotation, P4ConvZ2, P4ConvP4, orientation pooling and a
brute-force reference.
"""

from .layers import (
    check_gfeature,
    expand_p4_filter,
    expand_z2_filter,
    flatten_orientations,
    orientation_pool,
    p4conv_p4,
    p4conv_z2,
    unflatten_orientations,
)
from .oracle import P4_FROM_P4, P4_FROM_Z2, Z2, GroupSpec, g_conv_oracle
from .rotations import (
    ORIENTATIONS,
    P4Filter,
    rotate_p4_array,
    rotate_p4_features,
    rotate_p4_filter,
    rotate_plane_90,
)

__all__ = [
    "ORIENTATIONS",
    "P4Filter",
    "GroupSpec",
    "Z2",
    "P4_FROM_Z2",
    "P4_FROM_P4",
    "check_gfeature",
    "expand_p4_filter",
    "expand_z2_filter",
    "flatten_orientations",
    "g_conv_oracle",
    "orientation_pool",
    "p4conv_p4",
    "p4conv_z2",
    "rotate_p4_array",
    "rotate_p4_features",
    "rotate_p4_filter",
    "rotate_plane_90",
    "unflatten_orientations",
]
