"""
Synthetic rain data, PNG I/O and dataset manifests.
"""

from .images import load_image, save_image
from .manifest import (
    MANIFEST_NAME,
    DatasetManifest,
    ManifestEntry,
    assign_splits,
    gen_dataset,
    load_manifest,
    write_manifest,
)
from .rainsim import (
    RainPair,
    StreakMeta,
    StreakSpec,
    blur_along,
    make_streak_spec,
    procedural_background,
    rasterize_streak,
    sample_angles,
    streak_direction,
    synth_rain,
)

__all__ = [
    "MANIFEST_NAME",
    "DatasetManifest",
    "ManifestEntry",
    "RainPair",
    "StreakMeta",
    "StreakSpec",
    "assign_splits",
    "blur_along",
    "gen_dataset",
    "load_image",
    "load_manifest",
    "make_streak_spec",
    "procedural_background",
    "rasterize_streak",
    "sample_angles",
    "save_image",
    "streak_direction",
    "synth_rain",
    "write_manifest",
]
