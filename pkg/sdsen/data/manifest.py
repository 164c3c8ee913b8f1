"""
Dataset manifests and on-disk dataset generation.

A manifest is plain text, one pair per line: ``rainy_path<TAB>clean_path<TAB>split``,
with paths relative to the manifest's directory. Lines starting with ``#`` are comments.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import DataError
from ..seeding import rng_for
from .images import image_size, load_image, save_image
from .rainsim import StreakSpec, procedural_background, synth_rain

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.txt"
SPLITS = ("train", "val", "test")
ANGLE_NOTE = "# streak angles: degrees from vertical, positive clockwise"

PathLike = Union[str, Path]


@dataclass(frozen=True)
class ManifestEntry:
    rainy: str
    clean: str
    split: str


@dataclass
class DatasetManifest:
    root: Path
    entries: List[ManifestEntry] = field(default_factory=list)

    def split(self, name: str) -> List[ManifestEntry]:
        return [e for e in self.entries if e.split == name]

    def resolve(self, relative: str) -> Path:
        return self.root / relative

    def load_pairs(self, split: str) -> List[Tuple[np.ndarray, np.ndarray]]:
        return [
            (load_image(self.resolve(e.rainy)), load_image(self.resolve(e.clean)))
            for e in self.split(split)
        ]

    @property
    def path(self) -> Path:
        return self.root / MANIFEST_NAME


def write_manifest(manifest: DatasetManifest, path: Optional[PathLike] = None) -> Path:
    path = Path(path) if path is not None else manifest.path
    lines = [ANGLE_NOTE] + [f"{e.rainy}\t{e.clean}\t{e.split}" for e in manifest.entries]
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot write manifest {path}: {e}") from e
    return path


def load_manifest(path: PathLike, check_files: bool = True) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read manifest {path}: {e}") from e

    manifest = DatasetManifest(root=path.parent)
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3 or fields[2] not in SPLITS:
            raise DataError(f"{path}:{number}: expected rainy<TAB>clean<TAB>train|val|test")
        entry = ManifestEntry(*fields)
        if check_files:
            rainy, clean = manifest.resolve(entry.rainy), manifest.resolve(entry.clean)
            for file in (rainy, clean):
                if not file.exists():
                    raise DataError(f"{path}:{number}: missing file {file}")
            if image_size(rainy) != image_size(clean):
                raise DataError(f"{path}:{number}: {rainy} and {clean} differ in size")
        manifest.entries.append(entry)
    return manifest


def assign_splits(n: int, val: int = 0, test: int = 0) -> List[str]:
    """The last ``test`` pairs are test, the ``val`` before them val, the rest train."""
    if val < 0 or test < 0 or val + test > n:
        raise DataError(f"cannot carve val={val} and test={test} out of {n} pairs")
    return ["train"] * (n - val - test) + ["val"] * val + ["test"] * test


def gen_dataset(
    n: int,
    size: int,
    spec: StreakSpec,
    seed: int,
    out_dir: PathLike,
    val: int = 0,
    test: int = 0,
    backgrounds: Sequence[np.ndarray] = (),
) -> DatasetManifest:
    """
    Write ``n`` rain/clean PNG pairs plus a manifest. User backgrounds, when given, are
    used in turn instead of procedural ones.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f"cannot create {out_dir}: {e}") from e

    manifest = DatasetManifest(root=out_dir)
    for index, split in enumerate(assign_splits(n, val, test)):
        if backgrounds:
            clean = np.asarray(backgrounds[index % len(backgrounds)], dtype=np.float32)
        else:
            clean = procedural_background(size, rng_for(seed, "data", 2 * index))
        streak_seed = int(rng_for(seed, "data", 2 * index + 1).integers(2**31))
        pair = synth_rain(clean, spec, seed=streak_seed)
        rainy_name, clean_name = f"rain_{index:04d}.png", f"clean_{index:04d}.png"
        save_image(pair.rainy, out_dir / rainy_name)
        save_image(pair.clean, out_dir / clean_name)
        manifest.entries.append(ManifestEntry(rainy_name, clean_name, split))
    write_manifest(manifest)
    logger.info("wrote %d pairs to %s", n, out_dir)
    return manifest
