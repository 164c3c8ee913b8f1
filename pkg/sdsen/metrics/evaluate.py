"""
Batch evaluation of a derainer over one split of a dataset manifest.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from ..autograd import Tensor
from ..data import DatasetManifest, load_image
from ..errors import DataError
from ..models import ModelGraph, forward_multistage
from .quality import format_score, psnr, ssim

logger = logging.getLogger(__name__)


@dataclass
class ImageScore:
    image: str
    psnr: float
    ssim: float


@dataclass
class EvalReport:
    model_id: str
    split: str
    scores: List[ImageScore] = field(default_factory=list)

    @property
    def mean_psnr(self) -> float:
        return float(np.mean([s.psnr for s in self.scores]))

    @property
    def mean_ssim(self) -> float:
        return float(np.mean([s.ssim for s in self.scores]))

    def to_text(self) -> str:
        lines = [f"# model {self.model_id} split {self.split}"]
        lines += [f"{s.image}\t{format_score(s.psnr)}\t{format_score(s.ssim)}" for s in self.scores]
        lines.append(f"MEAN\t{format_score(self.mean_psnr)}\t{format_score(self.mean_ssim)}")
        return "\n".join(lines) + "\n"


def restore(model: ModelGraph, rainy: np.ndarray, stages: Optional[int] = None) -> np.ndarray:
    """Final-stage background for one [3, H, W] image, clamped to [0, 1]."""
    outputs = forward_multistage(model, Tensor(rainy[None]), stages)
    return np.clip(outputs[-1].background.data[0], 0.0, 1.0)


def evaluate(
    model: ModelGraph,
    manifest: DatasetManifest,
    split: str = "test",
    model_id: str = "model",
    stages: Optional[int] = None,
) -> EvalReport:
    entries = manifest.split(split)
    if not entries:
        raise DataError(f"split {split!r} of {manifest.path} is empty")

    report = EvalReport(model_id=model_id, split=split)
    for entry in entries:
        rainy = load_image(manifest.resolve(entry.rainy))
        clean = load_image(manifest.resolve(entry.clean))
        restored = restore(model, rainy, stages)
        report.scores.append(ImageScore(entry.rainy, psnr(restored, clean), ssim(restored, clean)))
        logger.debug("%s psnr %.3f", entry.rainy, report.scores[-1].psnr)
    return report


def write_report(report: EvalReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(report.to_text(), encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot write report {path}: {e}") from e
    return path
