"""
Training loop: batch -> forward (all stages) -> loss -> backward -> Adam.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from ..autograd import Tensor
from ..errors import ConfigurationError, TrainingDivergedError
from ..metrics import psnr
from ..models import (
    ModelConfig,
    ModelGraph,
    RefineConfig,
    forward_multistage,
    save_checkpoint,
    unroll_loss,
)
from ..seeding import rng_for
from .adam import AdamState, adam_step, clip_grad_norm
from .batching import ImagePair, make_batch
from .config import TrainConfig
from .schedule import lr_at

logger = logging.getLogger(__name__)


@dataclass
class StepRecord:
    step: int
    lr: float
    loss: float

    def to_line(self) -> str:
        return f"{self.step}\t{self.lr:.9g}\t{self.loss:.9g}"


@dataclass
class TrainResult:
    records: List[StepRecord] = field(default_factory=list)
    checkpoint: Optional[Path] = None
    val_psnr: List[float] = field(default_factory=list)

    @property
    def initial_loss(self) -> float:
        return self.records[0].loss if self.records else math.nan

    @property
    def final_loss(self) -> float:
        return self.records[-1].loss if self.records else math.nan


def _kernel_of(model: ModelGraph) -> Optional[int]:
    config = getattr(model, "config", None)
    if isinstance(config, RefineConfig):
        return config.base.kernel
    if isinstance(config, ModelConfig):
        return config.kernel
    return None


def validation_psnr(model: ModelGraph, pairs: Sequence[ImagePair]) -> float:
    scores = []
    for rainy, clean in pairs:
        restored = model.forward(Tensor(rainy[None])).background.data[0]
        scores.append(psnr(np.clip(restored, 0.0, 1.0), clean))
    return float(np.mean(scores))


def train(
    model: ModelGraph,
    dataset: Sequence[ImagePair],
    config: TrainConfig,
    checkpoint_path: Optional[Union[str, Path]] = None,
    log_path: Optional[Union[str, Path]] = None,
    val_pairs: Sequence[ImagePair] = (),
    model_config: Optional[RefineConfig] = None,
) -> TrainResult:
    kernel = _kernel_of(model)
    if kernel is not None and config.crop < kernel:
        raise ConfigurationError(f"crop {config.crop} is smaller than the kernel {kernel}")

    rng = rng_for(config.seed, "batch")
    state = AdamState()
    params = model.named_parameters()
    result = TrainResult()
    log_file = None
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        log_file = open(log_path, "w", encoding="utf-8")

    logger.info("training %d parameters for %d steps", model.count_params(), config.max_steps)
    try:
        for step in range(config.max_steps):
            rainy, clean = make_batch(dataset, config, rng)
            model.zero_grad()
            outputs = forward_multistage(model, Tensor(rainy))
            loss = unroll_loss(outputs, Tensor(clean), config.loss_mode)
            value = loss.item()
            if not math.isfinite(value):
                raise TrainingDivergedError(step, value)
            loss.backward()
            if config.clip_norm is not None:
                clip_grad_norm(params, config.clip_norm)
            lr = lr_at(step, config)
            adam_step(params, state, lr, config.betas, config.eps)

            record = StepRecord(step, lr, value)
            result.records.append(record)
            if log_file is not None:
                log_file.write(record.to_line() + "\n")
                log_file.flush()
            if step % 100 == 0:
                logger.info("step %d lr %.3g loss %.6f", step, lr, value)

            done = step + 1
            every = config.checkpoint_every
            if checkpoint_path is not None and every and done % every == 0:
                path = Path(checkpoint_path)
                periodic = path.with_name(f"{path.stem}_step{done}{path.suffix}")
                save_checkpoint(model, periodic, model_config)
            if val_pairs and config.val_every and done % config.val_every == 0:
                score = validation_psnr(model, val_pairs)
                result.val_psnr.append(score)
                logger.info("step %d validation PSNR %.3f dB", done, score)
    finally:
        if log_file is not None:
            log_file.close()

    if checkpoint_path is not None:
        result.checkpoint = save_checkpoint(model, checkpoint_path, model_config)
    return result
