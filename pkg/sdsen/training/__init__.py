"""
Adam, the step learning-rate schedule, batch assembly and the training loop.
"""

from .adam import AdamState, adam_step, clip_grad_norm
from .batching import augment_pair, make_batch
from .config import Augment, TrainConfig
from .schedule import lr_at
from .trainer import StepRecord, TrainResult, train, validation_psnr

__all__ = [
    "AdamState",
    "Augment",
    "StepRecord",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "augment_pair",
    "clip_grad_norm",
    "lr_at",
    "make_batch",
    "train",
    "validation_psnr",
]
