"""
Training configuration.
"""

from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Augment(str, Enum):
    NONE = "none"
    ROT_RANGE = "rot_range"
    C4 = "c4"


class TrainConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    lr0: float = Field(0.0005, gt=0, description="initial learning rate")
    lr_drop_steps: List[int] = Field([15000, 17500], description="steps at which lr is divided")
    lr_drop_factor: float = Field(10.0, gt=0, description="divisor applied at each drop step")
    batch: int = Field(64, ge=1, description="pairs per batch")
    crop: int = Field(64, ge=1, description="square crop size")
    max_steps: int = Field(20000, ge=0, description="optimisation steps")
    betas: Tuple[float, float] = Field((0.9, 0.999), description="Adam moment decay rates")
    eps: float = Field(1e-8, gt=0, description="Adam denominator epsilon")
    augment: Augment = Field(Augment.NONE, description="none | rot_range | c4")
    rot_range: Tuple[float, float] = Field(
        (-30.0, 30.0), description="rot_range angle bounds, degrees"
    )
    seed: int = Field(0, ge=0, description="run seed")
    loss_mode: str = Field("final", pattern="^(final|per_stage)$", description="final | per_stage")
    clip_norm: Optional[float] = Field(
        None, gt=0, description="global gradient-norm clip, off when unset"
    )
    checkpoint_every: int = Field(
        0, ge=0, description="periodic checkpoint interval, 0 = only at end"
    )
    val_every: int = Field(0, ge=0, description="validation interval on the val split, 0 = off")

    @model_validator(mode="after")
    def _check(self) -> "TrainConfig":
        steps = self.lr_drop_steps
        if any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError(f"lr_drop_steps must be strictly increasing, got {steps}")
        if any(s < 0 for s in steps):
            raise ValueError("lr_drop_steps must be non-negative")
        if self.rot_range[0] > self.rot_range[1]:
            raise ValueError(f"rot_range bounds reversed: {self.rot_range}")
        return self
