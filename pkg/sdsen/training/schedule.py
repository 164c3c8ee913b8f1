"""
Piecewise-constant learning-rate schedule.
"""

from bisect import bisect_right

from .config import TrainConfig


def lr_at(step: int, config: TrainConfig) -> float:
    """lr0 divided by the drop factor once per drop step already reached (inclusive)."""
    if step < 0:
        raise ValueError(f"step must be non-negative, got {step}")
    drops = bisect_right(config.lr_drop_steps, step)
    return config.lr0 / (config.lr_drop_factor**drops)
