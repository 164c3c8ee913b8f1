"""
Exception hierarchy shared by every sdsen module.
"""

from typing import Sequence


class SdsenError(Exception):
    """Base class for all library errors."""


class ShapeError(SdsenError):
    """Raised when operand shapes are incompatible."""

    def __init__(self, op: str, left: Sequence[int], right: Sequence[int], detail: str = ""):
        self.op = op
        self.left = tuple(left)
        self.right = tuple(right)
        message = f"{op}: incompatible shapes {self.left} and {self.right}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class ConfigurationError(SdsenError):
    """Invalid model, training or run configuration."""


class GradientError(SdsenError):
    """Backward called on a non-scalar, or a gradient is missing where one is required."""


class CheckpointError(SdsenError):
    """Malformed checkpoint file, or a checkpoint that does not match the model graph."""


class DataError(SdsenError):
    """Unreadable image, malformed manifest or undersized sample."""


class TrainingDivergedError(SdsenError):
    """The training loss became non-finite."""

    def __init__(self, step: int, loss: float):
        self.step = step
        self.loss = loss
        super().__init__(f"non-finite loss {loss!r} at step {step}")
