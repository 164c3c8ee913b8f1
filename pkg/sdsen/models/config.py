"""
Model configuration objects for DSEN, its CNN counterpart and the multi-stage variants.
"""

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import ConfigurationError

MAX_STAGES = 8


class Aggregation(str, Enum):
    LEARNED_CONV = "learned_conv"
    ORIENT_MAX = "orient_max"
    ORIENT_AVG = "orient_avg"


class Backbone(str, Enum):
    P4 = "p4"
    REGULAR_CNN = "regular_cnn"


class Link(str, Enum):
    SKIP_CONCAT = "skip_concat"
    SKIP_ADD = "skip_add"
    NONE = "none"


class ModelConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True, use_enum_values=False)

    regular_channels: int = Field(10, ge=1, description="regular channels of every p4 layer")
    p4_layers: int = Field(4, ge=1, description="P4ConvP4 (or plain conv) layers in the backbone")
    kernel: int = Field(5, ge=1, description="spatial kernel size of backbone and aggregation")
    aggregation: Aggregation = Field(
        Aggregation.LEARNED_CONV, description="learned_conv | orient_max | orient_avg"
    )
    use_se: bool = Field(True, description="squeeze-and-excitation after aggregation")
    se_reduction: int = Field(2, ge=1, description="SE bottleneck reduction factor")
    backbone: Backbone = Field(Backbone.P4, description="p4 | regular_cnn")
    cnn_channels: int = Field(20, ge=1, description="channels of the regular CNN counterpart")
    slope: float = Field(0.2, ge=0.0, lt=1.0, description="leaky ReLU negative slope")

    @model_validator(mode="after")
    def _check(self) -> "ModelConfig":
        if self.kernel % 2 == 0:
            raise ValueError(f"kernel must be odd, got {self.kernel}")
        pooled = self.aggregation is not Aggregation.LEARNED_CONV
        if self.backbone is Backbone.REGULAR_CNN and pooled:
            raise ValueError("orientation pooling needs the p4 backbone")
        if self.aggregation_width % self.se_reduction:
            raise ValueError(
                f"se_reduction {self.se_reduction} does not divide "
                f"SE width {self.aggregation_width}"
            )
        return self

    @property
    def width(self) -> int:
        """Channels per backbone layer (regular channels for p4, planes for the CNN)."""
        return self.regular_channels if self.backbone is Backbone.P4 else self.cnn_channels

    @property
    def aggregation_width(self) -> int:
        return self.width


class RefineConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    stages: int = Field(
        1, ge=1, le=MAX_STAGES, description="recurrent stages (1 = single-stage model)"
    )
    link: Link = Field(Link.SKIP_CONCAT, description="skip_concat | skip_add | none")
    base: ModelConfig = Field(default_factory=ModelConfig)

    @property
    def backbone(self) -> Backbone:
        return self.base.backbone


def make_model_config(**values) -> ModelConfig:
    try:
        return ModelConfig(**values)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e


def make_refine_config(**values) -> RefineConfig:
    try:
        return RefineConfig(**values)
    except ValidationError as e:
        raise ConfigurationError(str(e)) from e
