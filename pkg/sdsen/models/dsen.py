"""
Deep Symmetry Enhanced Network (DSEN) and its regular-CNN counterpart.

Stage layout (p4 backbone, defaults):

    P4ConvZ2(3 -> 10)
    [P4ConvP4(10 -> 10) + identity residual, leaky ReLU] x 4      -> taps
    flatten orientations (40 planes) -> conv 5x5 (40 -> 10), leaky ReLU
    squeeze-and-excitation (10, reduction 2)
    conv 1x1 (10 -> 3) = rain layer R;  B = O - R

The regular-CNN counterpart swaps every G-convolution for a plain convolution with
twice the channels (20).
"""

import logging
from typing import List, Optional

import numpy as np

from ..autograd import Tensor, leaky_relu
from ..errors import ConfigurationError, ShapeError
from ..gconv import flatten_orientations, orientation_pool
from .config import Aggregation, Backbone, ModelConfig
from .graph import DerainOutput, ModelGraph
from .layers import Conv2dLayer, Layer, P4ConvP4Layer, P4ConvZ2Layer, SqueezeExcitation

logger = logging.getLogger(__name__)

IMAGE_CHANNELS = 3
STAGE1 = "stage1/"


class DSEN(ModelGraph):
    def __init__(self, config: ModelConfig, rng: np.random.Generator, prefix: str = STAGE1):
        super().__init__()
        self.config = config
        self.prefix = prefix
        width, k = config.width, config.kernel
        p4 = config.backbone is Backbone.P4

        if p4:
            self.lift = self.register(f"{prefix}lift", P4ConvZ2Layer(IMAGE_CHANNELS, width, k, rng))
        else:
            self.lift = self.register(f"{prefix}lift", Conv2dLayer(IMAGE_CHANNELS, width, k, rng))
        self.blocks: List[Layer] = []
        for i in range(config.p4_layers):
            layer = P4ConvP4Layer(width, width, k, rng) if p4 else Conv2dLayer(width, width, k, rng)
            self.blocks.append(self.register(f"{prefix}block{i}", layer))

        if config.aggregation is Aggregation.LEARNED_CONV and p4:
            aggregate_in = 4 * width
        else:
            aggregate_in = width
        self.aggregate = self.register(
            f"{prefix}aggregate", Conv2dLayer(aggregate_in, width, k, rng)
        )
        self.se: Optional[SqueezeExcitation] = None
        if config.use_se:
            se = SqueezeExcitation(width, config.se_reduction, rng)
            self.se = self.register(f"{prefix}se", se)
        self.decoder = self.register(f"{prefix}decoder", Conv2dLayer(width, IMAGE_CHANNELS, 1, rng))

    def check_input(self, image: Tensor) -> None:
        if image.ndim != 4 or image.shape[1] != IMAGE_CHANNELS:
            raise ShapeError(
                "DSEN input", image.shape, (0, IMAGE_CHANNELS, 0, 0), "expected [N, 3, H, W]"
            )
        h, w = image.shape[2:]
        k = self.config.kernel
        if h < k or w < k:
            raise ShapeError(
                "DSEN input", image.shape, (k, k), f"spatial dims must be at least {k}"
            )

    def residual_block(self, layer: Layer, layer_input: Tensor, own: Tensor) -> Tensor:
        return leaky_relu(layer(layer_input) + own, self.config.slope)

    def head(self, features: Tensor) -> Tensor:
        """Aggregate the last backbone features and decode the rain layer."""
        cfg = self.config
        if cfg.backbone is Backbone.P4:
            if cfg.aggregation is Aggregation.LEARNED_CONV:
                planes = flatten_orientations(features)
            elif cfg.aggregation is Aggregation.ORIENT_MAX:
                planes = orientation_pool(features, "max")
            else:
                planes = orientation_pool(features, "avg")
        else:
            planes = features
        aggregated = leaky_relu(self.aggregate(planes), cfg.slope)
        if self.se is not None:
            aggregated = self.se(aggregated)
        return self.decoder(aggregated)

    def forward(self, image: Tensor) -> DerainOutput:
        self.check_input(image)
        x = self.lift(image)
        taps = []
        for block in self.blocks:
            x = self.residual_block(block, x, x)
            taps.append(x)
        rain = self.head(x)
        return DerainOutput(rain=rain, background=image - rain, taps=taps)


def build_dsen(config: Optional[ModelConfig] = None, seed: int = 0) -> DSEN:
    config = config or ModelConfig()
    model = DSEN(config, np.random.default_rng(seed))
    logger.debug("built %s DSEN with %d parameters", config.backbone.value, model.count_params())
    return model


def build_cnn_counterpart(config: Optional[ModelConfig] = None, seed: int = 0) -> DSEN:
    """Same topology with plain convolutions and doubled channels."""
    config = config or ModelConfig(backbone=Backbone.REGULAR_CNN)
    if config.backbone is not Backbone.REGULAR_CNN:
        raise ConfigurationError("build_cnn_counterpart needs backbone=regular_cnn")
    return build_dsen(config, seed)


def forward(model: ModelGraph, image: Tensor) -> DerainOutput:
    return model.forward(image)
