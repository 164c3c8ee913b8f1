"""
Self-refining multi-stage recurrence.

Stage 1 is a plain DSEN. Every later stage consumes the previous restored image and,
at backbone position i, receives the previous stage's tap i through a link layer:

    skip_concat  layer input = concat(own, link_i(tap_i)), refine-template layer (2K -> K)
    skip_add     layer input = own + link_i(tap_i), stage-1 layer
    none         plain weight reuse of stage 1

The residual always adds the own-feature path. Link and refine layers are shared by
every stage boundary, so the parameter count does not depend on the stage count.
Lift, aggregation, SE and decoder are shared with stage 1.
"""

import logging
from typing import List, Optional, Sequence

import numpy as np

from ..autograd import Tensor, concat_channels, mse_loss
from ..errors import ConfigurationError
from .config import Backbone, Link, RefineConfig
from .dsen import DSEN
from .graph import DerainOutput, ModelGraph
from .layers import Conv2dLayer, Layer, P4ConvP4Layer

logger = logging.getLogger(__name__)

LINK = "link/"
REFINE = "refine/"


class SelfRefiningDSEN(ModelGraph):
    def __init__(self, config: RefineConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        self.base = DSEN(config.base, rng)
        self.layers.update(self.base.layers)

        self.links: List[Layer] = []
        self.refines: List[Layer] = []
        if config.stages == 1 or config.link is Link.NONE:
            return

        base = config.base
        p4 = base.backbone is Backbone.P4
        layer_cls = P4ConvP4Layer if p4 else Conv2dLayer
        width, k = base.width, base.kernel
        for i in range(base.p4_layers):
            self.links.append(self.register(f"{LINK}block{i}", layer_cls(width, width, k, rng)))
        if config.link is Link.SKIP_CONCAT:
            for i in range(base.p4_layers):
                layer = layer_cls(2 * width, width, k, rng)
                self.refines.append(self.register(f"{REFINE}block{i}", layer))

    @property
    def stages(self) -> int:
        return self.config.stages

    def refine_stage(self, image: Tensor, previous_taps: Sequence[Tensor]) -> DerainOutput:
        base = self.base
        link = self.config.link
        x = base.lift(image)
        taps = []
        for i, block in enumerate(base.blocks):
            own = x
            if link is Link.SKIP_CONCAT:
                linked = self.links[i](previous_taps[i])
                x = base.residual_block(self.refines[i], concat_channels([own, linked]), own)
            elif link is Link.SKIP_ADD:
                linked = self.links[i](previous_taps[i])
                x = base.residual_block(block, own + linked, own)
            else:
                x = base.residual_block(block, own, own)
            taps.append(x)
        rain = base.head(x)
        return DerainOutput(rain=rain, background=image - rain, taps=taps)

    def forward_multistage(self, image: Tensor, stages: Optional[int] = None) -> List[DerainOutput]:
        if stages is None:
            stages = self.stages
        if stages < 1:
            raise ConfigurationError(f"stages must be at least 1, got {stages}")
        if stages > 1 and self.config.link is not Link.NONE and not self.links:
            raise ConfigurationError(
                "this graph was built without link layers; rebuild with stages > 1"
            )
        outputs = [self.base.forward(image)]
        for _ in range(1, stages):
            previous = outputs[-1]
            outputs.append(self.refine_stage(previous.background, previous.taps))
        return outputs

    def forward(self, image: Tensor) -> DerainOutput:
        return self.forward_multistage(image)[-1]


def build_sdsen(config: Optional[RefineConfig] = None, seed: int = 0) -> SelfRefiningDSEN:
    config = config or RefineConfig(stages=2)
    model = SelfRefiningDSEN(config, np.random.default_rng(seed))
    logger.debug(
        "built %d-stage %s model (%s) with %d parameters",
        config.stages,
        config.base.backbone.value,
        config.link.value,
        model.count_params(),
    )
    return model


def forward_multistage(
    model: ModelGraph, image: Tensor, stages: Optional[int] = None
) -> List[DerainOutput]:
    if isinstance(model, SelfRefiningDSEN):
        return model.forward_multistage(image, stages)
    if stages not in (None, 1):
        raise ConfigurationError("a single-stage graph cannot run more than one stage")
    return [model.forward(image)]


def unroll_loss(outputs: Sequence[DerainOutput], target: Tensor, mode: str = "final") -> Tensor:
    """L2 loss of the final stage, or the mean of the per-stage losses."""
    if not outputs:
        raise ConfigurationError("unroll_loss needs at least one stage output")
    if mode == "final":
        return mse_loss(outputs[-1].background, target)
    if mode == "per_stage":
        total = mse_loss(outputs[0].background, target)
        for out in outputs[1:]:
            total = total + mse_loss(out.background, target)
        return total / len(outputs)
    raise ConfigurationError(f"loss mode must be 'final' or 'per_stage', got {mode!r}")
