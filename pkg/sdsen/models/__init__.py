"""
DSEN, the regular-CNN counterpart and the self-refining multi-stage models.
"""

from .checkpoint import (
    decode_state,
    encode_state,
    infer_config,
    load_checkpoint,
    load_state,
    model_from_checkpoint,
    read_config,
    save_checkpoint,
)
from .config import (
    MAX_STAGES,
    Aggregation,
    Backbone,
    Link,
    ModelConfig,
    RefineConfig,
    make_model_config,
    make_refine_config,
)
from .dsen import DSEN, build_cnn_counterpart, build_dsen, forward
from .graph import DerainOutput, ModelGraph, count_params
from .refine import SelfRefiningDSEN, build_sdsen, forward_multistage, unroll_loss
from .variants import VARIANTS, Variant, get_variant

__all__ = [
    "MAX_STAGES",
    "Aggregation",
    "Backbone",
    "DSEN",
    "DerainOutput",
    "Link",
    "ModelConfig",
    "ModelGraph",
    "RefineConfig",
    "SelfRefiningDSEN",
    "VARIANTS",
    "Variant",
    "build_cnn_counterpart",
    "build_dsen",
    "build_sdsen",
    "count_params",
    "decode_state",
    "encode_state",
    "forward",
    "forward_multistage",
    "get_variant",
    "infer_config",
    "load_checkpoint",
    "load_state",
    "make_model_config",
    "make_refine_config",
    "model_from_checkpoint",
    "read_config",
    "save_checkpoint",
    "unroll_loss",
]
