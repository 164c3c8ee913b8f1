"""
Binary checkpoint format.

    magic   b"DSEN"
    version u16
    count   u32
    per tensor: name length u16, UTF-8 name, rank u8, extents u32 * rank,
                float32 data, row-major
All integers and floats are little-endian. A JSON sidecar ``<path>.json`` records the
configuration that built the graph.
"""

import io
import logging
import struct
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from ..errors import CheckpointError
from .config import Aggregation, Backbone, Link, ModelConfig, RefineConfig, make_refine_config
from .graph import ModelGraph
from .refine import SelfRefiningDSEN, build_sdsen

logger = logging.getLogger(__name__)

MAGIC = b"DSEN"
VERSION = 1

PathLike = Union[str, Path]


def encode_state(state: Dict[str, np.ndarray]) -> bytes:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(struct.pack("<HI", VERSION, len(state)))
    for name, array in state.items():
        encoded = name.encode("utf-8")
        buf.write(struct.pack("<H", len(encoded)))
        buf.write(encoded)
        buf.write(struct.pack("<B", array.ndim))
        buf.write(struct.pack(f"<{array.ndim}I", *array.shape))
        buf.write(np.ascontiguousarray(array, dtype="<f4").tobytes())
    return buf.getvalue()


def decode_state(payload: bytes, source: str = "<bytes>") -> Dict[str, np.ndarray]:
    view = memoryview(payload)
    offset = 0

    def take(size: int) -> memoryview:
        nonlocal offset
        if offset + size > len(view):
            raise CheckpointError(f"{source}: truncated checkpoint at byte {offset}")
        chunk = view[offset : offset + size]
        offset += size
        return chunk

    if bytes(take(4)) != MAGIC:
        raise CheckpointError(f"{source}: not a checkpoint (bad magic)")
    version, count = struct.unpack("<HI", take(6))
    if version != VERSION:
        raise CheckpointError(f"{source}: unsupported checkpoint version {version}")
    state: Dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = bytes(take(name_len)).decode("utf-8")
        (rank,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{rank}I", take(4 * rank))
        size = int(np.prod(shape, dtype=np.int64))
        data = np.frombuffer(take(4 * size), dtype="<f4").reshape(shape)
        state[name] = data.astype(np.float32)
    if offset != len(view):
        raise CheckpointError(f"{source}: {len(view) - offset} trailing bytes")
    return state


def sidecar_path(path: PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def save_checkpoint(
    model: ModelGraph, path: PathLike, config: Optional[RefineConfig] = None
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_state(model.state_dict()))
    if config is None and isinstance(model, SelfRefiningDSEN):
        config = model.config
    if config is not None:
        sidecar_path(path).write_text(config.model_dump_json(indent=2), encoding="utf-8")
    logger.info("saved checkpoint %s (%d tensors)", path, len(model.named_parameters()))
    return path


def load_state(path: PathLike) -> Dict[str, np.ndarray]:
    path = Path(path)
    try:
        payload = path.read_bytes()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    return decode_state(payload, str(path))


def load_checkpoint(model: ModelGraph, path: PathLike, strict: bool = True) -> ModelGraph:
    model.load_state_dict(load_state(path), strict=strict)
    return model


def infer_config(state: Dict[str, np.ndarray], stages: Optional[int] = None) -> RefineConfig:
    """Recover the architecture from parameter names and shapes."""
    try:
        lift = state["stage1/lift.weight"]
        aggregate = state["stage1/aggregate.weight"]
    except KeyError as e:
        raise CheckpointError(f"checkpoint lacks {e.args[0]}; not a DSEN-family graph") from e
    p4 = lift.ndim == 5
    width, kernel = lift.shape[0], lift.shape[-1]
    layers = sum(
        1 for name in state if name.startswith("stage1/block") and name.endswith(".weight")
    )
    if p4 and aggregate.shape[1] == 4 * width:
        aggregation = Aggregation.LEARNED_CONV
    elif p4:
        # max and avg pooling have identical parameters; max is the documented default
        aggregation = Aggregation.ORIENT_MAX
    else:
        aggregation = Aggregation.LEARNED_CONV
    use_se = "stage1/se.reduce.weight" in state
    reduction = width // state["stage1/se.reduce.weight"].shape[0] if use_se else 2
    base = ModelConfig(
        regular_channels=width if p4 else 10,
        cnn_channels=width if not p4 else 20,
        p4_layers=layers,
        kernel=kernel,
        aggregation=aggregation,
        use_se=use_se,
        se_reduction=reduction,
        backbone=Backbone.P4 if p4 else Backbone.REGULAR_CNN,
    )
    if any(name.startswith("refine/") for name in state):
        link = Link.SKIP_CONCAT
    elif any(name.startswith("link/") for name in state):
        link = Link.SKIP_ADD
    else:
        link = Link.NONE
    if stages is None:
        stages = 1 if link is Link.NONE else 2
    return make_refine_config(stages=stages, link=link, base=base)


def read_config(path: PathLike) -> Optional[RefineConfig]:
    sidecar = sidecar_path(path)
    if not sidecar.exists():
        return None
    return RefineConfig.model_validate_json(sidecar.read_text(encoding="utf-8"))


def model_from_checkpoint(path: PathLike, stages: Optional[int] = None) -> SelfRefiningDSEN:
    """Rebuild the graph recorded next to a checkpoint and load its weights."""
    state = load_state(path)
    config = read_config(path) or infer_config(state, stages)
    if stages is not None and stages != config.stages:
        config = make_refine_config(**{**config.model_dump(), "stages": stages})
    if config.stages == 1 and any(name.startswith(("link/", "refine/")) for name in state):
        # keep link/refine layers so the same graph can still run more stages
        config = config.model_copy(update={"stages": 2})
        model = build_sdsen(config)
        model.config = config.model_copy(update={"stages": 1})
    else:
        model = build_sdsen(config)
    model.load_state_dict(state, strict=True)
    return model
