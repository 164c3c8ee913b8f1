"""
Named-parameter container shared by every model.
"""

import logging
from typing import Dict, List, Mapping, NamedTuple

import numpy as np

from ..autograd import Tensor
from ..errors import CheckpointError
from .layers import Layer

logger = logging.getLogger(__name__)


class DerainOutput(NamedTuple):
    rain: Tensor
    background: Tensor
    taps: List[Tensor]


class ModelGraph:
    """
    Ordered registry of named layers. Parameter names are "<layer name>.<local name>"
    and are stable across runs, which keeps checkpoints compatible.
    """

    def __init__(self) -> None:
        self.layers: Dict[str, Layer] = {}

    def register(self, name: str, layer: Layer) -> Layer:
        if name in self.layers:
            raise ValueError(f"layer {name!r} registered twice")
        self.layers[name] = layer
        return layer

    def named_parameters(self) -> Dict[str, Tensor]:
        params: Dict[str, Tensor] = {}
        for layer_name, layer in self.layers.items():
            for local, tensor in layer.parameters().items():
                params[f"{layer_name}.{local}"] = tensor
        return params

    def parameters(self) -> List[Tensor]:
        return list(self.named_parameters().values())

    def count_params(self) -> int:
        return sum(p.size for p in self.parameters())

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.named_parameters().items()}

    def load_state_dict(self, state: Mapping[str, np.ndarray], strict: bool = True) -> List[str]:
        """
        Copy arrays into the parameters. With strict=False, entries the graph does not
        own are skipped and their names returned; missing or mis-shaped entries always fail.
        """
        params = self.named_parameters()
        missing = [name for name in params if name not in state]
        if missing:
            raise CheckpointError(f"checkpoint lacks parameters: {', '.join(missing)}")
        unexpected = [name for name in state if name not in params]
        if unexpected and strict:
            raise CheckpointError(f"checkpoint has unknown parameters: {', '.join(unexpected)}")
        for name, p in params.items():
            value = np.asarray(state[name])
            if value.shape != p.shape:
                raise CheckpointError(
                    f"parameter {name}: checkpoint shape {value.shape} != model shape {p.shape}"
                )
            p.data = value.astype(p.data.dtype, copy=True)
        if unexpected:
            logger.info("ignored %d checkpoint entries not in this graph", len(unexpected))
        return unexpected

    def forward(self, image: Tensor) -> DerainOutput:
        raise NotImplementedError

    def __call__(self, image: Tensor) -> DerainOutput:
        return self.forward(image)


def count_params(model: ModelGraph) -> int:
    return model.count_params()

