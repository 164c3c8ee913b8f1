import numpy as np
import pytest

from sdsen.autograd import precision
from sdsen.data import gen_dataset, make_streak_spec
from sdsen.models import ModelConfig, RefineConfig


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def float64():
    with precision("float64"):
        yield


@pytest.fixture
def tiny_config():
    """A p4 DSEN small enough for per-test forward/backward passes."""
    return ModelConfig(regular_channels=2, p4_layers=2, kernel=3)


@pytest.fixture
def tiny_refine(tiny_config):
    return RefineConfig(stages=2, base=tiny_config)


@pytest.fixture
def tiny_dataset(tmp_path):
    spec = make_streak_spec(count=(3, 6))
    return gen_dataset(4, 16, spec, seed=7, out_dir=tmp_path / "data", val=1, test=1)


@pytest.fixture
def open_se_gate():
    """Keep the SE hidden ReLU positive so the bottleneck always passes gradient."""

    def apply(model):
        params = model.named_parameters()
        params["stage1/se.reduce.weight"].data[...] *= 0.01
        params["stage1/se.reduce.bias"].data[...] = 1.0
        return model

    return apply
