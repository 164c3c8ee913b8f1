import numpy as np
import pytest

from sdsen.autograd import Tensor, mse_loss
from sdsen.errors import ConfigurationError, ShapeError
from sdsen.gconv import rotate_p4_array
from sdsen.models import (
    VARIANTS,
    Aggregation,
    Backbone,
    ModelConfig,
    build_cnn_counterpart,
    build_dsen,
    count_params,
    forward,
    get_variant,
    make_model_config,
)


@pytest.mark.parametrize(
    "config,expected",
    [
        (ModelConfig(), 50958),
        (ModelConfig(backbone=Backbone.REGULAR_CNN), 52113),
        (ModelConfig(use_se=False), 50843),
        (ModelConfig(aggregation=Aggregation.ORIENT_MAX), 43458),
        (ModelConfig(aggregation=Aggregation.ORIENT_AVG), 43458),
    ],
)
def test_parameter_counts(config, expected):
    assert count_params(build_dsen(config)) == expected


def test_cnn_counterpart_defaults():
    assert build_cnn_counterpart().count_params() == 52113
    with pytest.raises(ConfigurationError):
        build_cnn_counterpart(ModelConfig())


def test_parameter_names_are_stable():
    names = list(build_dsen().named_parameters())
    assert names[:2] == ["stage1/lift.weight", "stage1/lift.bias"]
    assert "stage1/block3.weight" in names
    assert "stage1/se.reduce.weight" in names
    assert names[-1] == "stage1/decoder.bias"
    without_se = build_dsen(ModelConfig(use_se=False)).named_parameters()
    assert "stage1/se.reduce.weight" not in without_se


def test_parameter_shapes():
    params = build_dsen().named_parameters()
    assert params["stage1/lift.weight"].shape == (10, 3, 1, 5, 5)
    assert params["stage1/block0.weight"].shape == (10, 10, 4, 5, 5)
    assert params["stage1/aggregate.weight"].shape == (10, 40, 5, 5)
    assert params["stage1/decoder.weight"].shape == (3, 10, 1, 1)


def test_biases_start_at_zero():
    for name, p in build_dsen().named_parameters().items():
        if name.endswith("bias"):
            assert not p.data.any(), name


def test_same_seed_same_weights():
    a = build_dsen(seed=3).state_dict()
    b = build_dsen(seed=3).state_dict()
    c = build_dsen(seed=4).state_dict()
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert not np.array_equal(a["stage1/lift.weight"], c["stage1/lift.weight"])


def test_background_is_input_minus_rain(tiny_config, rng):
    model = build_dsen(tiny_config, seed=0)
    image = Tensor(rng.uniform(0, 1, (2, 3, 9, 9)))
    out = forward(model, image)
    assert out.rain.shape == (2, 3, 9, 9)
    np.testing.assert_allclose(out.background.data, image.data - out.rain.data, atol=1e-6)
    assert len(out.taps) == tiny_config.p4_layers
    assert out.taps[0].shape == (2, 2, 4, 9, 9)


def test_forward_is_deterministic(tiny_config, rng):
    image = Tensor(rng.uniform(0, 1, (1, 3, 8, 8)))
    first = build_dsen(tiny_config, seed=5)(image).rain.data
    second = build_dsen(tiny_config, seed=5)(image).rain.data
    np.testing.assert_array_equal(first, second)


def test_input_checks(tiny_config):
    model = build_dsen(tiny_config)
    with pytest.raises(ShapeError):
        model(Tensor(np.zeros((1, 3, 2, 2))))
    with pytest.raises(ShapeError):
        model(Tensor(np.zeros((1, 4, 8, 8))))
    with pytest.raises(ShapeError):
        model(Tensor(np.zeros((3, 8, 8))))


@pytest.mark.parametrize("seed", range(5))
def test_every_parameter_receives_gradient(tiny_config, open_se_gate, seed):
    rng = np.random.default_rng(seed)
    model = open_se_gate(build_dsen(tiny_config, seed=seed))
    image = Tensor(rng.uniform(0, 1, (2, 3, 8, 8)))
    target = Tensor(rng.uniform(0, 1, (2, 3, 8, 8)))
    mse_loss(model(image).background, target).backward()
    for name, p in model.named_parameters().items():
        assert p.grad is not None, name
        assert np.abs(p.grad).sum() > 0, name


def test_backbone_taps_are_equivariant(rng):
    config = ModelConfig(regular_channels=2, p4_layers=3, kernel=3)
    model = build_dsen(config, seed=2)
    image = rng.uniform(0, 1, (1, 3, 8, 8))
    base = model(Tensor(image)).taps
    moved = model(Tensor(np.rot90(image, 1, axes=(2, 3)).copy())).taps
    for tap, tap_moved in zip(base, moved):
        scale = max(1.0, float(np.abs(tap.data).max()))
        assert np.abs(tap_moved.data - rotate_p4_array(tap.data, 1)).max() < 1e-5 * scale


@pytest.mark.parametrize(
    "values",
    [
        {"kernel": 4},
        {"backbone": "regular_cnn", "aggregation": "orient_max"},
        {"se_reduction": 3},
        {"unknown": 1},
    ],
)
def test_invalid_model_config(values):
    with pytest.raises(ConfigurationError):
        make_model_config(**values)


def test_variants_cover_ablations():
    for name in ("DSEN", "DSEN_maxpool", "DSEN_avgpool", "DSEN_w/o_SE", "CNN", "S-DSEN"):
        assert name in VARIANTS
    assert get_variant("CNN+C4DA").augment == "c4"
    assert get_variant("S-DSEN").refine.stages == 8
    with pytest.raises(ConfigurationError):
        get_variant("ResNet")
