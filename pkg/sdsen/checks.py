"""
Numeric property suites behind ``sdsen check``.

Each suite returns a list of PropertyResult; a suite passes when every property does.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from .autograd import (
    Tensor,
    broadcast_to,
    concat_channels,
    conv2d,
    global_avg_pool,
    gradcheck,
    leaky_relu,
    max_over,
    mean_over,
    mse_loss,
    mul_channelwise,
    precision,
    roll,
    rot90,
    sigmoid,
    stack,
)
from .autograd.im2col import conv2d_direct
from .errors import ConfigurationError
from .gconv import (
    P4_FROM_P4,
    P4_FROM_Z2,
    P4Filter,
    g_conv_oracle,
    orientation_pool,
    p4conv_p4,
    p4conv_z2,
    rotate_p4_array,
)
from .models import Backbone, Link, ModelConfig, RefineConfig, build_dsen, build_sdsen

logger = logging.getLogger(__name__)

DSEN_PARAMS = 50958
CNN_PARAMS = 52113
EQUIVARIANCE_TOL = {np.float32: 1e-5, np.float64: 1e-10}
GRADCHECK_TOL = 1e-4
ORACLE_TOL = 1e-6


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str

    def to_line(self) -> str:
        mark = "✅" if self.passed else "❌"
        return f"{mark} {self.name}: {self.detail}"


def _within(name: str, deviation: float, tol: float) -> PropertyResult:
    return PropertyResult(name, bool(deviation < tol), f"max deviation {deviation:.3e} (< {tol:g})")


def _equals(name: str, got: int, expected: int) -> PropertyResult:
    return PropertyResult(name, got == expected, f"{got} (expected {expected})")


def _random_filter(rng, k_out, k_in, s, k, dtype) -> P4Filter:
    scale = 1.0 / np.sqrt(k_in * s * k * k)
    weight = Tensor(rng.standard_normal((k_out, k_in, s, k, k)) * scale, dtype=dtype)
    return P4Filter(weight, Tensor(rng.standard_normal(k_out) * 0.1, dtype=dtype))


def _rotate_planar(x: np.ndarray, r: int) -> np.ndarray:
    return np.rot90(x, r, axes=(-2, -1)).copy()


def _track(worst: Dict[str, float], key: str, got: np.ndarray, want: np.ndarray) -> None:
    worst[key] = max(worst[key], float(np.abs(got - want).max()))


# -- equivariance ---------------------------------------------------------------------


def _stack_forward(x: Tensor, lift: P4Filter, blocks: Sequence[P4Filter]) -> Tensor:
    h = leaky_relu(p4conv_z2(x, lift))
    for psi in blocks:
        h = leaky_relu(p4conv_p4(h, psi) + h)
    return h


def equivariance_suite(trials: int = 20, seed: int = 0, dtype=np.float32) -> List[PropertyResult]:
    """C4 equivariance of both layers, a five-layer residual stack, pooling and DSEN taps."""
    rng = np.random.default_rng(seed)
    worst: Dict[str, float] = {"p4conv_z2": 0.0, "p4conv_p4": 0.0, "stack": 0.0, "pool": 0.0}
    with precision(dtype):
        for _ in range(trials):
            size = int(rng.integers(5, 10))
            c_in, k_mid = int(rng.integers(1, 4)), int(rng.integers(1, 4))
            kernel = int(rng.choice([1, 3, 5]))
            image = rng.standard_normal((2, c_in, size, size))
            gmap = rng.standard_normal((2, k_mid, 4, size, size))
            lift = _random_filter(rng, k_mid, c_in, 1, kernel, dtype)
            group = _random_filter(rng, k_mid, k_mid, 4, kernel, dtype)
            blocks = [_random_filter(rng, k_mid, k_mid, 4, kernel, dtype) for _ in range(4)]

            for r in (1, 2, 3):
                rotated_image = Tensor(_rotate_planar(image, r), dtype=dtype)
                base = p4conv_z2(Tensor(image, dtype=dtype), lift).data
                moved = p4conv_z2(rotated_image, lift).data
                _track(worst, "p4conv_z2", moved, rotate_p4_array(base, r))

                base = p4conv_p4(Tensor(gmap, dtype=dtype), group).data
                moved = p4conv_p4(Tensor(rotate_p4_array(gmap, r), dtype=dtype), group).data
                _track(worst, "p4conv_p4", moved, rotate_p4_array(base, r))

                base = _stack_forward(Tensor(image, dtype=dtype), lift, blocks).data
                moved = _stack_forward(rotated_image, lift, blocks).data
                _track(worst, "stack", moved, rotate_p4_array(base, r))

                for mode in ("max", "avg"):
                    base = orientation_pool(p4conv_z2(Tensor(image, dtype=dtype), lift), mode).data
                    moved = orientation_pool(p4conv_z2(rotated_image, lift), mode).data
                    _track(worst, "pool", moved, _rotate_planar(base, r))

        model = build_dsen(ModelConfig(regular_channels=3, p4_layers=2, kernel=3), seed=seed)
        image = rng.uniform(0.0, 1.0, size=(1, 3, 8, 8))
        taps = model.forward(Tensor(image, dtype=dtype)).taps
        tap_dev = 0.0
        for r in (1, 2, 3):
            moved = model.forward(Tensor(_rotate_planar(image, r), dtype=dtype)).taps
            for a, b in zip(taps, moved):
                tap_dev = max(tap_dev, np.abs(b.data - rotate_p4_array(a.data, r)).max())

    tol = EQUIVARIANCE_TOL[np.dtype(dtype).type]
    bits = f" ({np.dtype(dtype).itemsize * 8}-bit)"
    results = [
        _within("p4conv_z2 commutes with rotation" + bits, worst["p4conv_z2"], tol),
        _within("p4conv_p4 commutes with the p4 action" + bits, worst["p4conv_p4"], tol),
        _within("5-layer residual stack is equivariant" + bits, worst["stack"], tol),
        _within("orientation pooling is rotation covariant" + bits, worst["pool"], tol),
        _within("DSEN backbone taps are equivariant" + bits, tap_dev, tol),
    ]
    return results


def equivariance_both_precisions(trials: int = 20, seed: int = 0) -> List[PropertyResult]:
    """The equivariance suite at 32-bit and then 64-bit tolerance."""
    return [
        result
        for dtype in (np.float32, np.float64)
        for result in equivariance_suite(trials, seed, dtype)
    ]


# -- gradients ------------------------------------------------------------------------


def _primitive_cases(rng: np.random.Generator) -> Dict[str, tuple]:
    def leaf(*shape):
        return Tensor(rng.standard_normal(shape), requires_grad=True)

    x4 = leaf(2, 3, 5, 5)
    g5 = leaf(1, 2, 4, 5, 5)
    return {
        "conv2d": (
            lambda x, w, b: conv2d(x, w, b, stride=1, padding=1),
            [x4, leaf(4, 3, 3, 3), leaf(4)],
        ),
        "conv2d stride 2": (
            lambda x, w: conv2d(x, w, stride=2, padding=1),
            [leaf(1, 2, 5, 5), leaf(3, 2, 3, 3)],
        ),
        "leaky_relu": (lambda x: leaky_relu(x, 0.2), [leaf(3, 4)]),
        "sigmoid": (sigmoid, [leaf(3, 4)]),
        "add/sub/mul": (lambda a, b: (a + b) * a - b, [leaf(2, 3), leaf(2, 3)]),
        "mul_channelwise": (mul_channelwise, [leaf(2, 3, 4, 4), leaf(2, 3, 1, 1)]),
        "concat_channels": (
            lambda a, b: concat_channels([a, b]),
            [leaf(1, 2, 3, 3), leaf(1, 1, 3, 3)],
        ),
        "stack": (lambda a, b: stack([a, b], axis=1), [leaf(2, 3), leaf(2, 3)]),
        "broadcast_to": (lambda a: broadcast_to(a, (3, 4)), [leaf(3, 1)]),
        "global_avg_pool": (global_avg_pool, [leaf(2, 3, 4, 4)]),
        "mse_loss": (mse_loss, [leaf(2, 3, 4, 4), leaf(2, 3, 4, 4)]),
        "rot90": (lambda a: rot90(a, 1), [leaf(2, 3, 4, 5)]),
        "roll": (lambda a: roll(a, 1, axis=2), [leaf(1, 2, 4, 3, 3)]),
        "max_over": (lambda a: max_over(a, axis=2), [leaf(1, 2, 4, 3, 3)]),
        "mean_over": (lambda a: mean_over(a, axis=2), [leaf(1, 2, 4, 3, 3)]),
        "p4conv_z2": (
            lambda x, w, b: p4conv_z2(x, P4Filter(w, b)),
            [leaf(1, 2, 5, 5), leaf(2, 2, 1, 3, 3), leaf(2)],
        ),
        "p4conv_p4": (
            lambda x, w, b: p4conv_p4(x, P4Filter(w, b)),
            [g5, leaf(2, 2, 4, 3, 3), leaf(2)],
        ),
        "orientation_pool": (lambda x: orientation_pool(x, "avg"), [leaf(1, 2, 4, 3, 3)]),
    }


def gradcheck_suite(seeds: int = 10, seed: int = 0) -> List[PropertyResult]:
    """Central finite differences in 64-bit for every primitive and both G-conv layers."""
    worst: Dict[str, float] = {}
    with precision("float64"):
        for offset in range(seeds):
            rng = np.random.default_rng(seed + offset)
            for name, (fn, inputs) in _primitive_cases(rng).items():
                result = gradcheck(fn, inputs, rng=rng)
                worst[name] = max(worst.get(name, 0.0), result.max_rel_error)
    return [
        PropertyResult(f"gradient of {name}", err < GRADCHECK_TOL, f"max relative error {err:.3e}")
        for name, err in worst.items()
    ]


# -- parameter counts -----------------------------------------------------------------


def params_suite() -> List[PropertyResult]:
    dsen = build_dsen()
    cnn = build_dsen(ModelConfig(backbone=Backbone.REGULAR_CNN))
    results = [
        _equals("DSEN parameter count", dsen.count_params(), DSEN_PARAMS),
        _equals("CNN counterpart parameter count", cnn.count_params(), CNN_PARAMS),
    ]

    counts = {
        t: build_sdsen(RefineConfig(stages=t, link=Link.SKIP_CONCAT)).count_params()
        for t in (2, 4, 6, 8)
    }
    results.append(
        PropertyResult(
            "S-DSEN parameter count independent of stages",
            len(set(counts.values())) == 1,
            ", ".join(f"T={t}: {n}" for t, n in counts.items()),
        )
    )

    single = build_sdsen(RefineConfig(stages=1)).state_dict()
    shapes = {name: value.shape for name, value in dsen.state_dict().items()}
    compatible = shapes == {name: value.shape for name, value in single.items()}
    results.append(
        PropertyResult(
            "stages=1 graph is weight-compatible with DSEN", compatible, f"{len(single)} tensors"
        )
    )
    return results


# -- oracle ---------------------------------------------------------------------------


def oracle_suite(cases: int = 32, seed: int = 0) -> List[PropertyResult]:
    """G-conv layers against nested-loop summation, conv2d against a direct loop."""
    rng = np.random.default_rng(seed)
    worst = {"p4conv_z2": 0.0, "p4conv_p4": 0.0, "conv2d": 0.0}
    with precision("float64"):
        for case in range(cases):
            size = int(rng.integers(3, 7))
            kernel = int(rng.choice([1, 3, 5]))
            c_in, k_out = int(rng.integers(1, 3)), int(rng.integers(1, 3))
            n = 1 + case % 2

            x = rng.standard_normal((n, c_in, size, size))
            psi = _random_filter(rng, k_out, c_in, 1, kernel, np.float64)
            got = p4conv_z2(Tensor(x), psi).data
            want = g_conv_oracle(x, psi.weight.data, P4_FROM_Z2, psi.bias.data)
            worst["p4conv_z2"] = max(worst["p4conv_z2"], np.abs(got - want).max())

            f = rng.standard_normal((n, c_in, 4, size, size))
            psi = _random_filter(rng, k_out, c_in, 4, kernel, np.float64)
            got = p4conv_p4(Tensor(f), psi).data
            want = g_conv_oracle(f, psi.weight.data, P4_FROM_P4, psi.bias.data)
            worst["p4conv_p4"] = max(worst["p4conv_p4"], np.abs(got - want).max())

            w = rng.standard_normal((k_out, c_in, kernel, kernel))
            b = rng.standard_normal(k_out)
            stride = 1 + case % 2
            pad = kernel // 2
            if (size + 2 * pad - kernel) % stride:
                stride = 1
            got = conv2d(Tensor(x), Tensor(w), Tensor(b), stride=stride, padding=pad).data
            want = conv2d_direct(x, w, b, stride=stride, padding=pad)
            worst["conv2d"] = max(worst["conv2d"], np.abs(got - want).max())

    return [
        _within(f"{name} matches direct summation over {cases} cases", dev, ORACLE_TOL)
        for name, dev in worst.items()
    ]


SUITES: Dict[str, Callable[[], List[PropertyResult]]] = {
    "equivariance": equivariance_both_precisions,
    "gradcheck": gradcheck_suite,
    "params": params_suite,
    "oracle": oracle_suite,
}


def run_suite(name: str) -> List[PropertyResult]:
    if name == "all":
        return [result for suite in SUITES.values() for result in suite()]
    try:
        suite = SUITES[name]
    except KeyError:
        choices = ", ".join(SUITES)
        raise ConfigurationError(f"unknown suite {name!r}; choose from {choices} or all") from None
    logger.info("running %s suite", name)
    return suite()
