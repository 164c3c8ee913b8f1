import numpy as np
import pytest

from sdsen.autograd import Tensor, conv2d, gradcheck, leaky_relu
from sdsen.errors import ConfigurationError, ShapeError
from sdsen.gconv import (
    P4_FROM_P4,
    P4_FROM_Z2,
    Z2,
    P4Filter,
    flatten_orientations,
    g_conv_oracle,
    orientation_pool,
    p4conv_p4,
    p4conv_z2,
    rotate_p4_array,
    rotate_p4_filter,
    rotate_plane_90,
    unflatten_orientations,
)
from sdsen.models.layers import P4ConvP4Layer


def random_filter(rng, k_out, k_in, s, k, bias=True):
    weight = Tensor(rng.standard_normal((k_out, k_in, s, k, k)))
    return P4Filter(weight, Tensor(rng.standard_normal(k_out)) if bias else None)


def rotate_image(x, r):
    return np.rot90(x, r, axes=(-2, -1)).copy()


def float32_tol(reference, tol=1e-5):
    return tol * max(1.0, float(np.abs(reference).max()))


# rotations


def test_rotate_plane_zero_is_identity(rng):
    x = Tensor(rng.standard_normal((3, 3)))
    assert rotate_plane_90(x, 0) is x


def test_rotate_plane_corner_tracking():
    x = np.zeros((3, 3))
    x[0, 0] = 1.0
    out = rotate_plane_90(Tensor(x), 1).data
    assert out[2, 0] == 1.0
    assert out.sum() == 1.0


def test_four_single_steps_are_identity(rng):
    x = Tensor(rng.standard_normal((2, 5, 5)))
    y = x
    for _ in range(4):
        y = rotate_plane_90(y, 1)
    np.testing.assert_array_equal(y.data, x.data)


def test_rotate_p4_filter_moves_slice_and_position():
    w = np.zeros((1, 1, 4, 3, 3))
    w[0, 0, 0, 0, 0] = 1.0
    out = rotate_p4_filter(Tensor(w), 1).data
    assert out[0, 0, 1, 2, 0] == 1.0
    assert out.sum() == 1.0


def test_rotate_p4_filter_closure(rng):
    w = Tensor(rng.standard_normal((2, 3, 4, 3, 3)))
    out = w
    for _ in range(4):
        out = rotate_p4_filter(out, 1)
    np.testing.assert_array_equal(out.data, w.data)


def test_p4filter_validation():
    with pytest.raises(ConfigurationError):
        P4Filter(Tensor(np.zeros((1, 1, 2, 3, 3))))
    with pytest.raises(ConfigurationError):
        P4Filter(Tensor(np.zeros((1, 1, 4, 2, 2))))
    with pytest.raises(ShapeError):
        P4Filter(Tensor(np.zeros((2, 1, 4, 3, 3))), Tensor(np.zeros(3)))


# layers


def test_zero_input_gives_bias(rng):
    psi = random_filter(rng, 3, 2, 1, 3)
    out = p4conv_z2(Tensor(np.zeros((1, 2, 4, 4))), psi).data
    expected = np.broadcast_to(psi.bias.data.reshape(1, 3, 1, 1, 1), out.shape)
    np.testing.assert_allclose(out, expected)


def test_lifting_orientation_r_is_conv_with_rotated_filter(float64, rng):
    x = rng.standard_normal((1, 2, 6, 6))
    psi = random_filter(rng, 2, 2, 1, 3)
    out = p4conv_z2(Tensor(x), psi).data
    planar = psi.weight.data[:, :, 0]
    for r in range(4):
        rotated = Tensor(rotate_image(planar, r))
        expected = conv2d(Tensor(x), rotated, psi.bias, padding=1).data
        np.testing.assert_allclose(out[:, :, r], expected, atol=1e-12)


def test_padding_must_preserve_size(rng):
    psi = random_filter(rng, 1, 1, 1, 3)
    with pytest.raises(ConfigurationError):
        p4conv_z2(Tensor(np.zeros((1, 1, 5, 5))), psi, padding=0)


def test_p4conv_p4_rejects_planar_input(rng):
    psi = random_filter(rng, 1, 1, 4, 3)
    with pytest.raises(ShapeError):
        p4conv_p4(Tensor(np.zeros((1, 1, 5, 5))), psi)


def test_flatten_order_is_4k_plus_s(rng):
    x = rng.standard_normal((1, 3, 4, 2, 2))
    flat = flatten_orientations(Tensor(x)).data
    for k in range(3):
        for s in range(4):
            np.testing.assert_array_equal(flat[0, 4 * k + s], x[0, k, s].astype(np.float32))
    np.testing.assert_array_equal(unflatten_orientations(Tensor(flat)).data, x.astype(np.float32))


def test_delta_filter_passes_orientations_through(float64, rng):
    w = np.zeros((1, 1, 4, 3, 3))
    w[0, 0, 0, 1, 1] = 1.0
    x = rng.standard_normal((1, 1, 4, 5, 5))
    out = p4conv_p4(Tensor(x), P4Filter(Tensor(w))).data
    np.testing.assert_allclose(out, x, atol=1e-12)
    oracle = g_conv_oracle(x, w, P4_FROM_P4)
    np.testing.assert_allclose(out, oracle, atol=1e-12)


def test_p4conv_p4_layer_parameter_count(rng):
    layer = P4ConvP4Layer(10, 10, 5, rng)
    assert sum(p.size for p in layer.parameters().values()) == 10010


# equivariance


@pytest.mark.parametrize("r", [1, 2, 3])
def test_lifting_equivariance(rng, r):
    x = rng.standard_normal((2, 3, 7, 7))
    psi = random_filter(rng, 2, 3, 1, 5)
    base = p4conv_z2(Tensor(x), psi).data
    moved = p4conv_z2(Tensor(rotate_image(x, r)), psi).data
    assert np.abs(moved - rotate_p4_array(base, r)).max() < float32_tol(base)


def test_lifting_equivariance_slice_form(rng):
    x = rng.standard_normal((1, 1, 6, 6))
    psi = random_filter(rng, 1, 1, 1, 3)
    base = p4conv_z2(Tensor(x), psi).data
    moved = p4conv_z2(Tensor(rotate_image(x, 1)), psi).data
    for s in range(4):
        np.testing.assert_allclose(
            moved[0, 0, (s + 1) % 4], rotate_image(base[0, 0, s], 1), atol=float32_tol(base)
        )


@pytest.mark.parametrize("r", [1, 2, 3])
def test_group_conv_equivariance_float64(float64, rng, r):
    x = rng.standard_normal((1, 2, 4, 6, 6))
    psi = random_filter(rng, 3, 2, 4, 3)
    base = p4conv_p4(Tensor(x), psi).data
    moved = p4conv_p4(Tensor(rotate_p4_array(x, r)), psi).data
    assert np.abs(moved - rotate_p4_array(base, r)).max() < 1e-10


def test_residual_stack_equivariance(rng):
    x = rng.standard_normal((1, 3, 8, 8))
    lift = random_filter(rng, 2, 3, 1, 3)
    blocks = [random_filter(rng, 2, 2, 4, 3) for _ in range(4)]
    for b in blocks:
        b.weight.data *= 0.2

    def run(image):
        h = leaky_relu(p4conv_z2(Tensor(image), lift))
        for psi in blocks:
            h = leaky_relu(p4conv_p4(h, psi) + h)
        return h.data

    base = run(x)
    for r in (1, 2, 3):
        moved = run(rotate_image(x, r))
        assert np.abs(moved - rotate_p4_array(base, r)).max() < float32_tol(base, 1e-4)


# pooling


def test_pool_of_equal_orientations(rng):
    plane = rng.standard_normal((1, 2, 1, 3, 3))
    x = Tensor(np.repeat(plane, 4, axis=2))
    for mode in ("max", "avg"):
        np.testing.assert_allclose(orientation_pool(x, mode).data, plane[:, :, 0], rtol=1e-6)


def test_pool_of_constant_slices():
    x = Tensor(np.stack([np.full((2, 2), v) for v in (1.0, 2.0, 3.0, 4.0)])[None, None])
    assert np.all(orientation_pool(x, "max").data == 4.0)
    assert np.all(orientation_pool(x, "avg").data == 2.5)


def test_pool_rejects_unknown_mode():
    with pytest.raises(ConfigurationError):
        orientation_pool(Tensor(np.zeros((1, 1, 4, 2, 2))), "median")


@pytest.mark.parametrize("mode", ["max", "avg"])
def test_pooled_lifting_is_rotation_covariant(rng, mode):
    x = rng.standard_normal((1, 2, 6, 6))
    psi = random_filter(rng, 2, 2, 1, 3)
    base = orientation_pool(p4conv_z2(Tensor(x), psi), mode).data
    moved = orientation_pool(p4conv_z2(Tensor(rotate_image(x, 1)), psi), mode).data
    assert np.abs(moved - rotate_image(base, 1)).max() < float32_tol(base)


# oracle


@pytest.mark.parametrize("seed", range(3))
def test_lifting_matches_oracle(float64, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((1, 1, 4, 4))
    psi = random_filter(rng, 1, 1, 1, 3)
    got = p4conv_z2(Tensor(x), psi).data
    want = g_conv_oracle(x, psi.weight.data, P4_FROM_Z2, psi.bias.data)
    assert np.abs(got - want).max() < 1e-6


@pytest.mark.parametrize("seed", range(3))
def test_group_conv_matches_oracle(float64, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((1, 2, 4, 4, 4))
    psi = random_filter(rng, 2, 2, 4, 3)
    got = p4conv_p4(Tensor(x), psi).data
    want = g_conv_oracle(x, psi.weight.data, P4_FROM_P4, psi.bias.data)
    assert np.abs(got - want).max() < 1e-6


def test_oracle_hand_unrolled_case():
    # 1x1 filter: lifting output is the input scaled by the single weight in all orientations
    x = np.arange(9.0).reshape(1, 1, 3, 3)
    psi = np.full((1, 1, 1, 1, 1), 2.0)
    out = g_conv_oracle(x, psi, P4_FROM_Z2)
    for r in range(4):
        np.testing.assert_array_equal(out[0, 0, r], 2.0 * x[0, 0])


def test_oracle_with_trivial_group_is_plain_conv(float64, rng):
    x = rng.standard_normal((1, 2, 5, 5))
    w = rng.standard_normal((3, 2, 3, 3))
    want = conv2d(Tensor(x), Tensor(w), padding=1).data
    got = g_conv_oracle(x, w[:, :, None], Z2)
    np.testing.assert_allclose(got, want, atol=1e-12)


# gradients


@pytest.mark.parametrize("seed", range(2))
def test_gconv_gradcheck(float64, seed):
    rng = np.random.default_rng(seed)
    x = Tensor(rng.standard_normal((1, 2, 4, 4)), requires_grad=True)
    w1 = Tensor(rng.standard_normal((2, 2, 1, 3, 3)), requires_grad=True)
    w2 = Tensor(rng.standard_normal((1, 2, 4, 3, 3)), requires_grad=True)
    b2 = Tensor(rng.standard_normal(1), requires_grad=True)

    def fn(x, w1, w2, b2):
        return p4conv_p4(p4conv_z2(x, P4Filter(w1)), P4Filter(w2, b2))

    assert gradcheck(fn, [x, w1, w2, b2], rng=rng).max_rel_error < 1e-4
