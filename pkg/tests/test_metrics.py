import math

import numpy as np
import pytest

from sdsen.autograd import Tensor
from sdsen.data import gen_dataset, make_streak_spec
from sdsen.errors import DataError, ShapeError
from sdsen.metrics import gaussian_window, psnr, ssim
from sdsen.metrics.evaluate import EvalReport, ImageScore, evaluate, restore, write_report
from sdsen.metrics.quality import format_score
from sdsen.models import build_dsen


def direct_ssim(x, y):
    """Window-by-window SSIM with explicit weighted moments."""
    window = gaussian_window()
    size = window.shape[0]
    c1, c2 = 0.01**2, 0.03**2
    channel_means = []
    for c in range(x.shape[0]):
        values = []
        for i in range(x.shape[1] - size + 1):
            for j in range(x.shape[2] - size + 1):
                px = x[c, i : i + size, j : j + size]
                py = y[c, i : i + size, j : j + size]
                mx, my = np.sum(window * px), np.sum(window * py)
                vx = np.sum(window * (px - mx) ** 2)
                vy = np.sum(window * (py - my) ** 2)
                cov = np.sum(window * (px - mx) * (py - my))
                values.append(
                    ((2 * mx * my + c1) * (2 * cov + c2))
                    / ((mx * mx + my * my + c1) * (vx + vy + c2))
                )
        channel_means.append(np.mean(values))
    return float(np.mean(channel_means))


def zero_model(config):
    model = build_dsen(config)
    for p in model.parameters():
        p.data[...] = 0.0
    return model


# psnr


def test_psnr_of_known_mse():
    x = np.zeros((3, 8, 8))
    assert psnr(x, x + 0.1) == pytest.approx(20.0, abs=1e-9)
    assert psnr(np.zeros((3, 4, 4)), np.ones((3, 4, 4))) == pytest.approx(0.0)


def test_psnr_identical_is_inf(rng):
    x = rng.uniform(0, 1, (3, 5, 5))
    assert math.isinf(psnr(x, x))
    assert format_score(psnr(x, x)) == "inf"


def test_psnr_decreases_with_mse(rng):
    x = rng.uniform(0, 1, (3, 8, 8))
    scores = [psnr(x, x + delta) for delta in (0.01, 0.02, 0.05, 0.1, 0.3)]
    assert all(a > b for a, b in zip(scores, scores[1:]))


def test_psnr_accepts_tensors_and_checks_shape(rng):
    x = rng.uniform(0, 1, (3, 4, 4))
    assert psnr(Tensor(x), x + 0.1) == pytest.approx(20.0, abs=1e-4)
    with pytest.raises(ShapeError):
        psnr(np.zeros((3, 4, 4)), np.zeros((3, 4, 5)))


# ssim


def test_gaussian_window_is_normalised():
    w = gaussian_window()
    assert w.shape == (11, 11)
    assert w.sum() == pytest.approx(1.0)
    assert w[5, 5] == w.max()


def test_ssim_of_identical_images(rng):
    x = rng.uniform(0, 1, (3, 16, 16))
    assert ssim(x, x) == pytest.approx(1.0, abs=1e-12)


def test_ssim_of_constant_images():
    c1 = 0.01**2
    value = ssim(np.zeros((3, 16, 16)), np.ones((3, 16, 16)))
    assert value == pytest.approx(c1 / (1 + c1), rel=1e-6)


def test_ssim_is_symmetric(rng):
    x, y = rng.uniform(0, 1, (2, 3, 20, 20))
    assert abs(ssim(x, y) - ssim(y, x)) < 1e-9


@pytest.mark.parametrize("seed", range(10))
def test_ssim_matches_direct_loop(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 1, (3, 32, 32))
    y = np.clip(x + rng.normal(0, 0.1, x.shape), 0, 1)
    assert abs(ssim(x, y) - direct_ssim(x, y)) < 1e-6


def test_ssim_plane_input_and_size_check(rng):
    x = rng.uniform(0, 1, (12, 12))
    assert ssim(x, x) == pytest.approx(1.0)
    with pytest.raises(ShapeError):
        ssim(np.zeros((3, 10, 16)), np.zeros((3, 10, 16)))


# evaluation


def test_report_text():
    report = EvalReport("ckpt.bin", "test", [ImageScore("a.png", 30.0, 0.9)])
    assert report.to_text() == (
        "# model ckpt.bin split test\n"
        "a.png\t30.000000\t0.900000\n"
        "MEAN\t30.000000\t0.900000\n"
    )


def test_identity_model_on_clean_pairs(tmp_path, tiny_config):
    spec = make_streak_spec(count=(0, 0))
    manifest = gen_dataset(2, 16, spec, seed=0, out_dir=tmp_path, test=2)
    report = evaluate(zero_model(tiny_config), manifest, "test", model_id="identity")
    assert report.mean_ssim == pytest.approx(1.0)
    assert math.isinf(report.mean_psnr)
    assert report.to_text().splitlines()[-1] == "MEAN\tinf\t1.000000"


def test_single_image_split(tiny_dataset, tiny_config):
    report = evaluate(build_dsen(tiny_config, seed=1), tiny_dataset, "val")
    assert len(report.scores) == 1
    assert report.mean_psnr == report.scores[0].psnr
    assert report.mean_ssim == report.scores[0].ssim
    assert report.scores[0].image == "rain_0002.png"


def test_report_is_reproducible(tmp_path, tiny_dataset, tiny_config):
    model = build_dsen(tiny_config, seed=2)
    first = write_report(evaluate(model, tiny_dataset, "train"), tmp_path / "r" / "a.tsv")
    second = write_report(evaluate(model, tiny_dataset, "train"), tmp_path / "r" / "b.tsv")
    assert first.read_text() == second.read_text()


def test_empty_split_is_an_error(tmp_path, tiny_config):
    manifest = gen_dataset(1, 16, make_streak_spec(), seed=0, out_dir=tmp_path)
    with pytest.raises(DataError, match="empty"):
        evaluate(build_dsen(tiny_config), manifest, "test")


def test_restore_clamps(tiny_config, rng):
    model = build_dsen(tiny_config, seed=0)
    model.named_parameters()["stage1/decoder.bias"].data[...] = -5.0
    restored = restore(model, rng.uniform(0, 1, (3, 12, 12)).astype(np.float32))
    assert restored.shape == (3, 12, 12)
    assert restored.min() >= 0.0 and restored.max() <= 1.0
