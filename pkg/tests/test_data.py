import hashlib
import math

import numpy as np
import pytest
from PIL import Image

from sdsen.data import (
    MANIFEST_NAME,
    assign_splits,
    blur_along,
    gen_dataset,
    load_image,
    load_manifest,
    make_streak_spec,
    procedural_background,
    rasterize_streak,
    sample_angles,
    save_image,
    streak_direction,
    synth_rain,
)
from sdsen.data.images import to_bytes
from sdsen.errors import ConfigurationError, DataError


def naive_streak(height, width, center, angle, length, thickness, intensity):
    """Per-pixel distance to the segment, no vectorisation or bounding box."""
    theta = math.radians(angle)
    dr, dc = math.cos(theta), -math.sin(theta)
    half = length / 2.0
    a = (center[0] - half * dr, center[1] - half * dc)
    b = (center[0] + half * dr, center[1] + half * dc)
    plane = np.zeros((height, width))
    for r in range(height):
        for c in range(width):
            seg_r, seg_c = b[0] - a[0], b[1] - a[1]
            denom = seg_r * seg_r + seg_c * seg_c
            t = 0.0 if denom == 0 else ((r - a[0]) * seg_r + (c - a[1]) * seg_c) / denom
            t = min(max(t, 0.0), 1.0)
            dist = math.hypot(r - (a[0] + t * seg_r), c - (a[1] + t * seg_c))
            plane[r, c] = intensity * min(max(thickness / 2.0 + 0.5 - dist, 0.0), 1.0)
    return plane


def principal_angle(plane):
    """Orientation of the intensity-weighted principal axis, degrees from vertical."""
    rows, cols = np.mgrid[0 : plane.shape[0], 0 : plane.shape[1]].astype(np.float64)
    weight = plane / plane.sum()
    mr, mc = (weight * rows).sum(), (weight * cols).sum()
    dr, dc = rows - mr, cols - mc
    src = (weight * dr * dc).sum()
    cov = np.array([[(weight * dr * dr).sum(), src], [src, (weight * dc * dc).sum()]])
    _, vectors = np.linalg.eigh(cov)
    vr, vc = vectors[:, -1]
    if vr < 0:
        vr, vc = -vr, -vc
    return math.degrees(math.atan2(-vc, vr))


def directory_digest(path):
    digest = hashlib.sha256()
    for file in sorted(path.iterdir()):
        digest.update(file.name.encode())
        digest.update(file.read_bytes())
    return digest.hexdigest()


# images


def test_black_png_loads_as_zeros(tmp_path):
    path = tmp_path / "black.png"
    Image.new("RGB", (4, 3)).save(path)
    image = load_image(path)
    assert image.shape == (3, 3, 4)
    assert image.dtype == np.float32
    assert not image.any()


def test_full_byte_is_one(tmp_path):
    path = tmp_path / "white.png"
    Image.new("RGB", (2, 2), (255, 255, 255)).save(path)
    assert np.all(load_image(path) == 1.0)


def test_grayscale_is_converted(tmp_path):
    path = tmp_path / "gray.png"
    Image.new("L", (2, 2), 51).save(path)
    np.testing.assert_allclose(load_image(path), np.full((3, 2, 2), 0.2), rtol=1e-6)


def test_byte_round_trip_is_exact(tmp_path, rng):
    pixels = rng.integers(0, 256, size=(3, 5, 7)).astype(np.float32) / np.float32(255.0)
    path = save_image(pixels, tmp_path / "sub" / "x.png")
    np.testing.assert_array_equal(load_image(path), pixels)


def test_save_clamps():
    out = to_bytes(np.array([[[-0.2, 1.3, 0.0]]] * 3))
    np.testing.assert_array_equal(out[0, :, 0], [0, 255, 0])


def test_unreadable_image(tmp_path):
    path = tmp_path / "bad.png"
    path.write_bytes(b"not a png")
    with pytest.raises(DataError, match="bad.png"):
        load_image(path)
    with pytest.raises(DataError):
        save_image(np.zeros((4, 4)), tmp_path / "flat.png")


# streaks


def test_streak_direction_convention():
    assert streak_direction(0.0) == pytest.approx((1.0, 0.0))
    # positive angles lean the lower end to the left
    dr, dc = streak_direction(30.0)
    assert dr > 0 and dc < 0


@pytest.mark.parametrize("angle", [0.0, 20.0, -45.0])
def test_rasterizer_matches_naive_oracle(angle):
    args = (24, 24, (11.3, 12.6), angle, 10.0, 1.5, 0.5)
    np.testing.assert_allclose(rasterize_streak(*args), naive_streak(*args), atol=1e-12)


def test_vertical_streak_is_a_column_band():
    plane = rasterize_streak(20, 20, (10.0, 10.0), 0.0, 8.0, 1.0, 0.5)
    columns = np.flatnonzero(plane.sum(axis=0))
    assert columns.tolist() == [10]
    assert plane.max() == pytest.approx(0.5)
    assert abs(plane.sum() - naive_streak(20, 20, (10.0, 10.0), 0.0, 8.0, 1.0, 0.5).sum()) < 1e-6


def test_zero_streaks_leave_background(rng):
    clean = procedural_background(16, rng)
    pair = synth_rain(clean, make_streak_spec(count=(0, 0)), seed=1)
    assert pair.meta.count == 0
    assert not pair.rain.any()
    np.testing.assert_array_equal(pair.rainy, pair.clean)


def test_same_seed_same_pair(rng):
    clean = procedural_background(16, rng)
    spec = make_streak_spec(motion_blur=3)
    a, b = synth_rain(clean, spec, seed=5), synth_rain(clean, spec, seed=5)
    np.testing.assert_array_equal(a.rainy, b.rainy)
    np.testing.assert_array_equal(a.rain, b.rain)
    assert a.meta == b.meta
    assert not np.array_equal(a.rain, synth_rain(clean, spec, seed=6).rain)


@pytest.mark.parametrize("seed", range(3))
def test_additive_model_holds(rng, seed):
    clean = procedural_background(24, rng)
    pair = synth_rain(clean, make_streak_spec(count=(40, 80), intensity=(0.6, 1.0)), seed=seed)
    assert pair.rain.min() >= 0.0 and pair.rain.max() <= 1.0
    np.testing.assert_array_equal(pair.rainy, np.clip(pair.clean + pair.rain, 0.0, 1.0))
    assert np.all(pair.residual <= pair.rain + 1e-6)


def test_single_vertical_streak_on_black():
    spec = make_streak_spec(count=(1, 1), angles=[0.0], width=(1.0, 1.0), intensity=(0.5, 0.5))
    pair = synth_rain(np.zeros((3, 32, 32), dtype=np.float32), spec, seed=3)
    assert pair.meta.angles == [0.0]
    columns = np.flatnonzero(pair.rain[0].sum(axis=0))
    assert 1 <= len(columns) <= 3
    assert pair.rain.max() <= 0.5 + 1e-7


def test_blur_follows_the_streak_slope():
    streak = rasterize_streak(48, 48, (24.0, 24.0), 30.0, 12.0, 1.0, 0.8)
    blurred = blur_along(streak, 9, 30.0)
    assert abs(principal_angle(streak) - 30.0) < 2.0
    assert abs(principal_angle(blurred) - 30.0) < 3.0
    assert blurred.sum() == pytest.approx(streak.sum())
    # smearing along another direction turns the axis away from the streak
    assert abs(principal_angle(blur_along(streak, 9, -30.0)) - 30.0) > 5.0
    assert blur_along(streak, 1, 30.0) is streak


@pytest.mark.parametrize("seed", range(3))
def test_each_streak_is_blurred_along_its_own_angle(seed):
    spec = make_streak_spec(count=(6, 6), angles=[30.0, -30.0], motion_blur=5)
    pair = synth_rain(np.zeros((3, 40, 40), dtype=np.float32), spec, seed=seed)
    meta = pair.meta
    assert len(meta.centers) == 6
    expected = np.zeros((40, 40))
    streaks = zip(meta.centers, meta.angles, meta.lengths, meta.widths, meta.intensities)
    for center, angle, length, width, intensity in streaks:
        plane = rasterize_streak(40, 40, center, angle, length, width, intensity)
        expected += blur_along(plane, 5, angle)
    np.testing.assert_allclose(pair.rain[0], np.clip(expected, 0.0, 1.0), atol=1e-6)


def test_angle_sampler_statistics():
    rng = np.random.default_rng(0)
    spec = make_streak_spec(angle_range=(-10.0, 30.0))
    assert abs(sample_angles(spec, 1000, rng).mean() - 10.0) < 2.0
    fixed = make_streak_spec(angles=[-20.0, 0.0, 40.0])
    drawn = sample_angles(fixed, 1000, rng)
    assert set(drawn.tolist()) <= {-20.0, 0.0, 40.0}
    assert abs(drawn.mean() - 20.0 / 3.0) < 3.0


@pytest.mark.parametrize(
    "values",
    [
        {"count": (5, 2)},
        {"intensity": (0.5, 1.5)},
        {"angles": [95.0]},
        {"width": (0.0, 1.0)},
        {"density": 3},
    ],
)
def test_invalid_streak_spec(values):
    with pytest.raises(ConfigurationError):
        make_streak_spec(**values)


def test_background_checks():
    spec = make_streak_spec()
    with pytest.raises(ConfigurationError):
        synth_rain(np.full((3, 8, 8), 1.5, dtype=np.float32), spec, seed=0)
    with pytest.raises(DataError):
        synth_rain(np.zeros((8, 8), dtype=np.float32), spec, seed=0)


def test_procedural_background_range():
    image = procedural_background(20, np.random.default_rng(2))
    assert image.shape == (3, 20, 20)
    assert image.min() >= 0.0 and image.max() <= 1.0
    assert image.std() > 0


# datasets


def test_empty_dataset(tmp_path):
    manifest = gen_dataset(0, 16, make_streak_spec(), seed=0, out_dir=tmp_path)
    assert manifest.entries == []
    assert load_manifest(tmp_path / MANIFEST_NAME).entries == []


def test_dataset_files_and_reload(tmp_path):
    manifest = gen_dataset(8, 32, make_streak_spec(), seed=1, out_dir=tmp_path)
    assert len(list(tmp_path.glob("*.png"))) == 16
    reloaded = load_manifest(manifest.path)
    assert reloaded.entries == manifest.entries
    pairs = reloaded.load_pairs("train")
    assert len(pairs) == 8
    assert all(r.shape == (3, 32, 32) and c.shape == r.shape for r, c in pairs)
    assert manifest.path.read_text(encoding="utf-8").startswith("# streak angles")


def test_dataset_is_deterministic(tmp_path):
    spec = make_streak_spec(count=(5, 10))
    gen_dataset(3, 16, spec, seed=4, out_dir=tmp_path / "a")
    gen_dataset(3, 16, spec, seed=4, out_dir=tmp_path / "b")
    gen_dataset(3, 16, spec, seed=5, out_dir=tmp_path / "c")
    assert directory_digest(tmp_path / "a") == directory_digest(tmp_path / "b")
    assert directory_digest(tmp_path / "a") != directory_digest(tmp_path / "c")


def test_user_backgrounds(tmp_path):
    background = np.full((3, 12, 12), 0.25, dtype=np.float32)
    spec = make_streak_spec(count=(0, 0))
    manifest = gen_dataset(2, 99, spec, seed=0, out_dir=tmp_path, backgrounds=[background])
    rainy, clean = manifest.load_pairs("train")[1]
    assert clean.shape == (3, 12, 12)
    np.testing.assert_allclose(clean, 64 / 255.0, rtol=1e-6)


def test_splits(tiny_dataset):
    assert [e.split for e in tiny_dataset.entries] == ["train", "train", "val", "test"]
    assert len(tiny_dataset.split("val")) == 1
    assert assign_splits(3) == ["train"] * 3
    with pytest.raises(DataError):
        assign_splits(2, val=2, test=1)


def test_manifest_errors(tmp_path, tiny_dataset):
    bad = tmp_path / "bad.txt"
    bad.write_text("only-one-field\n", encoding="utf-8")
    with pytest.raises(DataError, match="bad.txt:1"):
        load_manifest(bad)

    root = tiny_dataset.root
    missing = root / "missing.txt"
    missing.write_text("# note\nrain_0000.png\tnope.png\ttrain\n", encoding="utf-8")
    with pytest.raises(DataError, match="missing file"):
        load_manifest(missing)
    assert len(load_manifest(missing, check_files=False).entries) == 1

    save_image(np.zeros((3, 5, 5), dtype=np.float32), root / "small.png")
    mismatched = root / "mismatch.txt"
    mismatched.write_text("rain_0000.png\tsmall.png\ttest\n", encoding="utf-8")
    with pytest.raises(DataError, match="differ in size"):
        load_manifest(mismatched)

    with pytest.raises(DataError):
        load_manifest(tmp_path / "absent.txt")
