"""Image container and PNG round-trip behavior."""

import os

import numpy as np
import pytest
from PIL import Image as PILImage

from fuzzysteg.errors import DimensionMismatchError, UnsupportedFormatError
from fuzzysteg.imaging import Image, load_png, mse, save_png


def test_load_zero_rgb(tmp_path):
    path = tmp_path / "zero.png"
    PILImage.fromarray(np.zeros((2, 2, 3), dtype=np.uint8)).save(path)
    img = load_png(path)
    assert (img.height, img.width, img.channels) == (2, 2, 3)
    assert img.samples.sum() == 0


def test_round_trip_random(tmp_path, rgb_random):
    path = tmp_path / "rt.png"
    save_png(rgb_random, path)
    again = load_png(path)
    assert np.array_equal(again.samples, rgb_random.samples)


def test_round_trip_gray(tmp_path, gray_random):
    path = tmp_path / "gray.png"
    save_png(gray_random, path)
    again = load_png(path)
    assert again.channels == 1
    assert np.array_equal(again.samples, gray_random.samples)


def test_one_by_one(tmp_path):
    img = Image(np.array([[[7]]], dtype=np.uint8))
    path = tmp_path / "tiny.png"
    save_png(img, path)
    assert np.array_equal(load_png(path).samples, img.samples)


def test_truncated_file_rejected(tmp_path, rgb_random):
    path = tmp_path / "trunc.png"
    save_png(rgb_random, path)
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(UnsupportedFormatError):
        load_png(path)


def test_not_a_png_rejected(tmp_path):
    path = tmp_path / "fake.png"
    path.write_bytes(b"definitely not a png")
    with pytest.raises(UnsupportedFormatError):
        load_png(path)


def test_missing_file_raises_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_png(tmp_path / "missing.png")


def test_alpha_rejected(tmp_path):
    arr = np.zeros((4, 4, 4), dtype=np.uint8)
    path = tmp_path / "alpha.png"
    PILImage.fromarray(arr, mode="RGBA").save(path)
    with pytest.raises(UnsupportedFormatError):
        load_png(path)


def test_palette_converted_to_rgb(tmp_path):
    rng = np.random.default_rng(0)
    base = PILImage.fromarray(rng.integers(0, 256, (8, 8, 3), dtype=np.uint8))
    pal = base.convert("P", palette=PILImage.Palette.ADAPTIVE)
    path = tmp_path / "pal.png"
    pal.save(path)
    img = load_png(path)
    assert img.channels == 3
    assert np.array_equal(img.samples, np.asarray(pal.convert("RGB")))


def test_16bit_gray_converted(tmp_path):
    arr16 = (np.arange(16, dtype=np.uint16).reshape(4, 4) * 4096)
    path = tmp_path / "deep.png"
    PILImage.fromarray(arr16, mode="I;16").save(path)
    img = load_png(path)
    assert img.channels == 3
    assert np.array_equal(img.samples[:, :, 0], (arr16 >> 8).astype(np.uint8))


def test_save_unwritable_path_raises_oserror(tmp_path, rgb_random):
    ro_dir = tmp_path / "ro"
    ro_dir.mkdir()
    os.chmod(ro_dir, 0o500)
    try:
        with pytest.raises(OSError):
            save_png(rgb_random, ro_dir / "x.png")
    finally:
        os.chmod(ro_dir, 0o700)


def test_mse_identical_zero(rgb_random):
    assert mse(rgb_random, rgb_random) == 0.0


def test_mse_constant_offset():
    a = Image(np.zeros((4, 4, 3), dtype=np.uint8))
    b = Image(np.ones((4, 4, 3), dtype=np.uint8))
    assert mse(a, b) == 1.0


def test_mse_maximal():
    a = Image(np.zeros((4, 4, 3), dtype=np.uint8))
    b = Image(np.full((4, 4, 3), 255, dtype=np.uint8))
    assert mse(a, b) == 65025.0


def test_mse_symmetric_nonnegative(rgb_random):
    rng = np.random.default_rng(5)
    other = Image(rng.integers(0, 256, rgb_random.samples.shape, dtype=np.uint8))
    assert mse(rgb_random, other) == mse(other, rgb_random) > 0


def test_mse_dimension_mismatch(rgb_random, gray_random):
    with pytest.raises(DimensionMismatchError):
        mse(rgb_random, gray_random)


def test_image_validation():
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        Image(np.zeros((4, 4, 3), dtype=np.int16))


def test_samples_immutable(rgb_random):
    with pytest.raises(ValueError):
        rgb_random.samples[0, 0, 0] = 1
