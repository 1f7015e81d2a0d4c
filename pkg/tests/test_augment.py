import numpy as np
import pytest

from dermforge.classes.Augmenter import Augmenter, augment
from dermforge.classes.Rng import Rng
from dermforge.schemas.config import AugmentConfig
from dermforge.utils import image_ops


@pytest.fixture
def image() -> np.ndarray:
    return Rng(0).uniform(0.0, 1.0, (3, 28, 28), np.float32)


def test_same_key_gives_the_same_augmentation(image):
    a = augment(image, AugmentConfig(), Rng(1, (3, 2, 17)))
    b = augment(image, AugmentConfig(), Rng(1, (3, 2, 17)))
    c = augment(image, AugmentConfig(), Rng(1, (3, 2, 18)))
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_disabled_config_is_the_identity(image):
    out = Augmenter(AugmentConfig.disabled())(image, Rng(4))
    np.testing.assert_array_equal(out, image)


def test_every_call_draws_five_values(image):
    rng, reference = Rng(8), Rng(8)
    Augmenter(AugmentConfig.disabled())(image, rng)
    for _ in range(5):
        reference.uniform(0.0, 1.0)
    np.testing.assert_array_equal(rng.random(3), reference.random(3))


def test_output_is_clamped_to_the_normalised_pixel_range(image):
    low, high = np.array([-0.2, -0.2, -0.2]), np.array([0.9, 0.9, 0.9])
    config = AugmentConfig(flip_horizontal=0, flip_vertical=0, max_rotation_deg=0, brightness_delta=0.5, zoom_max=0)
    for key in range(5):
        out = augment(image, config, Rng(2, (key,)), bounds=(low, high))
        assert out.min() >= -0.2 - 1e-7 and out.max() <= 0.9 + 1e-7
        assert out.dtype == image.dtype


def test_flips_are_involutions(image):
    np.testing.assert_array_equal(image_ops.flip_horizontal(image_ops.flip_horizontal(image)), image)
    np.testing.assert_array_equal(image_ops.flip_vertical(image)[:, 0], image[:, -1])
    np.testing.assert_array_equal(image_ops.flip_horizontal(image)[:, :, 0], image[:, :, -1])


def test_quarter_turn_matches_array_rotation(image):
    np.testing.assert_allclose(image_ops.rotate(image, 90.0), np.rot90(image, k=-1, axes=(1, 2)), atol=1e-5)
    np.testing.assert_array_equal(image_ops.rotate(image, 0.0), image)


def test_zoom_and_rotation_preserve_constant_images():
    flat = np.full((3, 28, 28), 0.4, dtype=np.float32)
    np.testing.assert_allclose(image_ops.center_zoom(flat, 0.1), 0.4, atol=1e-6)
    np.testing.assert_allclose(image_ops.rotate(flat, 12.0), 0.4, atol=1e-6)


def test_center_zoom_magnifies_about_the_center():
    image = np.zeros((1, 28, 28), dtype=np.float32)
    image[0, 13:15, 13:15] = 1.0
    zoomed = image_ops.center_zoom(image, 0.5)
    # the bright square doubles in size and stays centred
    assert zoomed[0].sum() > 2.0 * image[0].sum()
    np.testing.assert_allclose(zoomed[0], zoomed[0][::-1, ::-1], atol=1e-6)


def test_brightness_shift_adds_delta(image):
    np.testing.assert_allclose(image_ops.shift_brightness(image, 0.1), image + 0.1, atol=1e-7)


def test_rotation_limit_is_validated():
    with pytest.raises(ValueError):
        AugmentConfig(max_rotation_deg=270.0)


def test_half_turn_point_reflects_a_two_by_two_image():
    checker = np.array([[[1.0, 0.0], [0.0, 1.0]]], dtype=np.float32)
    np.testing.assert_allclose(image_ops.rotate(checker, 180.0), checker, atol=1e-6)
    ramp = np.array([[[1.0, 2.0], [3.0, 4.0]]], dtype=np.float32)
    np.testing.assert_allclose(image_ops.rotate(ramp, 180.0), [[[4.0, 3.0], [2.0, 1.0]]], atol=1e-6)


def centred_grid(size: int = 28) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.mgrid[0:size, 0:size].astype(np.float64)
    centre = (size - 1) / 2.0
    return rows - centre, cols - centre


def test_rotation_round_trip_loses_little():
    rows, cols = centred_grid()
    blob = np.exp(-((rows - 2.0) ** 2 + (cols + 3.0) ** 2) / (2 * 5.0 ** 2))
    image = np.stack([blob, 0.5 * blob, blob ** 2]).astype(np.float32)
    for angle in (7.0, 15.0):
        restored = image_ops.rotate(image_ops.rotate(image, angle), -angle)
        assert np.abs(restored - image).mean() <= 0.05


def test_rotating_a_disk_keeps_its_mass():
    rows, cols = centred_grid()
    disk = (np.hypot(rows, cols) <= 8.0).astype(np.float32)[np.newaxis]
    ratio = image_ops.rotate(disk, 15.0).sum() / disk.sum()
    assert abs(ratio - 1.0) <= 0.02


def test_brightness_jitter_is_unbiased(image):
    config = AugmentConfig(flip_horizontal=0, flip_vertical=0, max_rotation_deg=0, brightness_delta=0.1, zoom_max=0)
    shifted = image + 1.0
    means = [augment(shifted, config, Rng(6, (key,))).mean() for key in range(1000)]
    assert abs(np.mean(means) - shifted.mean()) <= 0.01 * shifted.mean()
