import numpy as np

from ..schemas.config import AugmentConfig
from ..utils import image_ops
from .Rng import Rng


class Augmenter:
    """Random training-time transforms for one normalised (C, H, W) image.

    Applied in a fixed order: horizontal flip, vertical flip, rotation, brightness
    shift, center zoom; then the result is clamped to the per-channel range of
    normalised pixels. Every call draws exactly five values from the stream, whether
    or not a transform fires.
    """

    def __init__(self, config: AugmentConfig, bounds: tuple[np.ndarray, np.ndarray] | None = None):
        self.config = config
        self.bounds = bounds

    def __call__(self, image: np.ndarray, rng: Rng) -> np.ndarray:
        c = self.config
        flip_h = rng.uniform(0.0, 1.0) < c.flip_horizontal
        flip_v = rng.uniform(0.0, 1.0) < c.flip_vertical
        angle = rng.uniform(-c.max_rotation_deg, c.max_rotation_deg)
        delta = rng.uniform(-c.brightness_delta, c.brightness_delta)
        zoom = rng.uniform(0.0, c.zoom_max)

        out = image
        if flip_h:
            out = image_ops.flip_horizontal(out)
        if flip_v:
            out = image_ops.flip_vertical(out)
        if angle != 0:
            out = image_ops.rotate(out, angle)
        if delta != 0:
            out = image_ops.shift_brightness(out, delta)
        if zoom != 0:
            out = image_ops.center_zoom(out, zoom)
        return self.clamp(out)

    def clamp(self, image: np.ndarray) -> np.ndarray:
        if self.bounds is None:
            return image
        low, high = self.bounds
        return np.clip(image, low.reshape(-1, 1, 1), high.reshape(-1, 1, 1)).astype(image.dtype, copy=False)


def augment(
    image: np.ndarray,
    config: AugmentConfig,
    rng: Rng,
    bounds: tuple[np.ndarray, np.ndarray] | None = None,
) -> np.ndarray:
    """One-shot form of Augmenter for a single image."""
    return Augmenter(config, bounds)(image, rng)
