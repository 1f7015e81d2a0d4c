"""Geometric and photometric transforms on channels-first (C, H, W) images."""
import math

import numpy as np
from scipy import ndimage


def _affine(image: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Inverse-map every output pixel through `matrix` about the image center.

    Bilinear sampling; coordinates outside the image take the nearest edge value.
    """
    _, h, w = image.shape
    center = np.array([(h - 1) / 2.0, (w - 1) / 2.0])
    offset = center - matrix @ center
    out = np.empty_like(image)
    for channel in range(image.shape[0]):
        out[channel] = ndimage.affine_transform(
            image[channel].astype(np.float64), matrix, offset=offset, order=1, mode="nearest"
        )
    return out


def flip_horizontal(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(image[:, :, ::-1])


def flip_vertical(image: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(image[:, ::-1, :])


def rotate(image: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rotate about the center by `angle_deg`; positive angles turn the image clockwise as displayed."""
    if angle_deg == 0:
        return image.copy()
    theta = math.radians(angle_deg)
    cos, sin = math.cos(theta), math.sin(theta)
    # output (row, col) -> input (row, col); rows grow downwards
    matrix = np.array([[cos, -sin], [sin, cos]])
    return _affine(image, matrix)


def center_zoom(image: np.ndarray, fraction: float) -> np.ndarray:
    """Crop the central (1 - fraction) region and resample it back to full size."""
    if fraction == 0:
        return image.copy()
    scale = 1.0 - fraction
    return _affine(image, np.diag([scale, scale]))


def shift_brightness(image: np.ndarray, delta: float) -> np.ndarray:
    return image + image.dtype.type(delta)
