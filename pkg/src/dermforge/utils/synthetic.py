"""Seeded 7-class blob images written in the HAM10000 layout, for runs without the real data."""
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from PIL import Image

from ..classes.Rng import Rng
from .artifacts import atomic_write_text
from .constants import CLASS_CODES, IMAGE_SIZE, LOGGER_NAME, METADATA_COLUMNS

logger = logging.getLogger(LOGGER_NAME)

# one RGB colour per class, far apart in colour space
CLASS_COLOURS = np.array([
    [0.85, 0.20, 0.20],
    [0.20, 0.75, 0.25],
    [0.20, 0.30, 0.85],
    [0.85, 0.80, 0.20],
    [0.75, 0.25, 0.80],
    [0.55, 0.35, 0.20],
    [0.20, 0.80, 0.80],
])


def blob_image(label: int, rng: Rng, size: int = IMAGE_SIZE) -> np.ndarray:
    """A soft disc in the class colour at a class-specific position, on a noisy skin-tone field."""
    angle = 2.0 * np.pi * label / len(CLASS_CODES)
    center = size / 2 + size / 4 * np.array([np.cos(angle), np.sin(angle)]) + rng.uniform(-1.5, 1.5, 2)
    radius = size / 6 * rng.uniform(0.85, 1.15)
    yy, xx = np.mgrid[0:size, 0:size]
    weight = np.exp(-((yy - center[0]) ** 2 + (xx - center[1]) ** 2) / (2.0 * radius ** 2))
    background = np.array([0.80, 0.62, 0.52])[:, None, None]
    image = background * (1.0 - weight) + CLASS_COLOURS[label][:, None, None] * weight
    image = image + rng.normal(0.0, 0.03, (3, size, size))
    return np.clip(image, 0.0, 1.0).astype(np.float32)


def generate_blobs(per_class: int, seed: int, size: int = IMAGE_SIZE) -> tuple[np.ndarray, np.ndarray]:
    """Balanced images (N, 3, size, size) in [0, 1] and their labels, class-major order."""
    labels = np.repeat(np.arange(len(CLASS_CODES)), per_class)
    root = Rng(seed)
    images = np.stack([blob_image(int(label), root.child(i), size) for i, label in enumerate(labels)])
    return images, labels


def write_synthetic_dataset(out_dir: str | Path, per_class: int = 10, seed: int = 0) -> Path:
    """Write PNG images and a HAM10000-style metadata CSV under `out_dir`.

    Returns:
        Path of the metadata file
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    images, labels = generate_blobs(per_class, seed)
    rows = []
    for i, (image, label) in enumerate(zip(images, labels)):
        image_id = f"ISIC_{i:07d}"
        pixels = np.round(image.transpose(1, 2, 0) * 255.0).astype(np.uint8)
        Image.fromarray(pixels).save(out_dir / f"{image_id}.png")
        rows.append({
            "lesion_id": f"HAM_{i:07d}",
            "image_id": image_id,
            "dx": CLASS_CODES[label],
            "dx_type": "synthetic",
            "age": float(20 + 5 * (i % 12)),
            "sex": "female" if i % 2 else "male",
            "localization": "back",
        })
    metadata_path = out_dir / "HAM10000_metadata.csv"
    atomic_write_text(metadata_path, pd.DataFrame(rows, columns=list(METADATA_COLUMNS)).to_csv(index=False))
    logger.info(f"Wrote {len(rows)} synthetic images and {metadata_path}")
    return metadata_path
