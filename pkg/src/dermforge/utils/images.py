import logging
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image, UnidentifiedImageError

from .constants import IMAGE_EXTENSIONS, IMAGE_SIZE, LOGGER_NAME
from .exceptions import ImageDecodeError

logger = logging.getLogger(LOGGER_NAME)


def decode_and_resize(image_path: str | Path, size: int = IMAGE_SIZE) -> np.ndarray:
    """Decode an image, box-filter it down to size x size and scale to [0, 1].

    Args:
        image_path: Any raster format Pillow can read
        size: Target edge length

    Returns:
        float32 array of shape (3, size, size), channels first

    Raises:
        ImageDecodeError: If the file is missing or cannot be decoded
    """
    try:
        with Image.open(image_path) as image:
            rgb = image.convert("RGB")
            if rgb.size != (size, size):
                rgb = rgb.resize((size, size), Image.Resampling.BOX)
            pixels = np.asarray(rgb, dtype=np.float32)
    except (UnidentifiedImageError, OSError, ValueError) as e:
        raise ImageDecodeError(str(image_path), str(e)) from e
    return np.ascontiguousarray(pixels.transpose(2, 0, 1) / np.float32(255.0))


def find_image_paths(image_dirs: Iterable[str | Path]) -> dict[str, Path]:
    """Map image ids (file stems) to files under one or more image directories."""
    paths: dict[str, Path] = {}
    for directory in image_dirs:
        directory = Path(directory)
        if not directory.is_dir():
            logger.warning(f"Image directory not found: {directory}")
            continue
        for path in sorted(directory.iterdir()):
            if path.suffix.lower() in IMAGE_EXTENSIONS and path.is_file():
                paths.setdefault(path.stem, path)
    return paths


def default_image_dirs(data_dir: str | Path) -> list[Path]:
    """The data directory itself plus the HAM10000 part folders when present."""
    data_dir = Path(data_dir)
    parts = sorted(p for p in data_dir.glob("HAM10000_images_part_*") if p.is_dir())
    return [data_dir, *parts]
