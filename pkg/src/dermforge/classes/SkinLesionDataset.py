import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np
from tqdm import tqdm

from ..schemas.records import MetadataRecord, NormalizationStats, Sample
from ..utils.constants import IMAGE_SIZE, LOGGER_NAME, TRAINING_DTYPE
from ..utils.enums import ClassLabel, Split
from ..utils.exceptions import ArgumentError
from ..utils.images import decode_and_resize, default_image_dirs, find_image_paths
from ..utils.initialize_logic import resolve_thread_count
from ..utils.metadata import split_ids

logger = logging.getLogger(LOGGER_NAME)


class SkinLesionDataset:
    """Decoded 28x28 images with labels and a seeded train/validation assignment.

    Images are stored scaled to [0, 1]; `normalized` standardises them with per-channel
    statistics computed over the training split only.
    """

    def __init__(
        self,
        images: np.ndarray,
        labels: np.ndarray,
        image_ids: Sequence[str],
        val_fraction: float,
        seed: int,
        records: Sequence[MetadataRecord] | None = None,
    ):
        if len(images) == 0:
            raise ArgumentError("Dataset is empty")
        if not len(images) == len(labels) == len(image_ids):
            raise ArgumentError("images, labels and image_ids must have equal lengths")
        if len(set(image_ids)) != len(image_ids):
            raise ArgumentError("image_ids must be unique")
        self.images = images.astype(TRAINING_DTYPE, copy=False)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.image_ids = list(image_ids)
        self.records = list(records) if records is not None else None
        self.seed = seed
        self.val_fraction = val_fraction

        train_ids, val_ids = split_ids(self.image_ids, val_fraction, seed)
        position = {image_id: index for index, image_id in enumerate(self.image_ids)}
        self.train_indices = np.array(sorted(position[i] for i in train_ids), dtype=np.int64)
        self.val_indices = np.array(sorted(position[i] for i in val_ids), dtype=np.int64)
        if len(self.train_indices) == 0:
            raise ArgumentError(
                f"The train split is empty: {len(images)} images with val_fraction {val_fraction} leave none for training"
            )
        self.normalization = self._training_statistics()

    @classmethod
    def from_metadata(
        cls,
        records: Sequence[MetadataRecord],
        data_dir: str | Path,
        val_fraction: float,
        seed: int,
        threads: int | None = None,
    ) -> "SkinLesionDataset":
        """Decode every record's image found under `data_dir` (and its HAM10000 part folders).

        Records whose image file is missing are skipped with a warning.
        """
        paths = find_image_paths(default_image_dirs(data_dir))
        present = [r for r in records if r.image_id in paths]
        if len(present) < len(records):
            logger.warning(f"{len(records) - len(present)} metadata records have no image under {data_dir}")
        if not present:
            raise ArgumentError(f"No images for the metadata records were found under {data_dir}")

        workers = resolve_thread_count(threads)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            decoded = list(tqdm(
                pool.map(lambda r: decode_and_resize(paths[r.image_id], IMAGE_SIZE), present),
                total=len(present), desc="Decoding images", unit="img", disable=None,
            ))
        logger.info(f"Decoded {len(decoded)} images with {workers} workers")
        return cls(
            images=np.stack(decoded),
            labels=np.array([r.label.value for r in present]),
            image_ids=[r.image_id for r in present],
            val_fraction=val_fraction,
            seed=seed,
            records=present,
        )

    def _training_statistics(self) -> NormalizationStats:
        train = self.images[self.train_indices].astype(np.float64)
        mean = train.mean(axis=(0, 2, 3))
        std = np.maximum(train.std(axis=(0, 2, 3)), 1e-6)
        return NormalizationStats(mean=tuple(float(m) for m in mean), std=tuple(float(s) for s in std))

    def indices(self, which: Split | str) -> np.ndarray:
        return self.train_indices if Split(which) is Split.TRAIN else self.val_indices

    def normalized(self, indices: np.ndarray, stats: NormalizationStats | None = None) -> np.ndarray:
        return (stats or self.normalization).apply(self.images[indices]).astype(TRAINING_DTYPE, copy=False)

    def sample(self, index: int) -> Sample:
        return Sample(
            image=self.normalized(np.array([index]))[0],
            label=ClassLabel(int(self.labels[index])),
            image_id=self.image_ids[index],
        )

    def __len__(self) -> int:
        return len(self.images)
