import logging
from collections import deque
from concurrent.futures import Future, ThreadPoolExecutor
from typing import Iterator, NamedTuple

import numpy as np

from ..utils.constants import LOGGER_NAME, STREAM_AUGMENT, STREAM_SHUFFLE
from ..utils.exceptions import ArgumentError
from .Augmenter import Augmenter
from .Rng import Rng

logger = logging.getLogger(LOGGER_NAME)


class Batch(NamedTuple):
    images: np.ndarray
    labels: np.ndarray
    indices: np.ndarray


class BatchProducer:
    """Seeded shuffling and bounded look-ahead preparation of training batches.

    Each epoch visits every index exactly once, in batches of `batch_size` with the final
    partial batch kept. Augmentation randomness is keyed by (epoch, sample index), so the
    batches do not depend on which worker prepares them or when.
    """

    def __init__(
        self,
        images: np.ndarray,
        labels: np.ndarray,
        indices: np.ndarray,
        batch_size: int,
        seed: int,
        augmenter: Augmenter | None = None,
        workers: int = 1,
        prefetch: int = 2,
    ):
        """Initialize the producer.

        Args:
            images: Normalised images (N, C, H, W) addressed by `indices`
            labels: Class index per image
            indices: Dataset positions making up the split to iterate
            batch_size: Samples per batch
            seed: Run seed; shuffle and augmentation streams derive from it
            augmenter: Per-image transform, or None to feed images unchanged
            workers: Preparation threads
            prefetch: Batches prepared ahead of the consumer
        """
        if batch_size < 1:
            raise ArgumentError(f"batch_size must be positive, got {batch_size}")
        if len(indices) == 0:
            raise ArgumentError("Cannot batch an empty split")
        self.images = images
        self.labels = np.asarray(labels, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.batch_size = batch_size
        self.seed = seed
        self.augmenter = augmenter
        self.workers = max(1, workers)
        self.prefetch = max(1, prefetch)

    def __len__(self) -> int:
        return -(-len(self.indices) // self.batch_size)

    def order(self, epoch: int) -> np.ndarray:
        """Dataset positions in this epoch's visiting order."""
        return self.indices[Rng(self.seed).child(STREAM_SHUFFLE, epoch).permutation(len(self.indices))]

    def _prepare(self, epoch: int, chunk: np.ndarray) -> Batch:
        images = self.images[chunk]
        if self.augmenter is not None:
            images = np.stack([
                self.augmenter(image, Rng(self.seed, (STREAM_AUGMENT, epoch, int(index))))
                for image, index in zip(images, chunk)
            ]).astype(self.images.dtype, copy=False)
        return Batch(images=images, labels=self.labels[chunk], indices=chunk)

    def epoch(self, epoch: int) -> Iterator[Batch]:
        """Yield this epoch's batches in order while later ones are prepared in the background."""
        order = self.order(epoch)
        chunks = [order[start:start + self.batch_size] for start in range(0, len(order), self.batch_size)]
        if self.workers == 1:
            for chunk in chunks:
                yield self._prepare(epoch, chunk)
            return

        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            pending: deque[Future] = deque()
            upcoming = iter(chunks)
            for chunk in upcoming:
                pending.append(pool.submit(self._prepare, epoch, chunk))
                if len(pending) >= self.prefetch:
                    break
            while pending:
                batch = pending.popleft().result()
                next_chunk = next(upcoming, None)
                if next_chunk is not None:
                    pending.append(pool.submit(self._prepare, epoch, next_chunk))
                yield batch
