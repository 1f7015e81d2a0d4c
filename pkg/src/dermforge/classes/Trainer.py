import logging
import math
import time
from pathlib import Path

import numpy as np
from tqdm import tqdm

from ..schemas.checkpoint import Checkpoint, TrainResult
from ..schemas.config import TrainConfig
from ..schemas.reports import EpochRecord
from ..utils.architecture import build_paper_model
from ..utils.checkpoint import save_checkpoint
from ..utils.constants import (
    BEST_CHECKPOINT_FILE,
    CLASS_CODES,
    FINAL_CHECKPOINT_FILE,
    LOGGER_NAME,
    NUM_CLASSES,
    STREAM_DROPOUT,
)
from ..utils.enums import Mode, Split
from ..utils.exceptions import ArgumentError, NonFiniteError
from ..utils.initialize_logic import resolve_thread_count
from ..utils.losses import one_hot, weighted_cce, weighted_loss_terms
from ..utils.metadata import class_weights_for
from ..utils.tensor_ops import checked_mode, is_checked
from .AdamOptimizer import AdamOptimizer
from .Augmenter import Augmenter
from .BatchProducer import Batch, BatchProducer
from .Model import Model
from .ParamStore import ParamStore
from .PlateauScheduler import PlateauScheduler
from .Rng import Rng
from .SkinLesionDataset import SkinLesionDataset

logger = logging.getLogger(LOGGER_NAME)


class Trainer:
    """Epoch loop: weighted-CCE minibatch training, validation, plateau decay and best-model tracking.

    The model with the lowest validation loss is kept (and written to `best.dfn` under
    `config.out_dir` whenever it strictly improves); the last epoch's model is kept too.
    Training stops early once the scheduler has nothing left to decay.
    """

    def __init__(self, config: TrainConfig, dataset: SkinLesionDataset, resume: Checkpoint | None = None):
        if len(dataset) == 0 or len(dataset.train_indices) == 0 or len(dataset.val_indices) == 0:
            raise ArgumentError("Training needs non-empty train and validation splits")
        self.config = config
        self.dataset = dataset
        self.weights = class_weights_for(mode=config.class_weight_mode)
        self.normalization = dataset.normalization
        self.start_epoch = 1
        self.best_val_loss = math.inf
        self.resume = resume

        if resume is None:
            spec, params = build_paper_model(
                config.seed,
                conv_dropout=config.conv_dropout,
                dense_dropout=config.dense_dropout,
                momentum=config.bn_momentum,
            )
        else:
            spec, params = resume.model_spec, ParamStore({k: v.copy() for k, v in resume.params.items()})
            self.normalization = resume.normalization
            self.start_epoch = resume.epoch + 1
            self.best_val_loss = resume.best_val_loss
            logger.info(f"Resuming after epoch {resume.epoch} (best validation loss {resume.best_val_loss:.6f})")
        self.model = Model(spec, params)

        self.scheduler = PlateauScheduler(config.initial_lr, config.scheduler)
        if resume is not None:
            self._restore_schedule(resume.config.get("learning_rate", config.initial_lr))
        self.optimizer = AdamOptimizer(params, self.scheduler.current_lr, config.adam)

        images = dataset.normalized(np.arange(len(dataset)), self.normalization)
        augmenter = Augmenter(config.augment, self.normalization.bounds()) if config.augment else None
        self.producer = BatchProducer(
            images,
            dataset.labels,
            dataset.train_indices,
            config.batch_size,
            config.seed,
            augmenter=augmenter,
            workers=resolve_thread_count(config.threads),
        )
        self.images = images
        # samples that contributed a gradient, per dataset position
        self.gradient_counts = np.zeros(len(dataset), dtype=np.int64)

    def _restore_schedule(self, learning_rate: float) -> None:
        s = self.scheduler
        if learning_rate > 0 and s.initial_lr > 0:
            s.decays = max(0, round(math.log(s.initial_lr / learning_rate, s.decay_factor)))
            s.current_lr = s.initial_lr / s.decay_factor ** s.decays
        s.best_val_loss = self.best_val_loss

    def _snapshot(self, epoch: int, learning_rate: float) -> Checkpoint:
        return Checkpoint(
            model_spec=self.model.spec,
            params=self.model.params.copy().as_dict(),
            normalization=self.normalization,
            config={**self.config.model_dump(mode="json"), "learning_rate": learning_rate},
            epoch=epoch,
            best_val_loss=self.best_val_loss,
            class_codes=list(CLASS_CODES),
        )

    def _save(self, cp: Checkpoint, file_name: str) -> None:
        if self.config.out_dir is not None:
            Path(self.config.out_dir).mkdir(parents=True, exist_ok=True)
            save_checkpoint(cp, Path(self.config.out_dir) / file_name)

    def _batch_step(self, batch: Batch, epoch: int, b: int) -> tuple[np.ndarray, float, dict[str, np.ndarray]]:
        probs, trace = self.model.forward(
            batch.images, Mode.TRAINING, rng=Rng(self.config.seed).child(STREAM_DROPOUT, epoch, b)
        )
        loss, grad_logits = weighted_cce(probs, one_hot(batch.labels, NUM_CLASSES, probs.dtype), self.weights)
        if not math.isfinite(loss):
            return probs, loss, {}
        return probs, loss, self.model.backward(trace, grad_logits)

    def train_epoch(self, epoch: int) -> tuple[float, float]:
        """One pass over the train split. Returns the weighted mean loss and the accuracy."""
        loss_sum = weight_sum = 0.0
        correct = seen = 0
        with checked_mode(self.config.checked or is_checked()):
            for b, batch in enumerate(self.producer.epoch(epoch)):
                try:
                    probs, loss, grads = self._batch_step(batch, epoch, b)
                except NonFiniteError as e:
                    raise NonFiniteError(f"{e} at epoch {epoch}, batch {b}") from e
                if not math.isfinite(loss):
                    raise NonFiniteError(f"Training loss became {loss} at epoch {epoch}, batch {b}")
                self.optimizer.step(grads)
                np.add.at(self.gradient_counts, batch.indices, 1)

                batch_loss, batch_weight = weighted_loss_terms(probs, batch.labels, self.weights)
                loss_sum += batch_loss
                weight_sum += batch_weight
                correct += int((probs.argmax(axis=1) == batch.labels).sum())
                seen += len(batch.labels)
                logger.debug(f"epoch {epoch} batch {b}: loss {loss:.6f}")
        return loss_sum / weight_sum, correct / seen

    def evaluate_split(self, which: Split | str = Split.VALIDATION) -> tuple[float, float]:
        """Inference-mode weighted loss and accuracy over a split."""
        indices = self.dataset.indices(which)
        probs = self.model.predict_proba(self.images[indices])
        labels = self.dataset.labels[indices]
        loss_sum, weight_sum = weighted_loss_terms(probs, labels, self.weights)
        return loss_sum / weight_sum, float((probs.argmax(axis=1) == labels).mean())

    def train(self) -> TrainResult:
        """Run the configured epochs (or until the schedule is exhausted).

        Returns:
            The lowest-validation-loss checkpoint, the final-epoch checkpoint and the history

        Raises:
            NonFiniteError: If a batch loss is NaN or infinite
        """
        config = self.config
        history: list[EpochRecord] = []
        best: Checkpoint | None = None
        final: Checkpoint | None = None
        last_epoch = self.start_epoch + config.epochs - 1
        logger.info(
            f"Training {len(self.dataset.train_indices)} samples in {len(self.producer)} batches of "
            f"{config.batch_size}, validating on {len(self.dataset.val_indices)}"
        )

        progress = tqdm(range(self.start_epoch, last_epoch + 1), desc="Training", unit="epoch", disable=None)
        for epoch in progress:
            started = time.perf_counter()
            learning_rate = self.optimizer.learning_rate
            train_loss, train_accuracy = self.train_epoch(epoch)
            val_loss, val_accuracy = self.evaluate_split(Split.VALIDATION)
            if not math.isfinite(val_loss):
                raise NonFiniteError(f"Validation loss became {val_loss} at epoch {epoch}")

            record = EpochRecord(
                epoch=epoch,
                train_loss=train_loss,
                train_accuracy=train_accuracy,
                val_loss=val_loss,
                val_accuracy=val_accuracy,
                learning_rate=learning_rate,
                wall_time=time.perf_counter() - started,
            )
            history.append(record)
            progress.set_postfix(loss=f"{train_loss:.4f}", val_loss=f"{val_loss:.4f}", val_acc=f"{val_accuracy:.3f}")
            logger.info(
                f"Epoch {epoch}: train loss {train_loss:.4f} acc {train_accuracy:.4f}, "
                f"val loss {val_loss:.4f} acc {val_accuracy:.4f}, lr {learning_rate:g}"
            )

            if val_loss < self.best_val_loss:
                self.best_val_loss = val_loss
                best = self._snapshot(epoch, learning_rate)
                self._save(best, BEST_CHECKPOINT_FILE)

            self.optimizer.learning_rate = self.scheduler.update(val_loss)
            final = self._snapshot(epoch, self.optimizer.learning_rate)
            if self.scheduler.exhausted:
                logger.info(f"Learning rate exhausted at {self.optimizer.learning_rate:g}; stopping after epoch {epoch}")
                break

        if best is None:
            # resumed run that never beat the stored best
            best = self.resume if self.resume is not None else final
            self._save(best, BEST_CHECKPOINT_FILE)
        self._save(final, FINAL_CHECKPOINT_FILE)
        return TrainResult(best=best, final=final, history=history)


def train(config: TrainConfig, dataset: SkinLesionDataset, resume: Checkpoint | None = None) -> TrainResult:
    return Trainer(config, dataset, resume).train()
