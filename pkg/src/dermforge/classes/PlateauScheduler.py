import logging
import math

from ..schemas.config import SchedulerConfig
from ..utils.constants import LOGGER_NAME

logger = logging.getLogger(LOGGER_NAME)


class PlateauScheduler:
    """Divides the learning rate by `decay_factor` when validation loss stops improving.

    The rate is always initial_lr / decay_factor**k, bounded below by min_lr. Once a
    plateau is reached while already at the floor, `exhausted` is set.
    """

    def __init__(self, initial_lr: float, config: SchedulerConfig | None = None):
        config = config or SchedulerConfig()
        self.initial_lr = initial_lr
        self.decay_factor = config.decay_factor
        self.patience = config.patience
        self.min_delta = config.min_delta
        self.min_lr = config.min_lr
        self.decays = 0
        self.current_lr = initial_lr
        self.best_val_loss = math.inf
        self.epochs_since_improvement = 0
        self.exhausted = False

    def update(self, epoch_val_loss: float) -> float:
        """Record one epoch's validation loss and return the learning rate for the next."""
        if self.best_val_loss - epoch_val_loss > self.min_delta:
            self.best_val_loss = epoch_val_loss
            self.epochs_since_improvement = 0
            return self.current_lr

        self.epochs_since_improvement += 1
        if self.epochs_since_improvement >= self.patience:
            self.epochs_since_improvement = 0
            candidate = self.initial_lr / self.decay_factor ** (self.decays + 1)
            if candidate >= self.min_lr * (1 - 1e-9):
                self.decays += 1
                self.current_lr = candidate
                logger.info(f"Validation loss plateaued; learning rate -> {self.current_lr:g}")
            else:
                self.exhausted = True
                logger.info(f"Validation loss plateaued at the minimum learning rate {self.current_lr:g}")
        return self.current_lr
