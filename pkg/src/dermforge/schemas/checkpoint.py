from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..utils.constants import CHECKPOINT_FORMAT_VERSION, CLASS_CODES
from .layers import ModelSpec
from .records import NormalizationStats
from .reports import EpochRecord


class Checkpoint(BaseModel):
    """Everything needed to rebuild, evaluate or resume a trained model."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    format_version: int = CHECKPOINT_FORMAT_VERSION
    model_spec: ModelSpec
    params: dict[str, np.ndarray]
    normalization: NormalizationStats
    config: dict[str, Any] = Field(default_factory=dict)
    epoch: int = 0
    best_val_loss: float = float("inf")
    class_codes: list[str] = Field(default_factory=lambda: list(CLASS_CODES))


class TrainResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    best: Checkpoint
    final: Checkpoint
    history: list[EpochRecord]
