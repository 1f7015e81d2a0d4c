from pathlib import Path
from typing import Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from ..utils.constants import (
    ADAM_BETA1,
    ADAM_BETA2,
    ADAM_EPSILON,
    BATCHNORM_MOMENTUM,
    BRIGHTNESS_DELTA,
    CLASS_CODES,
    CONV_DROPOUT_RATE,
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_LEARNING_RATE,
    DEFAULT_SEED,
    DEFAULT_VAL_FRACTION,
    DENSE_DROPOUT_RATE,
    FLIP_PROBABILITY,
    MAX_ROTATION_DEG,
    NV_CLASS_WEIGHT,
    PLATEAU_DECAY_FACTOR,
    PLATEAU_MIN_DELTA,
    PLATEAU_MIN_LR,
    PLATEAU_PATIENCE,
    ZOOM_MAX,
)
from ..utils.enums import ClassLabel, ClassWeightMode


class ClassWeights(BaseModel):
    """Loss weight per class index."""

    weights: tuple[float, ...]

    @field_validator("weights")
    @classmethod
    def _positive_and_complete(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if len(value) != len(CLASS_CODES):
            raise ValueError(f"Expected {len(CLASS_CODES)} class weights, got {len(value)}")
        if any(w <= 0 for w in value):
            raise ValueError("Class weights must be positive")
        return value

    @classmethod
    def paper(cls) -> "ClassWeights":
        return cls(weights=tuple(NV_CLASS_WEIGHT if label is ClassLabel.NV else 1.0 for label in ClassLabel))

    @classmethod
    def uniform(cls) -> "ClassWeights":
        return cls(weights=(1.0,) * len(CLASS_CODES))

    def __getitem__(self, label: int) -> float:
        return self.weights[int(label)]


class AugmentConfig(BaseModel):
    flip_horizontal: float = Field(default=FLIP_PROBABILITY, ge=0.0, le=1.0)
    flip_vertical: float = Field(default=FLIP_PROBABILITY, ge=0.0, le=1.0)
    max_rotation_deg: float = Field(default=MAX_ROTATION_DEG, ge=0.0, le=180.0)
    brightness_delta: float = Field(default=BRIGHTNESS_DELTA, ge=0.0)
    zoom_max: float = Field(default=ZOOM_MAX, ge=0.0, lt=0.5)

    @classmethod
    def disabled(cls) -> "AugmentConfig":
        return cls(flip_horizontal=0.0, flip_vertical=0.0, max_rotation_deg=0.0,
                   brightness_delta=0.0, zoom_max=0.0)


class AdamConfig(BaseModel):
    beta1: float = Field(default=ADAM_BETA1, ge=0.0, lt=1.0)
    beta2: float = Field(default=ADAM_BETA2, ge=0.0, lt=1.0)
    epsilon: float = Field(default=ADAM_EPSILON, gt=0.0)


class SchedulerConfig(BaseModel):
    decay_factor: float = Field(default=PLATEAU_DECAY_FACTOR, gt=1.0)
    patience: int = Field(default=PLATEAU_PATIENCE, ge=1)
    min_delta: float = Field(default=PLATEAU_MIN_DELTA, ge=0.0)
    min_lr: float = Field(default=PLATEAU_MIN_LR, ge=0.0)


class TrainConfig(BaseModel):
    epochs: int = Field(default=DEFAULT_EPOCHS, ge=1)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)
    initial_lr: float = Field(default=DEFAULT_LEARNING_RATE, ge=0.0)
    val_fraction: float = Field(default=DEFAULT_VAL_FRACTION, gt=0.0, lt=1.0)
    seed: int = Field(default=DEFAULT_SEED, ge=0, lt=2**64)
    class_weight_mode: ClassWeightMode = ClassWeightMode.PAPER
    augment: Optional[AugmentConfig] = Field(default_factory=AugmentConfig)
    adam: AdamConfig = Field(default_factory=AdamConfig)
    scheduler: SchedulerConfig = Field(default_factory=SchedulerConfig)
    conv_dropout: float = Field(default=CONV_DROPOUT_RATE, ge=0.0, lt=1.0)
    dense_dropout: float = Field(default=DENSE_DROPOUT_RATE, ge=0.0, lt=1.0)
    bn_momentum: float = Field(default=BATCHNORM_MOMENTUM, ge=0.0, le=1.0)
    out_dir: Optional[Path] = None
    threads: Optional[int] = Field(default=None, ge=1)
    checked: bool = Field(default=False, description="Verify that every training operation yields finite values")

    @model_validator(mode="after")
    def _lr_floor(self) -> "TrainConfig":
        if self.scheduler.min_lr > self.initial_lr > 0:
            raise ValueError("scheduler.min_lr cannot exceed initial_lr")
        return self
