from typing import Optional

from pydantic import BaseModel, Field


class ClassMetrics(BaseModel):
    index: int
    code: str
    precision: float
    recall: float
    f1: float
    support: int
    degenerate: bool = Field(default=False, description="A precision or recall denominator was zero")


class AverageMetrics(BaseModel):
    precision: float
    recall: float
    f1: float
    support: int


class ClassificationReport(BaseModel):
    classes: list[ClassMetrics]
    macro_avg: AverageMetrics
    weighted_avg: AverageMetrics
    accuracy: float
    total: int


class RocCurve(BaseModel):
    """One class's (fpr, tpr) sweep; auc is None when the class is absent or universal."""

    label: str
    thresholds: list[float]
    fpr: list[float]
    tpr: list[float]
    auc: Optional[float]


class RocSet(BaseModel):
    curves: list[RocCurve]
    macro: Optional[RocCurve] = None


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    train_accuracy: float = Field(ge=0.0, le=1.0)
    val_loss: float
    val_accuracy: float = Field(ge=0.0, le=1.0)
    learning_rate: float
    wall_time: float


class Prediction(BaseModel):
    image: str
    label: int
    code: str
    name: str
    probabilities: dict[str, float]


class GradcheckResult(BaseModel):
    layer: str
    max_relative_error: float
    checked: int
    passed: bool
