from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..utils.constants import CLASS_CODES
from ..utils.enums import ClassLabel


class MetadataRecord(BaseModel):
    """One row of the HAM10000 metadata file."""

    lesion_id: str = Field(min_length=1)
    image_id: str = Field(min_length=1)
    dx: str
    dx_type: str = Field(min_length=1)
    age: Optional[float] = Field(default=None, ge=0)
    sex: str = Field(min_length=1)
    localization: str = Field(min_length=1)

    @field_validator("dx")
    @classmethod
    def _known_dx(cls, value: str) -> str:
        if value not in CLASS_CODES:
            raise ValueError(f"unknown dx '{value}'")
        return value

    @property
    def label(self) -> ClassLabel:
        return ClassLabel.from_code(self.dx)


class NormalizationStats(BaseModel):
    """Per-channel mean and standard deviation of [0, 1]-scaled training pixels."""

    mean: tuple[float, ...]
    std: tuple[float, ...]

    def apply(self, images: np.ndarray) -> np.ndarray:
        mean = np.asarray(self.mean, dtype=images.dtype).reshape(1, -1, 1, 1)
        std = np.asarray(self.std, dtype=images.dtype).reshape(1, -1, 1, 1)
        return (images - mean) / std

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-channel normalised values of raw pixels 0 and 1."""
        mean = np.asarray(self.mean, dtype=np.float64)
        std = np.asarray(self.std, dtype=np.float64)
        return (0.0 - mean) / std, (1.0 - mean) / std

    @classmethod
    def identity(cls, channels: int = 3) -> "NormalizationStats":
        return cls(mean=(0.0,) * channels, std=(1.0,) * channels)


class Sample(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    image: np.ndarray
    label: ClassLabel
    image_id: str
