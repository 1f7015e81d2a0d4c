from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict

from ..utils.enums import Mode


class ForwardTrace(BaseModel):
    """Per-layer caches of one forward pass, consumed by the backward pass."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mode: Mode
    caches: list[dict[str, Any]]
    logits: np.ndarray
