import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..schemas.config import AdamConfig
from ..utils.constants import LOGGER_NAME
from ..utils.exceptions import ShapeError
from .ParamStore import ParamStore

logger = logging.getLogger(LOGGER_NAME)


class AdamState(BaseModel):
    """First and second moments per parameter, step counter and learning rate."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    m: dict[str, np.ndarray] = Field(default_factory=dict)
    v: dict[str, np.ndarray] = Field(default_factory=dict)
    t: int = 0
    learning_rate: float
    beta1: float
    beta2: float
    epsilon: float


class AdamOptimizer:
    """Adaptive moment estimation over the trainable entries of a ParamStore."""

    def __init__(self, params: ParamStore, learning_rate: float, config: AdamConfig | None = None):
        config = config or AdamConfig()
        self.params = params
        self.state = AdamState(
            m={name: np.zeros_like(params[name]) for name in params.trainable_names()},
            v={name: np.zeros_like(params[name]) for name in params.trainable_names()},
            learning_rate=learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            epsilon=config.epsilon,
        )

    @property
    def learning_rate(self) -> float:
        return self.state.learning_rate

    @learning_rate.setter
    def learning_rate(self, value: float) -> None:
        self.state.learning_rate = value

    def step(self, grads: dict[str, np.ndarray]) -> None:
        """Apply one bias-corrected Adam update in place.

        Raises:
            ShapeError: If a gradient is missing or shaped unlike its parameter
        """
        s = self.state
        for name in s.m:
            if name not in grads or grads[name].shape != self.params[name].shape:
                got = grads[name].shape if name in grads else None
                raise ShapeError(f"Gradient for '{name}' has shape {got}, expected {self.params[name].shape}")

        s.t += 1
        correction1 = 1.0 - s.beta1 ** s.t
        correction2 = 1.0 - s.beta2 ** s.t
        for name, g in grads.items():
            if name not in s.m:
                continue
            m, v, param = s.m[name], s.v[name], self.params[name]
            m *= s.beta1
            m += (1.0 - s.beta1) * g
            v *= s.beta2
            v += (1.0 - s.beta2) * np.square(g)
            m_hat = m / correction1
            v_hat = v / correction2
            param -= (s.learning_rate * m_hat / (np.sqrt(v_hat) + s.epsilon)).astype(param.dtype, copy=False)
