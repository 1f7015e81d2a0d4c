from typing import Iterator

import numpy as np

from ..utils.exceptions import ShapeError

NON_TRAINABLE_SUFFIXES = ("moving_mean", "moving_variance")


class ParamStore:
    """Ordered mapping from "layer/parameter" names to parameter arrays.

    Batch-norm moving statistics live here too but are flagged non-trainable, so the
    optimizer never touches them.
    """

    def __init__(self, tensors: dict[str, np.ndarray] | None = None):
        self._tensors: dict[str, np.ndarray] = dict(tensors or {})

    @staticmethod
    def key(layer: str, param: str) -> str:
        return f"{layer}/{param}"

    @staticmethod
    def is_trainable(name: str) -> bool:
        return not name.endswith(NON_TRAINABLE_SUFFIXES)

    def add(self, layer: str, param: str, value: np.ndarray) -> None:
        self._tensors[self.key(layer, param)] = value

    def get(self, layer: str, param: str) -> np.ndarray:
        return self._tensors[self.key(layer, param)]

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        if name in self._tensors and self._tensors[name].shape != value.shape:
            raise ShapeError(f"Parameter '{name}' has shape {self._tensors[name].shape}, got {value.shape}")
        self._tensors[name] = value

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def items(self):
        return self._tensors.items()

    def names(self) -> list[str]:
        return list(self._tensors)

    def trainable_names(self) -> list[str]:
        return [name for name in self._tensors if self.is_trainable(name)]

    def layer_param_count(self, layer: str) -> int:
        prefix = f"{layer}/"
        return sum(t.size for name, t in self._tensors.items() if name.startswith(prefix))

    def count(self, trainable: bool | None = None) -> int:
        return sum(
            t.size for name, t in self._tensors.items()
            if trainable is None or self.is_trainable(name) == trainable
        )

    @property
    def dtype(self) -> np.dtype:
        return next(iter(self._tensors.values())).dtype

    def astype(self, dtype) -> "ParamStore":
        """A copy with every tensor cast to `dtype`."""
        return ParamStore({name: t.astype(dtype, copy=True) for name, t in self._tensors.items()})

    def copy(self) -> "ParamStore":
        return ParamStore({name: t.copy() for name, t in self._tensors.items()})

    def as_dict(self) -> dict[str, np.ndarray]:
        return dict(self._tensors)
