"""Shape-checked tensor primitives.

Tensors are numpy arrays in row-major order. Image tensors use NCHW layout. Training
runs in float32, finite-difference checking in float64; every op preserves the dtype of
its inputs.
"""
from contextlib import contextmanager
from math import prod
from typing import Iterator, Sequence

import numpy as np

from .enums import ReduceMode
from .exceptions import NonFiniteError, ShapeError

_checked = False


@contextmanager
def checked_mode(enabled: bool = True) -> Iterator[None]:
    """Within the block, every op verifies that its result is finite."""
    global _checked
    previous = _checked
    _checked = enabled
    try:
        yield
    finally:
        _checked = previous


def is_checked() -> bool:
    return _checked


def check_finite(t: np.ndarray, where: str) -> np.ndarray:
    if _checked and not np.all(np.isfinite(t)):
        raise NonFiniteError(f"Non-finite value produced by {where}")
    return t


def reshape(t: np.ndarray, new_shape: Sequence[int]) -> np.ndarray:
    """Reinterpret the data of `t` with a new shape.

    Raises:
        ShapeError: If the element counts differ
    """
    new_shape = tuple(int(d) for d in new_shape)
    if any(d < 1 for d in new_shape) or prod(new_shape) != t.size:
        raise ShapeError(f"Cannot reshape {t.shape} ({t.size} elements) to {new_shape}")
    return t.reshape(new_shape)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rank-2 matrix product.

    Raises:
        ShapeError: If either operand is not rank 2 or the inner dimensions differ
    """
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects rank-2 operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimension mismatch: {a.shape} x {b.shape}")
    return check_finite(a @ b, "matmul")


def _normalize_axes(t: np.ndarray, axes: int | Sequence[int] | None) -> tuple[int, ...]:
    if axes is None:
        return tuple(range(t.ndim))
    if isinstance(axes, (int, np.integer)):
        axes = (int(axes),)
    normalized = []
    for axis in axes:
        if not -t.ndim <= axis < t.ndim:
            raise ShapeError(f"Axis {axis} is invalid for shape {t.shape}")
        normalized.append(axis % t.ndim)
    if len(set(normalized)) != len(normalized):
        raise ShapeError(f"Repeated axis in {tuple(axes)}")
    return tuple(normalized)


def reduce(
    t: np.ndarray,
    axes: int | Sequence[int] | None = None,
    mode: ReduceMode | str = ReduceMode.SUM,
    keepdims: bool = False,
) -> np.ndarray:
    """Sum, mean or max over the given axes (all axes when None).

    Raises:
        ShapeError: If an axis is out of range
    """
    mode = ReduceMode(mode)
    axis_tuple = _normalize_axes(t, axes)
    if mode is ReduceMode.MAX and t.size == 0:
        raise ShapeError("max over an empty tensor is undefined")
    if mode is ReduceMode.SUM:
        result = np.sum(t, axis=axis_tuple, keepdims=keepdims)
    elif mode is ReduceMode.MEAN:
        result = np.mean(t, axis=axis_tuple, keepdims=keepdims)
    else:
        result = np.max(t, axis=axis_tuple, keepdims=keepdims)
    return check_finite(np.asarray(result, dtype=t.dtype), f"reduce({mode.value})")
