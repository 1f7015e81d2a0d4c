import numpy as np

from ..schemas.config import ClassWeights
from .constants import PROBABILITY_FLOOR
from .exceptions import ArgumentError, ShapeError


def _validate_targets(probs: np.ndarray, targets: np.ndarray) -> np.ndarray:
    if probs.shape != targets.shape or probs.ndim != 2:
        raise ShapeError(f"probs {probs.shape} and targets {targets.shape} must be equal rank-2 shapes")
    if not (np.all((targets == 0) | (targets == 1)) and np.all(targets.sum(axis=1) == 1)):
        raise ArgumentError("Every target row must be one-hot")
    return targets.argmax(axis=1)


def one_hot(labels: np.ndarray, num_classes: int, dtype=np.float32) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ArgumentError(f"Labels must lie in [0, {num_classes})")
    encoded = np.zeros((labels.size, num_classes), dtype=dtype)
    encoded[np.arange(labels.size), labels] = 1
    return encoded


def categorical_cross_entropy(probs: np.ndarray, targets: np.ndarray) -> float:
    """Unweighted J = -(1/N) sum y . log(y_hat), with the probability floor."""
    labels = _validate_targets(probs, targets)
    picked = np.maximum(probs[np.arange(len(labels)), labels].astype(np.float64), PROBABILITY_FLOOR)
    return float(-np.log(picked).mean())


def weighted_cce(
    probs: np.ndarray,
    targets: np.ndarray,
    weights: ClassWeights,
) -> tuple[float, np.ndarray]:
    """Class-weighted categorical cross-entropy fused with the softmax backward.

    The loss is normalised by the sum of the batch's sample weights, so a down-weighted
    class rescales its own contribution without rescaling the global step size.

    Args:
        probs: Softmax outputs (N, classes)
        targets: One-hot targets (N, classes)
        weights: Per-class weights

    Returns:
        The scalar loss and its gradient with respect to the pre-softmax logits,
        w_i * (y_hat_i - y_i) / sum(w)

    Raises:
        ArgumentError: If a target row is not one-hot
    """
    labels = _validate_targets(probs, targets)
    sample_weights = np.asarray(weights.weights, dtype=np.float64)[labels]
    total_weight = sample_weights.sum()
    picked = np.maximum(probs[np.arange(len(labels)), labels].astype(np.float64), PROBABILITY_FLOOR)
    loss = float(-(sample_weights * np.log(picked)).sum() / total_weight)
    grad = (probs - targets) * (sample_weights / total_weight)[:, None].astype(probs.dtype)
    return loss, grad.astype(probs.dtype, copy=False)


def weighted_loss_terms(probs: np.ndarray, labels: np.ndarray, weights: ClassWeights) -> tuple[float, float]:
    """Weighted negative log-likelihood sum and weight sum, for split-level averages."""
    labels = np.asarray(labels, dtype=np.int64)
    sample_weights = np.asarray(weights.weights, dtype=np.float64)[labels]
    picked = np.maximum(probs[np.arange(len(labels)), labels].astype(np.float64), PROBABILITY_FLOOR)
    return float(-(sample_weights * np.log(picked)).sum()), float(sample_weights.sum())
