"""Finite-difference verification of every backward pass, in double precision."""
import logging
from typing import Callable, Iterable

import numpy as np

from ..classes.Model import Model
from ..classes.Rng import Rng
from ..schemas.reports import GradcheckResult
from .architecture import build_paper_model
from .constants import (
    CHECK_DTYPE,
    DEFAULT_SEED,
    GRADCHECK_DENOMINATOR_FLOOR,
    GRADCHECK_LAYERS,
    GRADCHECK_STEP,
    GRADCHECK_TOLERANCE,
    LOGGER_NAME,
    NUM_CLASSES,
    STREAM_DROPOUT,
)
from .enums import Mode
from .exceptions import ArgumentError
from . import layer_ops
from .losses import one_hot, weighted_cce
from .metadata import class_weights_for
from .tensor_ops import checked_mode

logger = logging.getLogger(LOGGER_NAME)

# coordinates probed per tensor when it is too large to probe exhaustively
MAX_EXHAUSTIVE = 512
SAMPLED_COORDINATES = 16
MODEL_SAMPLED_COORDINATES = 4


def relative_error(analytic: float, numeric: float) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), GRADCHECK_DENOMINATOR_FLOOR)


def numeric_gradient(
    f: Callable[[], float],
    tensor: np.ndarray,
    coords: Iterable[int],
    step: float = GRADCHECK_STEP,
) -> dict[int, float]:
    """Central differences of the scalar `f` with respect to flat positions of `tensor` (perturbed in place)."""
    flat = tensor.reshape(-1)
    grads = {}
    for i in coords:
        original = flat[i]
        flat[i] = original + step
        plus = f()
        flat[i] = original - step
        minus = f()
        flat[i] = original
        grads[i] = (plus - minus) / (2.0 * step)
    return grads


def _coords(tensor: np.ndarray, rng: Rng, limit: int, exhaustive: int) -> list[int]:
    if tensor.size <= exhaustive:
        return list(range(tensor.size))
    return sorted(int(i) for i in rng.permutation(tensor.size)[:limit])


def _compare(
    f: Callable[[], float],
    pairs: Iterable[tuple[np.ndarray, np.ndarray]],
    rng: Rng,
    limit: int = SAMPLED_COORDINATES,
    exhaustive: int = MAX_EXHAUSTIVE,
) -> tuple[float, int]:
    """Worst relative error over (tensor, analytic gradient) pairs, and coordinates checked."""
    worst, checked = 0.0, 0
    for tensor, analytic in pairs:
        flat_analytic = analytic.reshape(-1)
        for i, numeric in numeric_gradient(f, tensor, _coords(tensor, rng, limit, exhaustive)).items():
            worst = max(worst, relative_error(float(flat_analytic[i]), numeric))
            checked += 1
    return worst, checked


def _projected(forward: Callable[[], np.ndarray], upstream: np.ndarray) -> Callable[[], float]:
    """Scalar sum(forward() * upstream), whose gradient is the backward pass fed `upstream`."""
    return lambda: float(np.sum(forward() * upstream))


def check_conv2d(rng: Rng) -> tuple[float, int]:
    worst, checked = 0.0, 0
    for stride, padding in ((1, "valid"), (2, "same")):
        x = rng.normal(0.0, 1.0, (2, 3, 7, 7), CHECK_DTYPE)
        w = rng.normal(0.0, 0.5, (4, 3, 3, 3), CHECK_DTYPE)
        b = rng.normal(0.0, 0.5, 4, CHECK_DTYPE)
        out, cache = layer_ops.conv2d_forward(x, w, b, stride, padding)
        upstream = rng.normal(0.0, 1.0, out.shape, CHECK_DTYPE)
        dx, dw, db = layer_ops.conv2d_backward(upstream, cache)
        f = _projected(lambda: layer_ops.conv2d_forward(x, w, b, stride, padding)[0], upstream)
        err, n = _compare(f, [(x, dx), (w, dw), (b, db)], rng)
        worst, checked = max(worst, err), checked + n
    return worst, checked


def check_maxpool(rng: Rng) -> tuple[float, int]:
    worst, checked = 0.0, 0
    for pool, stride, padding in ((2, 2, "valid"), (2, 1, "same")):
        x = rng.normal(0.0, 1.0, (2, 3, 6, 6), CHECK_DTYPE)
        out, cache = layer_ops.maxpool_forward(x, pool, stride, padding)
        upstream = rng.normal(0.0, 1.0, out.shape, CHECK_DTYPE)
        dx = layer_ops.maxpool_backward(upstream, cache)
        f = _projected(lambda: layer_ops.maxpool_forward(x, pool, stride, padding)[0], upstream)
        err, n = _compare(f, [(x, dx)], rng)
        worst, checked = max(worst, err), checked + n
    return worst, checked


def check_batchnorm(rng: Rng) -> tuple[float, int]:
    channels = 4
    x = rng.normal(0.5, 2.0, (3, channels, 4, 4), CHECK_DTYPE)
    gamma = rng.normal(1.0, 0.3, channels, CHECK_DTYPE)
    beta = rng.normal(0.0, 0.3, channels, CHECK_DTYPE)
    moving_mean, moving_var = np.zeros(channels, CHECK_DTYPE), np.ones(channels, CHECK_DTYPE)

    def forward() -> np.ndarray:
        return layer_ops.batchnorm_forward(
            x, gamma, beta, moving_mean, moving_var, Mode.TRAINING, 0.99, 1e-3, update_moving=False
        )[0]

    upstream = rng.normal(0.0, 1.0, x.shape, CHECK_DTYPE)
    _, cache = layer_ops.batchnorm_forward(
        x, gamma, beta, moving_mean, moving_var, Mode.TRAINING, 0.99, 1e-3, update_moving=False
    )
    dx, dgamma, dbeta = layer_ops.batchnorm_backward(upstream, cache)
    return _compare(_projected(forward, upstream), [(x, dx), (gamma, dgamma), (beta, dbeta)], rng)


def check_dropout(rng: Rng) -> tuple[float, int]:
    x = rng.normal(0.0, 1.0, (2, 3, 4, 4), CHECK_DTYPE)
    key = rng.child(STREAM_DROPOUT)

    def forward() -> np.ndarray:
        return layer_ops.dropout_forward(x, 0.5, Rng(key.seed, key.key), Mode.TRAINING)[0]

    upstream = rng.normal(0.0, 1.0, x.shape, CHECK_DTYPE)
    _, mask = layer_ops.dropout_forward(x, 0.5, Rng(key.seed, key.key), Mode.TRAINING)
    dx = layer_ops.dropout_backward(upstream, mask)
    return _compare(_projected(forward, upstream), [(x, dx)], rng)


def check_dense(rng: Rng) -> tuple[float, int]:
    x = rng.normal(0.0, 1.0, (2, 10), CHECK_DTYPE)
    w = rng.normal(0.0, 0.5, (10, 5), CHECK_DTYPE)
    b = rng.normal(0.0, 0.5, 5, CHECK_DTYPE)
    out, cache = layer_ops.dense_forward(x, w, b)
    upstream = rng.normal(0.0, 1.0, out.shape, CHECK_DTYPE)
    dx, dw, db = layer_ops.dense_backward(upstream, cache)
    f = _projected(lambda: layer_ops.dense_forward(x, w, b)[0], upstream)
    return _compare(f, [(x, dx), (w, dw), (b, db)], rng)


def check_softmax_cce(rng: Rng) -> tuple[float, int]:
    """Fused softmax plus class-weighted cross-entropy, with nv among the targets."""
    logits = rng.normal(0.0, 2.0, (6, NUM_CLASSES), CHECK_DTYPE)
    targets = one_hot(np.array([0, 5, 5, 4, 6, 2]), NUM_CLASSES, CHECK_DTYPE)
    weights = class_weights_for()
    _, grad = weighted_cce(layer_ops.softmax(logits), targets, weights)
    f = lambda: weighted_cce(layer_ops.softmax(logits), targets, weights)[0]  # noqa: E731
    return _compare(f, [(logits, grad)], rng)


def check_model(rng: Rng, seed: int = DEFAULT_SEED) -> tuple[float, int]:
    """The full network plus weighted loss on a (2, 3, 28, 28) batch, dropout masks held fixed."""
    spec, params = build_paper_model(seed, dtype=CHECK_DTYPE)
    model = Model(spec, params)
    batch = rng.normal(0.0, 1.0, (2, *spec.input_shape), CHECK_DTYPE)
    targets = one_hot(np.array([1, 5]), NUM_CLASSES, CHECK_DTYPE)
    weights = class_weights_for()
    dropout_key = rng.child(STREAM_DROPOUT)

    def loss(with_grad: bool = False):
        probs, trace = model.forward(
            batch, Mode.TRAINING, rng=Rng(dropout_key.seed, dropout_key.key), update_moving_stats=False
        )
        value, grad_logits = weighted_cce(probs, targets, weights)
        return (value, trace, grad_logits) if with_grad else value

    _, trace, grad_logits = loss(with_grad=True)
    grads = model.backward(trace, grad_logits)
    pairs = [(params[name], grads[name]) for name in params.trainable_names()]
    return _compare(loss, pairs, rng, limit=MODEL_SAMPLED_COORDINATES, exhaustive=0)


CHECKS: dict[str, Callable[[Rng], tuple[float, int]]] = {
    "conv2d": check_conv2d,
    "maxpool": check_maxpool,
    "batchnorm": check_batchnorm,
    "dropout": check_dropout,
    "dense": check_dense,
    "softmax_cce": check_softmax_cce,
    "model": check_model,
}


def run_gradcheck(
    layers: str | Iterable[str] = "all",
    tolerance: float = GRADCHECK_TOLERANCE,
    seed: int = DEFAULT_SEED,
) -> list[GradcheckResult]:
    """Compare analytic and central-difference gradients for the selected checks.

    Args:
        layers: "all" or names from conv2d, maxpool, batchnorm, dropout, dense, softmax_cce, model
        tolerance: Largest acceptable relative error
        seed: Seed of the random inputs

    Returns:
        One result per check, in the order given

    Raises:
        ArgumentError: For an unknown check name or a negative tolerance
        NonFiniteError: If any operation produces NaN or Inf while checking
    """
    if tolerance < 0:
        raise ArgumentError(f"Tolerance must be non-negative, got {tolerance}")
    names = list(GRADCHECK_LAYERS) if layers == "all" else [layers] if isinstance(layers, str) else list(layers)
    unknown = [name for name in names if name not in CHECKS]
    if unknown:
        raise ArgumentError(f"Unknown gradient checks {unknown}; choose from {list(GRADCHECK_LAYERS)}")

    results = []
    for name in names:
        with checked_mode():
            worst, checked = CHECKS[name](Rng(seed).child(GRADCHECK_LAYERS.index(name)))
        results.append(GradcheckResult(layer=name, max_relative_error=worst, checked=checked,
                                       passed=worst <= tolerance))
        logger.info(f"gradcheck {name}: max relative error {worst:.3e} over {checked} coordinates")
    return results
