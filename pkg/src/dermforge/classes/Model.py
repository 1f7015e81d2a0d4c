import logging

import numpy as np

from ..schemas.layers import (
    BatchNormSpec,
    Conv2DSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    InputSpec,
    MaxPool2DSpec,
    ModelSpec,
)
from ..schemas.trace import ForwardTrace
from ..utils import layer_ops
from ..utils.architecture import infer_shapes
from ..utils.constants import LOGGER_NAME
from ..utils.enums import Mode
from ..utils.exceptions import ShapeError, StateError
from ..utils.tensor_ops import reshape
from .ParamStore import ParamStore
from .Rng import Rng

logger = logging.getLogger(LOGGER_NAME)


class Model:
    """A sequential CNN: a ModelSpec executed against a ParamStore.

    The final layer must be a softmax Dense layer. Its backward pass is fused with the
    cross-entropy loss, so `backward` takes the gradient with respect to the logits.
    """

    def __init__(self, spec: ModelSpec, params: ParamStore):
        infer_shapes(spec)
        last = spec.layers[-1]
        if not (isinstance(last, DenseSpec) and last.activation == "softmax"):
            raise ShapeError("The last layer must be a softmax Dense layer")
        self.spec = spec
        self.params = params

    @property
    def layers(self):
        return self.spec.layers

    def forward(
        self,
        batch: np.ndarray,
        mode: Mode,
        rng: Rng | None = None,
        update_moving_stats: bool = True,
    ) -> tuple[np.ndarray, ForwardTrace]:
        """Run every layer in order.

        Args:
            batch: Images of shape (N, C, H, W)
            mode: Training (batch statistics, dropout) or inference
            rng: Dropout stream, required in training mode when any rate is non-zero
            update_moving_stats: Whether training mode refreshes batch-norm moving statistics

        Returns:
            Class probabilities (N, classes) and the trace for `backward`
        """
        expected = self.spec.input_shape
        if batch.ndim != 4 or tuple(batch.shape[1:]) != tuple(expected):
            raise ShapeError(f"Expected a batch of shape (N, {', '.join(map(str, expected))}), got {batch.shape}")
        p = self.params
        x = batch.astype(p.dtype, copy=False)
        caches: list[dict] = []
        logits = None

        for layer in self.layers:
            cache: dict = {}
            if isinstance(layer, InputSpec):
                pass
            elif isinstance(layer, Conv2DSpec):
                x, cache = layer_ops.conv2d_forward(
                    x, p.get(layer.name, "kernel"), p.get(layer.name, "bias"), layer.stride, layer.padding
                )
                if layer.activation == "relu":
                    x, cache["relu_mask"] = layer_ops.relu_forward(x)
            elif isinstance(layer, MaxPool2DSpec):
                x, cache = layer_ops.maxpool_forward(x, layer.pool_size, layer.stride, layer.padding)
            elif isinstance(layer, BatchNormSpec):
                x, cache = layer_ops.batchnorm_forward(
                    x,
                    p.get(layer.name, "gamma"),
                    p.get(layer.name, "beta"),
                    p.get(layer.name, "moving_mean"),
                    p.get(layer.name, "moving_variance"),
                    mode,
                    layer.momentum,
                    layer.epsilon,
                    update_moving=update_moving_stats,
                )
            elif isinstance(layer, DropoutSpec):
                if mode is Mode.TRAINING and layer.rate > 0 and rng is None:
                    raise StateError(f"{layer.name} needs a random stream in training mode")
                x, cache["mask"] = layer_ops.dropout_forward(x, layer.rate, rng, mode)
            elif isinstance(layer, FlattenSpec):
                cache["shape"] = x.shape
                x = reshape(x, (x.shape[0], x[0].size))
            elif isinstance(layer, DenseSpec):
                x, cache = layer_ops.dense_forward(
                    x, p.get(layer.name, "kernel"), p.get(layer.name, "bias"), layer.activation
                )
                logits = cache.get("logits", logits)
            caches.append(cache)

        return x, ForwardTrace(mode=mode, caches=caches, logits=logits)

    def backward(self, trace: ForwardTrace, grad_logits: np.ndarray) -> dict[str, np.ndarray]:
        """Reverse-mode pass through a training-mode trace.

        Args:
            trace: Trace from `forward` in training mode
            grad_logits: Loss gradient with respect to the final pre-softmax logits

        Returns:
            Gradient per trainable parameter name, shaped like the parameter

        Raises:
            StateError: If the trace came from inference mode or another model
        """
        if trace.mode is not Mode.TRAINING:
            raise StateError("backward requires a trace recorded in training mode")
        if len(trace.caches) != len(self.layers):
            raise StateError(f"Trace has {len(trace.caches)} layers, model has {len(self.layers)}")
        if grad_logits.shape != trace.logits.shape:
            raise ShapeError(f"Gradient shape {grad_logits.shape} does not match logits {trace.logits.shape}")

        grads: dict[str, np.ndarray] = {}
        dx = grad_logits.astype(trace.logits.dtype, copy=False)
        for layer, cache in zip(reversed(self.layers), reversed(trace.caches)):
            if isinstance(layer, Conv2DSpec):
                if "relu_mask" in cache:
                    dx = layer_ops.relu_backward(dx, cache["relu_mask"])
                dx, dw, db = layer_ops.conv2d_backward(dx, cache)
                grads[ParamStore.key(layer.name, "kernel")] = dw
                grads[ParamStore.key(layer.name, "bias")] = db
            elif isinstance(layer, MaxPool2DSpec):
                dx = layer_ops.maxpool_backward(dx, cache)
            elif isinstance(layer, BatchNormSpec):
                dx, dgamma, dbeta = layer_ops.batchnorm_backward(dx, cache)
                grads[ParamStore.key(layer.name, "gamma")] = dgamma
                grads[ParamStore.key(layer.name, "beta")] = dbeta
            elif isinstance(layer, DropoutSpec):
                dx = layer_ops.dropout_backward(dx, cache["mask"])
            elif isinstance(layer, FlattenSpec):
                dx = reshape(dx, cache["shape"])
            elif isinstance(layer, DenseSpec):
                if "relu_mask" in cache:
                    dx = layer_ops.relu_backward(dx, cache["relu_mask"])
                dx, dw, db = layer_ops.dense_backward(dx, cache)
                grads[ParamStore.key(layer.name, "kernel")] = dw
                grads[ParamStore.key(layer.name, "bias")] = db

        return {name: grads[name] for name in self.params.trainable_names()}

    def predict_proba(self, images: np.ndarray, batch_size: int = 256) -> np.ndarray:
        """Inference-mode probabilities for a stack of images, computed in chunks."""
        chunks = [
            self.forward(images[start:start + batch_size], Mode.INFERENCE)[0]
            for start in range(0, len(images), batch_size)
        ]
        if not chunks:
            return np.zeros((0, self.layers[-1].units), dtype=self.params.dtype)
        return np.concatenate(chunks, axis=0)
