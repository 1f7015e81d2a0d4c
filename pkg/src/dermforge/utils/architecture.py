"""The skin-lesion CNN: layer chain, shape inference, parameter init and summary.

Kernel sizes, strides and padding are solved from the published layer table (output
shapes and parameter counts): 2x2 valid convolutions for the first three blocks, a 1x1
convolution for the fourth, 2/2 pooling for the first three pools and a shape-preserving
2/1 "same" pool for the last.
"""
from math import prod, sqrt

import numpy as np

from ..classes.ParamStore import ParamStore
from ..classes.Rng import Rng
from ..schemas.layers import (
    BatchNormSpec,
    Conv2DSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    InputSpec,
    LayerSummary,
    MaxPool2DSpec,
    ModelSpec,
    ModelSummary,
)
from .constants import (
    BATCHNORM_EPSILON,
    BATCHNORM_MOMENTUM,
    CONV_DROPOUT_RATE,
    DEFAULT_SEED,
    DENSE_DROPOUT_RATE,
    INPUT_SHAPE,
    NUM_CLASSES,
    STREAM_INIT,
    TRAINING_DTYPE,
)
from .exceptions import ShapeError
from .layer_ops import output_size, resolve_padding


def paper_model_spec(
    conv_dropout: float = CONV_DROPOUT_RATE,
    dense_dropout: float = DENSE_DROPOUT_RATE,
    momentum: float = BATCHNORM_MOMENTUM,
    epsilon: float = BATCHNORM_EPSILON,
) -> ModelSpec:
    """The 20-layer chain (input + 19 computational layers)."""

    def bn(index: int, channels: int) -> BatchNormSpec:
        return BatchNormSpec(name=f"batch_normalization_{index}", channels=channels,
                             momentum=momentum, epsilon=epsilon)

    return ModelSpec(layers=[
        InputSpec(shape=INPUT_SHAPE),
        Conv2DSpec(name="conv2d_4", out_channels=64, kernel_size=2),
        MaxPool2DSpec(name="max_pooling2d_4", pool_size=2, stride=2),
        bn(4, 64),
        Conv2DSpec(name="conv2d_5", out_channels=512, kernel_size=2),
        MaxPool2DSpec(name="max_pooling2d_5", pool_size=2, stride=2),
        bn(5, 512),
        DropoutSpec(name="dropout_4", rate=conv_dropout),
        Conv2DSpec(name="conv2d_6", out_channels=1024, kernel_size=2),
        MaxPool2DSpec(name="max_pooling2d_6", pool_size=2, stride=2),
        bn(6, 1024),
        DropoutSpec(name="dropout_5", rate=conv_dropout),
        Conv2DSpec(name="conv2d_7", out_channels=1024, kernel_size=1),
        MaxPool2DSpec(name="max_pooling2d_7", pool_size=2, stride=1, padding="same"),
        bn(7, 1024),
        DropoutSpec(name="dropout_6", rate=conv_dropout),
        FlattenSpec(name="flatten_1"),
        DenseSpec(name="dense_2", units=256, activation="relu"),
        DropoutSpec(name="dropout_7", rate=dense_dropout),
        DenseSpec(name="dense_3", units=NUM_CLASSES, activation="softmax"),
    ])


def infer_shapes(spec: ModelSpec) -> list[tuple[int, ...]]:
    """Per-sample output shape of every layer (channels-first).

    Raises:
        ShapeError: If any layer would produce an empty or mismatched shape
    """
    shape: tuple[int, ...] = spec.input_shape
    shapes = []
    for layer in spec.layers:
        if isinstance(layer, InputSpec):
            shape = layer.shape
        elif isinstance(layer, (Conv2DSpec, MaxPool2DSpec)):
            if len(shape) != 3:
                raise ShapeError(f"{layer.name} expects a (C, H, W) input, got {shape}")
            k = layer.kernel_size if isinstance(layer, Conv2DSpec) else layer.pool_size
            c, h, w = shape
            h_out = output_size(h, k, layer.stride, resolve_padding(layer.padding, h, k, layer.stride))
            w_out = output_size(w, k, layer.stride, resolve_padding(layer.padding, w, k, layer.stride))
            if h_out < 1 or w_out < 1:
                raise ShapeError(f"{layer.name} produces empty output from {shape}")
            c_out = layer.out_channels if isinstance(layer, Conv2DSpec) else c
            shape = (c_out, h_out, w_out)
        elif isinstance(layer, BatchNormSpec):
            if shape[0] != layer.channels:
                raise ShapeError(f"{layer.name} has {layer.channels} channels, input has {shape[0]}")
        elif isinstance(layer, FlattenSpec):
            shape = (prod(shape),)
        elif isinstance(layer, DenseSpec):
            if len(shape) != 1:
                raise ShapeError(f"{layer.name} expects a flat input, got {shape}")
            shape = (layer.units,)
        shapes.append(shape)
    return shapes


def init_params(spec: ModelSpec, rng: Rng, dtype=TRAINING_DTYPE) -> ParamStore:
    """He-normal kernels, zero biases, gamma=1, beta=0, moving mean 0 and variance 1."""
    params = ParamStore()
    shapes = infer_shapes(spec)
    in_shape: tuple[int, ...] = spec.input_shape
    for layer, out_shape in zip(spec.layers, shapes):
        if isinstance(layer, Conv2DSpec):
            k = layer.kernel_size
            fan_in = in_shape[0] * k * k
            kernel_shape = (layer.out_channels, in_shape[0], k, k)
            params.add(layer.name, "kernel", rng.normal(0.0, sqrt(2.0 / fan_in), kernel_shape, dtype))
            params.add(layer.name, "bias", np.zeros(layer.out_channels, dtype=dtype))
        elif isinstance(layer, DenseSpec):
            fan_in = in_shape[0]
            params.add(layer.name, "kernel", rng.normal(0.0, sqrt(2.0 / fan_in), (fan_in, layer.units), dtype))
            params.add(layer.name, "bias", np.zeros(layer.units, dtype=dtype))
        elif isinstance(layer, BatchNormSpec):
            params.add(layer.name, "gamma", np.ones(layer.channels, dtype=dtype))
            params.add(layer.name, "beta", np.zeros(layer.channels, dtype=dtype))
            params.add(layer.name, "moving_mean", np.zeros(layer.channels, dtype=dtype))
            params.add(layer.name, "moving_variance", np.ones(layer.channels, dtype=dtype))
        in_shape = out_shape
    return params


def build_paper_model(seed: int = DEFAULT_SEED, dtype=TRAINING_DTYPE, **overrides) -> tuple[ModelSpec, ParamStore]:
    """Layer chain and freshly initialised parameters of the skin-lesion CNN.

    Args:
        seed: Seed of the initialisation stream
        dtype: Parameter precision
        **overrides: Forwarded to paper_model_spec (dropout rates, batch-norm constants)

    Returns:
        The model spec and its parameter store
    """
    spec = paper_model_spec(**overrides)
    return spec, init_params(spec, Rng(seed).child(STREAM_INIT), dtype)


def summarize(spec: ModelSpec, params: ParamStore) -> ModelSummary:
    shapes = infer_shapes(spec)
    rows = [
        LayerSummary(name=layer.name, kind=layer.kind, output_shape=shape,
                     params=params.layer_param_count(layer.name))
        for layer, shape in zip(spec.layers, shapes)
        if not isinstance(layer, InputSpec)
    ]
    return ModelSummary(layers=rows, trainable_params=params.count(trainable=True),
                        non_trainable_params=params.count(trainable=False))


def render_summary(summary: ModelSummary) -> str:
    """Human-readable table: layer, output shape (channels last), parameter count."""
    lines = [f"{'Layer (type)':<36}{'Output Shape':<24}{'Param #':>12}", "=" * 72]
    for row in summary.layers:
        shape = row.output_shape
        shape_text = str((None, *shape[1:], shape[0])) if len(shape) == 3 else str((None, *shape))
        lines.append(f"{f'{row.name} ({row.kind})':<36}{shape_text:<24}{row.params:>12,}")
    lines += [
        "=" * 72,
        f"Total params: {summary.total_params:,}",
        f"Trainable params: {summary.trainable_params:,}",
        f"Non-trainable params: {summary.non_trainable_params:,}",
    ]
    return "\n".join(lines)
