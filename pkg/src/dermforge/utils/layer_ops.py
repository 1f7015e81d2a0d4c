"""Forward and backward kernels for every layer type.

Each forward returns its output and a cache dict; the matching backward consumes the
cache. Convolution is cross-correlation lowered to a matrix product over im2col patches.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .enums import Mode
from .exceptions import ArgumentError, ShapeError
from .tensor_ops import check_finite, matmul, reduce, reshape


def resolve_padding(padding: str | int, size: int, kernel: int, stride: int) -> tuple[int, int]:
    """Padding before and after one spatial axis.

    "same" follows the usual convention: output size ceil(size / stride), with the odd
    remainder placed after the data.
    """
    if padding == "valid":
        return 0, 0
    if padding == "same":
        out = -(-size // stride)
        total = max((out - 1) * stride + kernel - size, 0)
        return total // 2, total - total // 2
    if isinstance(padding, int) and padding >= 0:
        return padding, padding
    raise ArgumentError(f"Unsupported padding {padding!r}")


def output_size(size: int, kernel: int, stride: int, pads: tuple[int, int]) -> int:
    return (size + pads[0] + pads[1] - kernel) // stride + 1


def _pad(x: np.ndarray, pads_h: tuple[int, int], pads_w: tuple[int, int], value: float) -> np.ndarray:
    if pads_h == (0, 0) and pads_w == (0, 0):
        return x
    return np.pad(x, ((0, 0), (0, 0), pads_h, pads_w), mode="constant", constant_values=value)


def _windows(xp: np.ndarray, kernel: int, stride: int) -> np.ndarray:
    """(N, C, H_out, W_out, k, k) strided view over spatial windows."""
    return sliding_window_view(xp, (kernel, kernel), axis=(2, 3))[:, :, ::stride, ::stride]


def relu_forward(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mask = x > 0
    return x * mask, mask


def relu_backward(dout: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return dout * mask


def conv2d_forward(
    x: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    stride: int = 1,
    padding: str | int = "valid",
) -> tuple[np.ndarray, dict]:
    """Cross-correlation of an NCHW batch with (out, in, k, k) filters plus bias.

    Raises:
        ShapeError: If the input channel count differs from the filters' or the
            output would have no spatial extent
    """
    if x.ndim != 4:
        raise ShapeError(f"conv2d expects NCHW input, got shape {x.shape}")
    n, c, h, wd = x.shape
    out_c, in_c, k, k2 = w.shape
    if c != in_c:
        raise ShapeError(f"conv2d channel mismatch: input has {c}, filters expect {in_c}")
    if k != k2:
        raise ShapeError(f"conv2d expects square kernels, got {k}x{k2}")
    pads_h = resolve_padding(padding, h, k, stride)
    pads_w = resolve_padding(padding, wd, k, stride)
    h_out = output_size(h, k, stride, pads_h)
    w_out = output_size(wd, k, stride, pads_w)
    if h_out < 1 or w_out < 1:
        raise ShapeError(f"conv2d kernel {k} does not fit input {h}x{wd}")

    xp = _pad(x, pads_h, pads_w, 0.0)
    patches = _windows(xp, k, stride).transpose(0, 2, 3, 1, 4, 5)
    cols = np.ascontiguousarray(patches).reshape(n * h_out * w_out, in_c * k * k)
    out = matmul(cols, reshape(w, (out_c, in_c * k * k)).T) + b
    out = out.reshape(n, h_out, w_out, out_c).transpose(0, 3, 1, 2)
    cache = {
        "cols": cols,
        "w": w,
        "x_shape": x.shape,
        "padded_shape": xp.shape,
        "pads": (pads_h, pads_w),
        "stride": stride,
    }
    return check_finite(np.ascontiguousarray(out), "conv2d"), cache


def conv2d_backward(dout: np.ndarray, cache: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients with respect to the input, the filters and the bias."""
    w = cache["w"]
    out_c, in_c, k, _ = w.shape
    stride = cache["stride"]
    n, _, h_out, w_out = dout.shape
    dout_mat = dout.transpose(0, 2, 3, 1).reshape(-1, out_c)

    dw = matmul(dout_mat.T, cache["cols"]).reshape(w.shape)
    db = dout_mat.sum(axis=0)
    dcols = matmul(dout_mat, w.reshape(out_c, -1)).reshape(n, h_out, w_out, in_c, k, k)

    dxp = np.zeros(cache["padded_shape"], dtype=dout.dtype)
    for i in range(k):
        for j in range(k):
            dxp[:, :, i:i + stride * h_out:stride, j:j + stride * w_out:stride] += (
                dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            )
    (top, bottom), (left, right) = cache["pads"]
    _, _, hp, wp = dxp.shape
    dx = dxp[:, :, top:hp - bottom, left:wp - right]
    return np.ascontiguousarray(dx), dw, db


def maxpool_forward(
    x: np.ndarray,
    pool_size: int,
    stride: int,
    padding: str | int = "valid",
) -> tuple[np.ndarray, dict]:
    """Window maximum; padded cells hold -inf so they never win.

    The cache holds the flat in-window argmax of every output cell (first maximum on
    ties), which routes gradients in the backward pass.
    """
    if x.ndim != 4:
        raise ShapeError(f"maxpool expects NCHW input, got shape {x.shape}")
    n, c, h, wd = x.shape
    pads_h = resolve_padding(padding, h, pool_size, stride)
    pads_w = resolve_padding(padding, wd, pool_size, stride)
    h_out = output_size(h, pool_size, stride, pads_h)
    w_out = output_size(wd, pool_size, stride, pads_w)
    if h_out < 1 or w_out < 1:
        raise ShapeError(f"maxpool window {pool_size} does not fit input {h}x{wd}")

    xp = _pad(x, pads_h, pads_w, -np.inf)
    flat = _windows(xp, pool_size, stride)[:, :, :h_out, :w_out].reshape(n, c, h_out, w_out, -1)
    argmax = flat.argmax(axis=-1)
    out = np.take_along_axis(flat, argmax[..., None], axis=-1)[..., 0]
    cache = {
        "argmax": argmax,
        "x_shape": x.shape,
        "padded_shape": xp.shape,
        "pads": (pads_h, pads_w),
        "pool_size": pool_size,
        "stride": stride,
    }
    return np.ascontiguousarray(out), cache


def maxpool_backward(dout: np.ndarray, cache: dict) -> np.ndarray:
    """Deposit each upstream gradient element on its window's winner."""
    pool, stride = cache["pool_size"], cache["stride"]
    argmax = cache["argmax"]
    n, c, h_out, w_out = dout.shape
    rows = np.arange(h_out)[:, None] * stride + argmax // pool
    cols = np.arange(w_out)[None, :] * stride + argmax % pool
    batch_idx = np.arange(n)[:, None, None, None]
    chan_idx = np.arange(c)[None, :, None, None]

    dxp = np.zeros(cache["padded_shape"], dtype=dout.dtype)
    np.add.at(dxp, (batch_idx, chan_idx, rows, cols), dout)
    (top, bottom), (left, right) = cache["pads"]
    _, _, hp, wp = dxp.shape
    return np.ascontiguousarray(dxp[:, :, top:hp - bottom, left:wp - right])


def _channel_axes(x: np.ndarray) -> tuple[int, ...]:
    return (0, 2, 3) if x.ndim == 4 else (0,)


def _per_channel(v: np.ndarray, ndim: int) -> np.ndarray:
    return v.reshape(1, -1, 1, 1) if ndim == 4 else v.reshape(1, -1)


def batchnorm_forward(
    x: np.ndarray,
    gamma: np.ndarray,
    beta: np.ndarray,
    moving_mean: np.ndarray,
    moving_var: np.ndarray,
    mode: Mode,
    momentum: float,
    epsilon: float,
    update_moving: bool = True,
) -> tuple[np.ndarray, dict]:
    """Per-channel normalisation of an NCHW (or N, features) tensor.

    Training mode uses batch statistics over every axis except the channel axis and, when
    `update_moving` is set, blends them into the moving statistics in place. Inference
    mode uses the moving statistics.
    """
    if x.shape[1] != gamma.shape[0]:
        raise ShapeError(f"batchnorm channel mismatch: input has {x.shape[1]}, layer has {gamma.shape[0]}")
    axes = _channel_axes(x)
    if mode is Mode.TRAINING:
        mean = reduce(x, axes, "mean")
        var = reduce(np.square(x - _per_channel(mean, x.ndim)), axes, "mean")
        if update_moving:
            moving_mean *= momentum
            moving_mean += (1.0 - momentum) * mean
            moving_var *= momentum
            moving_var += (1.0 - momentum) * var
    else:
        mean, var = moving_mean, moving_var

    inv_std = 1.0 / np.sqrt(var + epsilon)
    x_hat = (x - _per_channel(mean, x.ndim)) * _per_channel(inv_std, x.ndim)
    out = x_hat * _per_channel(gamma, x.ndim) + _per_channel(beta, x.ndim)
    cache = {"x_hat": x_hat, "inv_std": inv_std, "gamma": gamma, "mode": mode}
    return check_finite(out.astype(x.dtype, copy=False), "batchnorm"), cache


def batchnorm_backward(dout: np.ndarray, cache: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradients with respect to the input, gamma and beta (batch statistics)."""
    x_hat, inv_std, gamma = cache["x_hat"], cache["inv_std"], cache["gamma"]
    axes = _channel_axes(dout)
    count = dout.size // dout.shape[1]

    dbeta = dout.sum(axis=axes)
    dgamma = (dout * x_hat).sum(axis=axes)
    dx_hat = dout * _per_channel(gamma, dout.ndim)
    dx = (
        _per_channel(inv_std / count, dout.ndim)
        * (
            count * dx_hat
            - _per_channel(dx_hat.sum(axis=axes), dout.ndim)
            - x_hat * _per_channel((dx_hat * x_hat).sum(axis=axes), dout.ndim)
        )
    )
    return dx.astype(dout.dtype, copy=False), dgamma, dbeta


def dropout_forward(x: np.ndarray, rate: float, rng, mode: Mode) -> tuple[np.ndarray, np.ndarray | None]:
    """Inverted dropout: survivors are scaled by 1/(1 - rate); inference is identity.

    Returns:
        The output and the scaled keep-mask (None when nothing was dropped)
    """
    if not 0.0 <= rate < 1.0:
        raise ArgumentError(f"Dropout rate must lie in [0, 1), got {rate}")
    if mode is Mode.INFERENCE or rate == 0.0:
        return x, None
    keep = rng.random(x.shape) >= rate
    mask = keep.astype(x.dtype) / x.dtype.type(1.0 - rate)
    return x * mask, mask


def dropout_backward(dout: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    return dout if mask is None else dout * mask


def dense_forward(
    x: np.ndarray, w: np.ndarray, b: np.ndarray, activation: str = "linear"
) -> tuple[np.ndarray, dict]:
    """Affine map xw + b followed by relu, softmax or nothing.

    The cache keeps the relu mask, or the pre-softmax logits, for the backward pass.
    `dense_backward` covers the affine part only: a softmax output is differentiated
    together with the loss.
    """
    if x.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ShapeError(f"dense expects input (N, {w.shape[0]}), got {x.shape}")
    out = matmul(x, w) + b
    cache = {"x": x, "w": w}
    if activation == "relu":
        out, cache["relu_mask"] = relu_forward(out)
    elif activation == "softmax":
        cache["logits"] = out
        out = softmax(out)
    elif activation != "linear":
        raise ArgumentError(f"Unknown dense activation '{activation}'")
    return out, cache


def dense_backward(dout: np.ndarray, cache: dict) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    dw = matmul(cache["x"].T, dout)
    db = dout.sum(axis=0)
    dx = matmul(dout, cache["w"].T)
    return dx, dw, db


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return check_finite(exp / exp.sum(axis=-1, keepdims=True), "softmax")
