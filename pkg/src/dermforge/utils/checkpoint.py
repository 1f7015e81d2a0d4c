"""Binary checkpoint format.

Layout, all integers little-endian:

    magic             4 bytes  b"DFN1"
    format version    uint32
    header length     uint32, then UTF-8 JSON (architecture, config snapshot,
                      epoch, best validation loss, class-label mapping)
    channel count     uint32, then float64 means, then float64 stds
    tensor count      uint32, then per tensor:
                      name length uint32, UTF-8 name, rank uint32,
                      rank x uint32 dims, float32 data
"""
import json
import logging
import math
import struct
from pathlib import Path

import numpy as np

from ..schemas.checkpoint import Checkpoint
from ..schemas.layers import ModelSpec
from ..schemas.records import NormalizationStats
from .artifacts import atomic_write_bytes
from .constants import CHECKPOINT_FORMAT_VERSION, CHECKPOINT_MAGIC, LOGGER_NAME
from .exceptions import CheckpointError, CheckpointTruncatedError, CheckpointVersionError

logger = logging.getLogger(LOGGER_NAME)

_U32 = struct.Struct("<I")
_FLOAT32 = np.dtype("<f4")
_FLOAT64 = np.dtype("<f8")


def serialize_checkpoint(cp: Checkpoint) -> bytes:
    header = json.dumps({
        "architecture": cp.model_spec.model_dump(mode="json"),
        "config": cp.config,
        "epoch": cp.epoch,
        "best_val_loss": cp.best_val_loss if math.isfinite(cp.best_val_loss) else None,
        "class_codes": cp.class_codes,
    }, sort_keys=True).encode("utf-8")

    chunks = [CHECKPOINT_MAGIC, _U32.pack(cp.format_version), _U32.pack(len(header)), header]
    mean = np.asarray(cp.normalization.mean, dtype=_FLOAT64)
    std = np.asarray(cp.normalization.std, dtype=_FLOAT64)
    chunks += [_U32.pack(mean.size), mean.tobytes(), std.tobytes(), _U32.pack(len(cp.params))]
    for name, tensor in cp.params.items():
        encoded = name.encode("utf-8")
        chunks += [_U32.pack(len(encoded)), encoded, _U32.pack(tensor.ndim)]
        chunks += [_U32.pack(d) for d in tensor.shape]
        chunks.append(np.ascontiguousarray(tensor, dtype=_FLOAT32).tobytes())
    return b"".join(chunks)


class _Reader:
    def __init__(self, data: bytes, source: str):
        self.data = data
        self.offset = 0
        self.source = source

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CheckpointTruncatedError(f"Checkpoint '{self.source}' is truncated at byte {len(self.data)}")
        chunk = self.data[self.offset:self.offset + size]
        self.offset += size
        return chunk

    def u32(self) -> int:
        return _U32.unpack(self.take(_U32.size))[0]

    def array(self, dtype: np.dtype, count: int) -> np.ndarray:
        return np.frombuffer(self.take(dtype.itemsize * count), dtype=dtype).copy()


def deserialize_checkpoint(data: bytes, source: str = "<bytes>") -> Checkpoint:
    """Parse checkpoint bytes.

    Raises:
        CheckpointError: Bad magic, malformed header or trailing data
        CheckpointVersionError: Format version newer than this build reads
        CheckpointTruncatedError: Data ends early
    """
    reader = _Reader(data, source)
    if reader.take(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
        raise CheckpointError(f"'{source}' is not a dermforge checkpoint (bad magic)")
    version = reader.u32()
    if version > CHECKPOINT_FORMAT_VERSION:
        raise CheckpointVersionError(
            f"'{source}' uses checkpoint format {version}; this build reads up to {CHECKPOINT_FORMAT_VERSION}"
        )
    try:
        header = json.loads(reader.take(reader.u32()).decode("utf-8"))
        if not isinstance(header, dict):
            raise CheckpointError(f"'{source}' has a header that is not a JSON object")
        spec = ModelSpec.model_validate(header["architecture"])
    except CheckpointError:
        raise
    except (ValueError, KeyError) as e:
        raise CheckpointError(f"'{source}' has a malformed header: {e}") from e

    channels = reader.u32()
    mean = reader.array(_FLOAT64, channels)
    std = reader.array(_FLOAT64, channels)
    params: dict[str, np.ndarray] = {}
    for _ in range(reader.u32()):
        raw_name = reader.take(reader.u32())
        try:
            name = raw_name.decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointError(f"'{source}' has a tensor name that is not UTF-8: {raw_name!r}") from e
        dims = tuple(reader.u32() for _ in range(reader.u32()))
        params[name] = reader.array(_FLOAT32, math.prod(dims)).reshape(dims).astype(np.float32)
    if reader.offset != len(data):
        raise CheckpointError(f"'{source}' has {len(data) - reader.offset} unexpected trailing bytes")

    best = header.get("best_val_loss")
    try:
        return Checkpoint(
            format_version=version,
            model_spec=spec,
            params=params,
            normalization=NormalizationStats(mean=tuple(mean.tolist()), std=tuple(std.tolist())),
            config=header.get("config", {}),
            epoch=header.get("epoch", 0),
            best_val_loss=float("inf") if best is None else float(best),
            class_codes=header.get("class_codes", []),
        )
    except (ValueError, TypeError) as e:
        raise CheckpointError(f"'{source}' has malformed header fields: {e}") from e


def save_checkpoint(cp: Checkpoint, path: str | Path) -> Path:
    """Write a checkpoint atomically; tensors are stored as float32."""
    path = atomic_write_bytes(path, serialize_checkpoint(cp))
    logger.info(f"Checkpoint written to {path}")
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    return deserialize_checkpoint(path.read_bytes(), str(path))
