import json
import struct

import numpy as np
import pytest

from dermforge.utils.architecture import build_paper_model
from dermforge.utils.artifacts import atomic_write_bytes
from dermforge.utils.checkpoint import deserialize_checkpoint, load_checkpoint, save_checkpoint, serialize_checkpoint
from dermforge.utils.exceptions import (
    CheckpointError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    ShapeError,
)
from dermforge.utils.inference import model_from_checkpoint


def test_round_trip_is_bit_exact(tmp_path, tiny_checkpoint):
    path = save_checkpoint(tiny_checkpoint, tmp_path / "model.dfn")
    loaded = load_checkpoint(path)
    assert loaded.model_spec == tiny_checkpoint.model_spec
    assert list(loaded.params) == list(tiny_checkpoint.params)
    for name, tensor in tiny_checkpoint.params.items():
        assert loaded.params[name].dtype == np.float32
        assert loaded.params[name].tobytes() == tensor.tobytes()
    assert loaded.normalization == tiny_checkpoint.normalization
    assert loaded.config == tiny_checkpoint.config
    assert (loaded.epoch, loaded.best_val_loss) == (4, 0.75)
    assert loaded.class_codes == ["akiec", "bcc", "bkl", "df", "mel", "nv", "vasc"]


def test_file_starts_with_magic_and_version(tiny_checkpoint):
    data = serialize_checkpoint(tiny_checkpoint)
    assert data[:4] == b"DFN1"
    assert struct.unpack("<I", data[4:8])[0] == 1


def test_corrupted_magic(tiny_checkpoint):
    data = bytearray(serialize_checkpoint(tiny_checkpoint))
    data[0:4] = b"XXXX"
    with pytest.raises(CheckpointError, match="magic"):
        deserialize_checkpoint(bytes(data))


def test_newer_format_version(tiny_checkpoint):
    data = bytearray(serialize_checkpoint(tiny_checkpoint))
    data[4:8] = struct.pack("<I", 2)
    with pytest.raises(CheckpointVersionError):
        deserialize_checkpoint(bytes(data))


def test_truncated_file_is_an_io_error(tmp_path, tiny_checkpoint):
    data = serialize_checkpoint(tiny_checkpoint)
    path = tmp_path / "cut.dfn"
    path.write_bytes(data[:-10])
    with pytest.raises(CheckpointTruncatedError) as info:
        load_checkpoint(path)
    assert isinstance(info.value, OSError)


def test_trailing_bytes_are_rejected(tiny_checkpoint):
    with pytest.raises(CheckpointError):
        deserialize_checkpoint(serialize_checkpoint(tiny_checkpoint) + b"\0")


def test_missing_checkpoint(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "none.dfn")


def test_paper_model_round_trip(tmp_path, tiny_checkpoint):
    spec, params = build_paper_model(seed=2)
    checkpoint = tiny_checkpoint.model_copy(update={"model_spec": spec, "params": params.as_dict()})
    loaded = load_checkpoint(save_checkpoint(checkpoint, tmp_path / "paper.dfn"))
    assert len(loaded.model_spec.layers) == 20
    np.testing.assert_array_equal(loaded.params["conv2d_6/kernel"], params["conv2d_6/kernel"])
    model = model_from_checkpoint(loaded)
    assert model.params.count() == 4_341_319


def test_architecture_mismatch_is_a_checkpoint_error(tiny_checkpoint):
    params = dict(tiny_checkpoint.params)
    params["out/kernel"] = np.zeros((5, 7), dtype=np.float32)
    with pytest.raises(CheckpointError):
        model_from_checkpoint(tiny_checkpoint.model_copy(update={"params": params}))
    del params["out/kernel"]
    with pytest.raises(CheckpointError):
        model_from_checkpoint(tiny_checkpoint.model_copy(update={"params": params}))
    with pytest.raises(CheckpointError):
        model_from_checkpoint(tiny_checkpoint.model_copy(update={"class_codes": ["a"] * 7}))


def test_atomic_write_replaces_whole_files(tmp_path):
    target = tmp_path / "artifact.bin"
    atomic_write_bytes(target, b"first")
    atomic_write_bytes(target, b"second")
    assert target.read_bytes() == b"second"
    assert [p.name for p in tmp_path.iterdir()] == ["artifact.bin"]


def test_atomic_write_into_missing_directory_leaves_nothing(tmp_path):
    with pytest.raises(OSError):
        atomic_write_bytes(tmp_path / "absent" / "file.bin", b"data")
    assert list(tmp_path.iterdir()) == []


def test_shape_error_is_a_value_error():
    assert issubclass(ShapeError, ValueError)


def test_tensor_name_that_is_not_utf8(tiny_checkpoint):
    data = bytearray(serialize_checkpoint(tiny_checkpoint))
    name = next(iter(tiny_checkpoint.params)).encode("utf-8")
    data[data.rindex(name)] = 0xFF
    with pytest.raises(CheckpointError, match="UTF-8"):
        deserialize_checkpoint(bytes(data))


@pytest.mark.parametrize("header", [b"[]", b"7", b'"architecture"', b"{}"])
def test_header_that_is_not_a_usable_object(tiny_checkpoint, header):
    data = serialize_checkpoint(tiny_checkpoint)
    (length,) = struct.unpack("<I", data[8:12])
    forged = data[:8] + struct.pack("<I", len(header)) + header + data[12 + length:]
    with pytest.raises(CheckpointError):
        deserialize_checkpoint(forged)


def test_header_field_of_the_wrong_type(tiny_checkpoint):
    data = serialize_checkpoint(tiny_checkpoint)
    (length,) = struct.unpack("<I", data[8:12])
    header = json.loads(data[12:12 + length])
    header["epoch"] = "late"
    encoded = json.dumps(header).encode("utf-8")
    forged = data[:8] + struct.pack("<I", len(encoded)) + encoded + data[12 + length:]
    with pytest.raises(CheckpointError, match="malformed header fields"):
        deserialize_checkpoint(forged)
