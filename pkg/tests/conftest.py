import numpy as np
import pytest

from dermforge.classes.ParamStore import ParamStore
from dermforge.classes.Rng import Rng
from dermforge.classes.SkinLesionDataset import SkinLesionDataset
from dermforge.schemas.checkpoint import Checkpoint
from dermforge.schemas.layers import (
    BatchNormSpec,
    Conv2DSpec,
    DenseSpec,
    DropoutSpec,
    FlattenSpec,
    InputSpec,
    MaxPool2DSpec,
    ModelSpec,
)
from dermforge.utils.architecture import init_params
from dermforge.utils.synthetic import generate_blobs, write_synthetic_dataset


@pytest.fixture
def rng() -> Rng:
    return Rng(1234)


@pytest.fixture
def tiny_spec() -> ModelSpec:
    """A small chain with one layer of every kind, on 8x8 inputs."""
    return ModelSpec(layers=[
        InputSpec(shape=(3, 8, 8)),
        Conv2DSpec(name="conv", out_channels=4, kernel_size=3),
        MaxPool2DSpec(name="pool", pool_size=2, stride=2),
        BatchNormSpec(name="bn", channels=4, momentum=0.9, epsilon=1e-3),
        DropoutSpec(name="drop", rate=0.25),
        FlattenSpec(name="flat"),
        DenseSpec(name="out", units=7, activation="softmax"),
    ])


@pytest.fixture
def tiny_params(tiny_spec) -> ParamStore:
    return init_params(tiny_spec, Rng(7))


@pytest.fixture
def tiny_checkpoint(tiny_spec, tiny_params) -> Checkpoint:
    return Checkpoint(
        model_spec=tiny_spec,
        params=tiny_params.as_dict(),
        normalization={"mean": (0.5, 0.4, 0.3), "std": (0.2, 0.25, 0.3)},
        config={"seed": 3, "val_fraction": 0.2, "class_weight_mode": "paper"},
        epoch=4,
        best_val_loss=0.75,
    )


@pytest.fixture
def blob_dataset() -> SkinLesionDataset:
    """42 balanced blob images (6 per class), 20% held out."""
    images, labels = generate_blobs(per_class=6, seed=0)
    ids = [f"ISIC_{i:07d}" for i in range(len(labels))]
    return SkinLesionDataset(images, labels, ids, val_fraction=0.2, seed=11)


@pytest.fixture
def blob_dir(tmp_path):
    """The blob dataset written in the HAM10000 layout: (data dir, metadata path)."""
    data_dir = tmp_path / "ham"
    metadata = write_synthetic_dataset(data_dir, per_class=6, seed=0)
    return data_dir, metadata


@pytest.fixture
def uniform_probs() -> np.ndarray:
    return np.full((4, 7), 1.0 / 7.0)
