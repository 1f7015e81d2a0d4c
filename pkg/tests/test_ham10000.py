"""Runs against a local HAM10000 copy; skipped unless DERMFORGE_HAM10000_DIR is set."""
import os
from pathlib import Path

import pytest

from dermforge.classes.Rng import Rng
from dermforge.classes.SkinLesionDataset import SkinLesionDataset
from dermforge.classes.Trainer import train
from dermforge.commands.common import METADATA_FILE
from dermforge.schemas.config import TrainConfig
from dermforge.utils.constants import DEFAULT_SEED
from dermforge.utils.enums import ClassLabel, Split
from dermforge.utils.inference import evaluate
from dermforge.utils.metadata import class_fraction, load_metadata, tabulate

HAM_DIR = os.getenv("DERMFORGE_HAM10000_DIR", "")

pytestmark = pytest.mark.skipif(not HAM_DIR, reason="DERMFORGE_HAM10000_DIR is not set")


@pytest.fixture(scope="module")
def records():
    return load_metadata(Path(HAM_DIR) / METADATA_FILE)


def test_full_metadata_is_nv_dominated(records):
    table = tabulate(records, "dx")
    assert int(table["count"].sum()) == len(records) == 10015
    assert set(table["dx"]) == {label.code for label in ClassLabel}
    assert class_fraction(records, ClassLabel.NV.code) > 0.65


@pytest.mark.slow
def test_fifteen_epochs_on_a_seeded_subset_beat_the_majority_class(records, tmp_path):
    ordered = sorted(records, key=lambda r: r.image_id)
    subset = [ordered[i] for i in Rng(DEFAULT_SEED, (99,)).permutation(len(ordered))[:1500]]
    dataset = SkinLesionDataset.from_metadata(subset, HAM_DIR, val_fraction=0.1, seed=DEFAULT_SEED)
    assert (len(dataset.train_indices), len(dataset.val_indices)) == (1350, 150)

    result = train(TrainConfig(epochs=15, out_dir=tmp_path), dataset)
    accuracy = max(evaluate(cp, dataset, Split.VALIDATION)[0].accuracy for cp in (result.best, result.final))
    val_labels = dataset.labels[dataset.val_indices]
    majority = float((val_labels == ClassLabel.NV.value).mean())
    assert accuracy >= 0.72
    assert accuracy > majority
