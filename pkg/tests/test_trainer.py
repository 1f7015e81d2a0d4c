import math

import numpy as np
import pytest

from dermforge.classes.Augmenter import Augmenter
from dermforge.classes.BatchProducer import BatchProducer
from dermforge.classes.SkinLesionDataset import SkinLesionDataset
from dermforge.classes.Trainer import Trainer, train
from dermforge.schemas.config import AugmentConfig, TrainConfig
from dermforge.utils.checkpoint import load_checkpoint
from dermforge.utils.enums import Split
from dermforge.utils.exceptions import ArgumentError, NonFiniteError
from dermforge.utils.inference import evaluate
from dermforge.utils.synthetic import generate_blobs


def quick_config(**overrides) -> TrainConfig:
    values = dict(epochs=2, batch_size=8, val_fraction=0.2, seed=21, augment=None, threads=1)
    values.update(overrides)
    return TrainConfig(**values)


def test_published_batch_partition():
    indices = np.arange(9013)
    producer = BatchProducer(np.zeros((9013, 1, 1, 1), dtype=np.float32), np.zeros(9013), indices, 90, seed=1)
    sizes = [len(batch.labels) for batch in producer.epoch(1)]
    assert len(producer) == len(sizes) == 101
    assert sizes[:100] == [90] * 100 and sizes[-1] == 13


def test_each_epoch_visits_every_sample_once_in_a_seeded_order():
    indices = np.arange(3, 40)
    producer = BatchProducer(np.zeros((40, 1, 1, 1), dtype=np.float32), np.zeros(40), indices, 6, seed=1)
    first = np.concatenate([batch.indices for batch in producer.epoch(1)])
    assert sorted(first) == list(indices)
    np.testing.assert_array_equal(first, np.concatenate([b.indices for b in producer.epoch(1)]))
    assert not np.array_equal(first, np.concatenate([b.indices for b in producer.epoch(2)]))


def test_prefetching_workers_do_not_change_batches(blob_dataset):
    images = blob_dataset.normalized(np.arange(len(blob_dataset)))
    augmenter = Augmenter(AugmentConfig(), blob_dataset.normalization.bounds())
    serial = BatchProducer(images, blob_dataset.labels, blob_dataset.train_indices, 5, 3, augmenter, workers=1)
    threaded = BatchProducer(images, blob_dataset.labels, blob_dataset.train_indices, 5, 3, augmenter, workers=4)
    for a, b in zip(serial.epoch(2), threaded.epoch(2), strict=True):
        np.testing.assert_array_equal(a.indices, b.indices)
        np.testing.assert_array_equal(a.images, b.images)


def test_empty_split_is_rejected():
    with pytest.raises(ArgumentError):
        BatchProducer(np.zeros((1, 1, 1, 1)), np.zeros(1), np.array([], dtype=int), 4, seed=0)


def test_history_and_best_checkpoint(blob_dataset):
    result = train(quick_config(), blob_dataset)
    assert [r.epoch for r in result.history] == [1, 2]
    for record in result.history:
        assert math.isfinite(record.train_loss) and math.isfinite(record.val_loss)
        assert 0.0 <= record.val_accuracy <= 1.0
    assert result.best.best_val_loss == min(r.val_loss for r in result.history)
    assert result.final.epoch == 2
    assert [r.learning_rate for r in result.history] == [1e-3, 1e-3]


def test_evaluating_the_best_checkpoint_reproduces_its_val_loss(blob_dataset):
    result = train(quick_config(), blob_dataset)
    best_record = min(result.history, key=lambda r: r.val_loss)
    rep, roc, loss = evaluate(result.best, blob_dataset, Split.VALIDATION)
    assert loss == pytest.approx(best_record.val_loss, abs=1e-5)
    assert rep.accuracy == pytest.approx(best_record.val_accuracy)
    assert evaluate(result.best, blob_dataset, Split.VALIDATION)[0] == rep
    assert len(roc.curves) == 7


def test_same_seed_gives_bit_identical_losses(blob_dataset):
    config = quick_config(augment=AugmentConfig(), threads=2)
    first = train(config, blob_dataset).history
    second = train(config, blob_dataset).history
    assert [r.train_loss for r in first] == [r.train_loss for r in second]
    assert [r.val_loss for r in first] == [r.val_loss for r in second]


def test_validation_samples_never_contribute_gradients(blob_dataset):
    trainer = Trainer(quick_config(), blob_dataset)
    trainer.train()
    assert not trainer.gradient_counts[blob_dataset.val_indices].any()
    assert (trainer.gradient_counts[blob_dataset.train_indices] == 2).all()


def test_zero_learning_rate_changes_nothing(blob_dataset):
    trainer = Trainer(quick_config(epochs=1, initial_lr=0.0, bn_momentum=1.0), blob_dataset)
    before = trainer.model.params.copy()
    val_before = trainer.evaluate_split(Split.VALIDATION)
    result = trainer.train()
    for name in before:
        np.testing.assert_array_equal(trainer.model.params[name], before[name])
    assert (result.history[0].val_loss, result.history[0].val_accuracy) == val_before


def test_non_finite_loss_names_epoch_and_batch(blob_dataset, monkeypatch):
    monkeypatch.setattr(
        "dermforge.classes.Trainer.weighted_cce",
        lambda probs, targets, weights: (float("nan"), np.zeros_like(probs)),
    )
    with pytest.raises(NonFiniteError, match="epoch 1, batch 0"):
        train(quick_config(), blob_dataset)


def test_checkpoints_are_written_and_resumable(tmp_path, blob_dataset):
    out = tmp_path / "run"
    first = train(quick_config(epochs=1, out_dir=out), blob_dataset)
    assert (out / "best.dfn").is_file() and (out / "final.dfn").is_file()
    saved = load_checkpoint(out / "final.dfn")
    assert saved.epoch == 1
    assert saved.params["dense_3/kernel"].tobytes() == first.final.params["dense_3/kernel"].tobytes()

    resumed = train(quick_config(epochs=1), blob_dataset, resume=saved)
    assert [r.epoch for r in resumed.history] == [2]
    assert resumed.final.epoch == 2


def test_single_image_leaves_no_train_split():
    images, labels = generate_blobs(per_class=1, seed=0)
    dataset = SkinLesionDataset(images, labels, [f"i{i}" for i in range(7)], val_fraction=0.1, seed=0)
    assert (len(dataset.train_indices), len(dataset.val_indices)) == (6, 1)
    with pytest.raises(ArgumentError, match="train split is empty"):
        SkinLesionDataset(images[:1], labels[:1], ["only"], val_fraction=0.5, seed=0)


@pytest.mark.slow
def test_overfits_a_forty_image_subset():
    images, labels = generate_blobs(per_class=7, seed=5)
    # 45 images with a 10% hold-out leaves 40 for training
    dataset = SkinLesionDataset(images[:45], labels[:45], [f"b{i}" for i in range(45)], val_fraction=0.1, seed=2)
    assert len(dataset.train_indices) == 40
    config = TrainConfig(epochs=150, batch_size=8, val_fraction=0.1, seed=2, augment=None)
    trainer = Trainer(config, dataset)
    result = trainer.train()
    rep, _, _ = evaluate(result.final, dataset, Split.TRAIN)
    assert max(r.train_accuracy for r in result.history) >= 0.95 or rep.accuracy >= 0.95


def test_resume_without_improvement_keeps_the_stored_best(blob_dataset):
    first = train(quick_config(epochs=1), blob_dataset)
    stored = first.final.model_copy(update={"best_val_loss": 0.0})
    resumed = train(quick_config(epochs=1), blob_dataset, resume=stored)
    assert (resumed.best.epoch, resumed.best.best_val_loss) == (1, 0.0)
    assert resumed.best.params["dense_3/kernel"].tobytes() == stored.params["dense_3/kernel"].tobytes()
    assert resumed.final.epoch == 2
    assert resumed.final.params["dense_3/kernel"].tobytes() != stored.params["dense_3/kernel"].tobytes()


def test_checked_training_names_the_first_non_finite_operation(blob_dataset):
    trainer = Trainer(quick_config(checked=True), blob_dataset)
    trainer.model.params["conv2d_4/kernel"][0, 0, 0, 0] = np.nan
    with pytest.raises(NonFiniteError, match=r"produced by \w+ at epoch 1, batch 0"):
        trainer.train_epoch(1)


def test_unchecked_training_only_sees_the_loss(blob_dataset):
    trainer = Trainer(quick_config(), blob_dataset)
    trainer.model.params["conv2d_4/kernel"][0, 0, 0, 0] = np.nan
    with pytest.raises(NonFiniteError, match="Training loss became nan at epoch 1, batch 0"):
        trainer.train_epoch(1)
