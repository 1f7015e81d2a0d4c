"""Rebuilding a model from a checkpoint, split evaluation and single-image prediction."""
import logging
from pathlib import Path

import numpy as np

from ..classes.Model import Model
from ..classes.ParamStore import ParamStore
from ..classes.Rng import Rng
from ..classes.SkinLesionDataset import SkinLesionDataset
from ..schemas.checkpoint import Checkpoint
from ..schemas.reports import ClassificationReport, Prediction, RocSet
from .architecture import init_params
from .constants import CLASS_CODES, CLASS_NAMES, LOGGER_NAME, TRAINING_DTYPE
from .enums import ClassWeightMode, Split
from .exceptions import ArgumentError, CheckpointError, ShapeError
from .images import decode_and_resize
from .losses import weighted_loss_terms
from .metadata import class_weights_for
from .metrics import confusion, report, roc_ovr

logger = logging.getLogger(LOGGER_NAME)


def model_from_checkpoint(checkpoint: Checkpoint) -> Model:
    """Rebuild the model a checkpoint describes.

    Raises:
        CheckpointError: If the stored tensors or class mapping do not fit the stored architecture
    """
    if list(checkpoint.class_codes) != list(CLASS_CODES):
        raise CheckpointError(f"Checkpoint class mapping {checkpoint.class_codes} differs from {list(CLASS_CODES)}")
    try:
        expected = init_params(checkpoint.model_spec, Rng(0), TRAINING_DTYPE)
    except ShapeError as e:
        raise CheckpointError(f"Checkpoint architecture is inconsistent: {e}") from e

    if set(expected.names()) != set(checkpoint.params):
        missing = sorted(set(expected.names()) - set(checkpoint.params))
        extra = sorted(set(checkpoint.params) - set(expected.names()))
        raise CheckpointError(f"Checkpoint tensors do not match its architecture (missing {missing}, extra {extra})")
    for name in expected:
        if checkpoint.params[name].shape != expected[name].shape:
            raise CheckpointError(
                f"Tensor '{name}' has shape {checkpoint.params[name].shape}, architecture needs {expected[name].shape}"
            )
    params = ParamStore({name: checkpoint.params[name].astype(TRAINING_DTYPE) for name in expected})
    try:
        return Model(checkpoint.model_spec, params)
    except ShapeError as e:
        raise CheckpointError(str(e)) from e


def evaluate(
    checkpoint: Checkpoint,
    dataset: SkinLesionDataset,
    split: Split | str = Split.VALIDATION,
    model: Model | None = None,
) -> tuple[ClassificationReport, RocSet, float]:
    """Inference-mode metrics over one split, normalised with the checkpoint's statistics.

    Returns:
        The classification report, the one-vs-rest ROC curves and the weighted loss

    Raises:
        ArgumentError: If the split is empty
        CheckpointError: If the checkpoint cannot be turned into a model
    """
    model = model or model_from_checkpoint(checkpoint)
    indices = dataset.indices(split)
    if len(indices) == 0:
        raise ArgumentError(f"The {Split(split).value} split is empty")

    probs = model.predict_proba(dataset.normalized(indices, checkpoint.normalization))
    labels = dataset.labels[indices]
    mode = ClassWeightMode(checkpoint.config.get("class_weight_mode", ClassWeightMode.PAPER.value))
    loss_sum, weight_sum = weighted_loss_terms(probs, labels, class_weights_for(mode=mode))
    rep = report(confusion(probs.argmax(axis=1), labels))
    logger.info(f"Evaluated {len(indices)} {Split(split).value} samples: accuracy {rep.accuracy:.4f}")
    return rep, roc_ovr(probs, labels), loss_sum / weight_sum


def predict(checkpoint: Checkpoint, image_path: str | Path, model: Model | None = None) -> Prediction:
    """Decode, resize and normalise one image, then classify it (ties go to the lower class index).

    Raises:
        ImageDecodeError: If the image cannot be decoded
        CheckpointError: If the checkpoint cannot be turned into a model
    """
    model = model or model_from_checkpoint(checkpoint)
    image = decode_and_resize(image_path)
    batch = checkpoint.normalization.apply(image[np.newaxis]).astype(TRAINING_DTYPE, copy=False)
    probs = model.predict_proba(batch)[0].astype(np.float64)
    label = int(np.argmax(probs))
    return Prediction(
        image=str(image_path),
        label=label,
        code=CLASS_CODES[label],
        name=CLASS_NAMES[CLASS_CODES[label]],
        probabilities={code: float(p) for code, p in zip(CLASS_CODES, probs)},
    )
