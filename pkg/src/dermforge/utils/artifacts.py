"""Atomic file output plus the history, report and curve artifacts."""
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from ..schemas.reports import ClassificationReport, EpochRecord, RocSet  # noqa: E402
from .constants import LOGGER_NAME, REPORT_JSON_FILE, REPORT_TEXT_FILE, ROC_CSV_FILE  # noqa: E402
from .metrics import render_report, roc_to_csv  # noqa: E402

logger = logging.getLogger(LOGGER_NAME)

HISTORY_COLUMNS = ["epoch", "train_loss", "train_acc", "val_loss", "val_acc", "lr"]


def atomic_write_bytes(path: str | Path, data: bytes) -> Path:
    """Write via a temporary file in the destination directory, then rename over `path`.

    On failure the temporary file is removed and `path` is left untouched.
    """
    path = Path(path)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp_name, path)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    return path


def atomic_write_text(path: str | Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def history_frame(history: Sequence[EpochRecord]) -> pd.DataFrame:
    return pd.DataFrame(
        [[r.epoch, r.train_loss, r.train_accuracy, r.val_loss, r.val_accuracy, r.learning_rate] for r in history],
        columns=HISTORY_COLUMNS,
    )


def write_history(history: Sequence[EpochRecord], path: str | Path) -> Path:
    """Per-epoch losses, accuracies and learning rate as CSV (no timing, so reruns match)."""
    return atomic_write_text(path, history_frame(history).to_csv(index=False, float_format="%.10g"))


def write_report(rep: ClassificationReport, roc: RocSet, out_dir: str | Path) -> list[Path]:
    """report.json (structured, full precision), report.txt (table) and roc.csv."""
    out_dir = Path(out_dir)
    return [
        atomic_write_text(out_dir / REPORT_JSON_FILE, rep.model_dump_json(indent=2) + "\n"),
        atomic_write_text(out_dir / REPORT_TEXT_FILE, render_report(rep) + "\n"),
        atomic_write_text(out_dir / ROC_CSV_FILE, roc_to_csv(roc)),
    ]


def _save_svg(fig, path: str | Path) -> Path:
    buffer = io.BytesIO()
    with plt.rc_context({"svg.hashsalt": "dermforge"}):
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    return atomic_write_bytes(path, buffer.getvalue())


def render_curves(history: Sequence[EpochRecord], path: str | Path) -> Path:
    """Accuracy and loss against epoch for the training and validation splits."""
    frame = history_frame(history)
    fig, (acc_ax, loss_ax) = plt.subplots(1, 2, figsize=(10, 4))
    acc_ax.plot(frame["epoch"], frame["train_acc"], label="train")
    acc_ax.plot(frame["epoch"], frame["val_acc"], label="validation")
    acc_ax.set(xlabel="epoch", ylabel="accuracy", title="Accuracy")
    loss_ax.plot(frame["epoch"], frame["train_loss"], label="train")
    loss_ax.plot(frame["epoch"], frame["val_loss"], label="validation")
    loss_ax.set(xlabel="epoch", ylabel="loss", title="Loss")
    for ax in (acc_ax, loss_ax):
        ax.legend()
    fig.tight_layout()
    return _save_svg(fig, path)


def render_roc(roc: RocSet, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 6))
    for curve in roc.curves:
        if curve.auc is not None:
            ax.plot(curve.fpr, curve.tpr, label=f"{curve.label} (auc {curve.auc:.3f})")
    if roc.macro is not None:
        ax.plot(roc.macro.fpr, roc.macro.tpr, "k--", label=f"macro (auc {roc.macro.auc:.3f})")
    ax.plot([0, 1], [0, 1], color="grey", linewidth=0.5)
    ax.set(xlabel="false positive rate", ylabel="true positive rate", title="ROC (one-vs-rest)")
    ax.legend(loc="lower right")
    return _save_svg(fig, path)
