"""Confusion matrix, per-class report and one-vs-rest ROC curves."""
import numpy as np

from ..schemas.reports import AverageMetrics, ClassificationReport, ClassMetrics, RocCurve, RocSet
from .constants import CLASS_CODES, NUM_CLASSES
from .exceptions import ArgumentError


def confusion(pred_labels, true_labels, num_classes: int = NUM_CLASSES) -> np.ndarray:
    """Counts with rows = true class, columns = predicted class.

    Raises:
        ArgumentError: On unequal lengths or a label outside [0, num_classes)
    """
    pred = np.asarray(pred_labels, dtype=np.int64).ravel()
    true = np.asarray(true_labels, dtype=np.int64).ravel()
    if pred.shape != true.shape:
        raise ArgumentError(f"{pred.size} predictions for {true.size} labels")
    for name, labels in (("predicted", pred), ("true", true)):
        if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
            raise ArgumentError(f"A {name} label lies outside [0, {num_classes})")
    cm = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(cm, (true, pred), 1)
    return cm


def _safe_ratio(numerator: float, denominator: float) -> float:
    return float(numerator / denominator) if denominator > 0 else 0.0


def report(cm: np.ndarray, codes=CLASS_CODES) -> ClassificationReport:
    """Precision, recall, F1 and support per class plus macro/weighted averages.

    A zero denominator yields 0 for that metric and marks the class degenerate.

    Raises:
        ArgumentError: If the matrix holds no samples
    """
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total == 0:
        raise ArgumentError("Cannot report on an empty confusion matrix")
    true_counts = cm.sum(axis=1)
    pred_counts = cm.sum(axis=0)

    rows = []
    for c in range(cm.shape[0]):
        tp = cm[c, c]
        precision = _safe_ratio(tp, pred_counts[c])
        recall = _safe_ratio(tp, true_counts[c])
        f1 = _safe_ratio(2 * precision * recall, precision + recall)
        rows.append(ClassMetrics(
            index=c, code=codes[c], precision=precision, recall=recall, f1=f1,
            support=int(true_counts[c]), degenerate=bool(pred_counts[c] == 0 or true_counts[c] == 0),
        ))

    support = np.array([r.support for r in rows], dtype=np.float64)

    def average(weights: np.ndarray | None) -> AverageMetrics:
        values = {
            key: float(np.average([getattr(r, key) for r in rows], weights=weights))
            for key in ("precision", "recall", "f1")
        }
        return AverageMetrics(**values, support=total)

    return ClassificationReport(
        classes=rows,
        macro_avg=average(None),
        weighted_avg=average(support),
        accuracy=float(np.trace(cm) / total),
        total=total,
    )


def trapezoid_area(x: np.ndarray, y: np.ndarray) -> float:
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    return float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))


def roc_curve(scores: np.ndarray, positives: np.ndarray, label: str) -> RocCurve:
    """Threshold sweep over the distinct scores, highest first.

    Tied scores enter together, so the trapezoidal area equals the pairwise ranking
    statistic with ties counted one half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    n_pos = int(positives.sum())
    n_neg = int(positives.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        return RocCurve(label=label, thresholds=[], fpr=[], tpr=[], auc=None)

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = positives[order]
    tp = np.cumsum(sorted_pos)
    fp = np.cumsum(~sorted_pos)
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(sorted_scores) != 0), sorted_scores.size - 1]

    tpr = np.r_[0.0, tp[ends] / n_pos]
    fpr = np.r_[0.0, fp[ends] / n_neg]
    thresholds = np.r_[np.inf, sorted_scores[ends]]
    return RocCurve(label=label, thresholds=thresholds.tolist(), fpr=fpr.tolist(), tpr=tpr.tolist(),
                    auc=trapezoid_area(fpr, tpr))


def pairwise_auc(scores: np.ndarray, positives: np.ndarray) -> float | None:
    """Brute-force ranking statistic: share of (positive, negative) pairs ordered correctly."""
    scores = np.asarray(scores, dtype=np.float64)
    positives = np.asarray(positives, dtype=bool)
    pos, neg = scores[positives], scores[~positives]
    if pos.size == 0 or neg.size == 0:
        return None
    diff = pos[:, None] - neg[None, :]
    return float(((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size)


def roc_ovr(probs: np.ndarray, true_labels, codes=CLASS_CODES) -> RocSet:
    """One-vs-rest ROC per class plus the macro average over the defined curves.

    The macro curve averages the per-class tpr, linearly interpolated on the union of
    their fpr grids.
    """
    probs = np.asarray(probs)
    true = np.asarray(true_labels, dtype=np.int64)
    if probs.ndim != 2 or probs.shape[0] != true.size:
        raise ArgumentError(f"probs {probs.shape} do not match {true.size} labels")
    curves = [roc_curve(probs[:, c], true == c, codes[c]) for c in range(probs.shape[1])]

    defined = [curve for curve in curves if curve.auc is not None]
    macro = None
    if defined:
        grid = np.unique(np.concatenate([curve.fpr for curve in defined]))
        mean_tpr = np.mean([np.interp(grid, curve.fpr, curve.tpr) for curve in defined], axis=0)
        mean_tpr[-1] = 1.0
        fpr, tpr = np.r_[0.0, grid], np.r_[0.0, mean_tpr]
        macro = RocCurve(label="macro", thresholds=[], fpr=fpr.tolist(), tpr=tpr.tolist(),
                         auc=trapezoid_area(fpr, tpr))
    return RocSet(curves=curves, macro=macro)


def render_report(rep: ClassificationReport) -> str:
    """Plain-text table: one row per class, then macro/weighted averages and accuracy."""
    lines = [f"{'class':<12}{'precision':>10}{'recall':>10}{'f1-score':>10}{'support':>10}", ""]
    for row in rep.classes:
        name = f"{row.index} {row.code}"
        flag = " *" if row.degenerate else ""
        lines.append(f"{name:<12}{row.precision:>10.4f}{row.recall:>10.4f}{row.f1:>10.4f}{row.support:>10}{flag}")
    lines.append("")
    for title, avg in (("macro avg", rep.macro_avg), ("weighted avg", rep.weighted_avg)):
        lines.append(f"{title:<12}{avg.precision:>10.4f}{avg.recall:>10.4f}{avg.f1:>10.4f}{avg.support:>10}")
    lines.append(f"{'accuracy':<12}{'':>20}{rep.accuracy:>10.4f}{rep.total:>10}")
    if any(r.degenerate for r in rep.classes):
        lines.append("* zero denominator: metric reported as 0")
    return "\n".join(lines)


def roc_to_csv(roc: RocSet) -> str:
    """Plot-ready rows (class, threshold, fpr, tpr) followed by one '# auc' summary line."""
    lines = ["class,threshold,fpr,tpr"]
    for curve in roc.curves + ([roc.macro] if roc.macro else []):
        thresholds = curve.thresholds or [float("nan")] * len(curve.fpr)
        for t, f, p in zip(thresholds, curve.fpr, curve.tpr):
            lines.append(f"{curve.label},{t!r},{f!r},{p!r}")
    summary = " ".join(
        f"{curve.label}={curve.auc:.6f}" if curve.auc is not None else f"{curve.label}=absent"
        for curve in roc.curves + ([roc.macro] if roc.macro else [])
    )
    lines.append(f"# auc {summary}")
    return "\n".join(lines) + "\n"
