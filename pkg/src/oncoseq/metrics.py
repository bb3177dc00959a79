"""ROC curves and area computation from a descending threshold sweep."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OneClassOnlyError


@dataclass
class RocCurve:
    class_id: int
    points: list[tuple[float, float]]  # (fpr, tpr), (0,0) .. (1,1)
    auc: float


def roc_points(scores, labels, class_id: int = 0) -> RocCurve:
    """Sweep thresholds over the distinct scores, descending.

    Tied scores collapse to a single operating point, so the curve has one
    point per distinct score plus the (0,0) anchor. The area is the
    trapezoidal integral of the resulting polyline.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    n_pos = int(labels.sum())
    n_neg = int(labels.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise OneClassOnlyError("ROC needs both a positive and a negative sample")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    tps = np.cumsum(sorted_labels)
    fps = np.cumsum(~sorted_labels)
    # keep only the last index of each tied-score group
    last_of_group = np.r_[sorted_scores[1:] != sorted_scores[:-1], True]
    tpr = tps[last_of_group] / n_pos
    fpr = fps[last_of_group] / n_neg

    xs = np.r_[0.0, fpr]
    ys = np.r_[0.0, tpr]
    auc = float(np.trapezoid(ys, xs))
    points = [(float(x), float(y)) for x, y in zip(xs, ys)]
    return RocCurve(class_id=class_id, points=points, auc=auc)


def confusion_matrix(true_labels, predicted, n_classes: int) -> np.ndarray:
    """Count matrix with true class on rows and predicted class on columns."""
    mat = np.zeros((n_classes, n_classes), dtype=np.int64)
    for t, p in zip(np.asarray(true_labels), np.asarray(predicted)):
        mat[int(t), int(p)] += 1
    return mat
