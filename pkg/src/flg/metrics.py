"""Confusion-matrix evaluation: accuracy, Cohen's kappa, macro P/R/F1."""

from dataclasses import dataclass

import numpy as np


@dataclass
class ConfusionMatrix:
    """C x C count matrix, rows = actual class, cols = predicted class."""

    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError("confusion matrix must be square")
        if (self.counts < 0).any():
            raise ValueError("confusion counts must be nonnegative")

    @property
    def num_classes(self):
        return self.counts.shape[0]

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def tp(self):
        return np.diag(self.counts).astype(np.int64)

    @property
    def fp(self):
        return self.counts.sum(axis=0) - self.tp

    @property
    def fn(self):
        return self.counts.sum(axis=1) - self.tp

    @property
    def tn(self):
        return self.total - self.tp - self.fp - self.fn


def confusion(actual, predicted, num_classes=None):
    """Tally a confusion matrix from 1-based label vectors."""
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise ValueError("actual and predicted must have equal length")
    if num_classes is None:
        num_classes = int(max(actual.max(initial=0), predicted.max(initial=0)))
    for name, arr in (("actual", actual), ("predicted", predicted)):
        if arr.size and (arr.min() < 1 or arr.max() > num_classes):
            raise ValueError(f"{name} labels out of range 1..{num_classes}")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (actual - 1, predicted - 1), 1)
    return ConfusionMatrix(counts)


def overall_accuracy(cm):
    """Fraction of samples on the diagonal."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(cm.counts) / cm.total)


def average_accuracy(cm):
    """Mean per-class accuracy; classes absent from actual contribute 0."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    row_sums = cm.counts.sum(axis=1)
    per_class = np.where(row_sums > 0, cm.tp / np.maximum(row_sums, 1), 0.0)
    return float(per_class.mean())


def _kappa_binary(cm):
    # Chance agreement from the positive/negative marginal products.
    tp, fn = cm.counts[0, 0], cm.counts[0, 1]
    fp, tn = cm.counts[1, 0], cm.counts[1, 1]
    total = cm.total
    p_o = (tp + tn) / total
    p_y = ((tp + fn) / total) * ((tp + fp) / total)
    p_n = ((fp + tn) / total) * ((fn + tn) / total)
    return p_o, p_y + p_n


def kappa(cm):
    """Cohen's kappa: (P_o - P_e) / (1 - P_e), with kappa = 0 when P_e = 1."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    if cm.num_classes == 2:
        p_o, p_e = _kappa_binary(cm)
    else:
        p_o = np.trace(cm.counts) / cm.total
        rows = cm.counts.sum(axis=1)
        cols = cm.counts.sum(axis=0)
        p_e = float(rows @ cols) / cm.total**2
    if abs(1.0 - p_e) < 1e-15:
        return 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def prf(cm):
    """Macro precision and recall, and the F1 built from those two macros.

    Classes with a zero denominator contribute 0 to their macro mean.
    """
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    tp, fp, fn = cm.tp, cm.fp, cm.fn
    c = cm.num_classes
    prec_den = tp + fp
    rec_den = tp + fn
    precision = float(np.where(prec_den > 0, tp / np.maximum(prec_den, 1), 0.0).sum() / c)
    recall = float(np.where(rec_den > 0, tp / np.maximum(rec_den, 1), 0.0).sum() / c)
    if precision + recall == 0:
        return precision, recall, 0.0
    f1 = 2.0 * precision * recall / (precision + recall)
    return precision, recall, float(f1)
