"""Evaluation metrics and the majority-class baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .corpus.types import Dataset, Metric, TaskKind
from .errors import DataError


@dataclass(frozen=True)
class Prediction:
    uid: str
    predicted: int | float
    gold: int | float


def _check_lengths(golds: Sequence, preds: Sequence) -> None:
    if len(golds) != len(preds):
        raise DataError(f"gold/prediction length mismatch: {len(golds)} vs {len(preds)}")
    if not golds:
        raise DataError("cannot score an empty prediction set")


def accuracy(golds: Sequence[int], preds: Sequence[int]) -> float:
    _check_lengths(golds, preds)
    return sum(1 for g, p in zip(golds, preds) if g == p) / len(golds)


def _f1_for_class(golds: Sequence[int], preds: Sequence[int], cls: int) -> float:
    tp = sum(1 for g, p in zip(golds, preds) if g == cls and p == cls)
    fp = sum(1 for g, p in zip(golds, preds) if g != cls and p == cls)
    fn = sum(1 for g, p in zip(golds, preds) if g == cls and p != cls)
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def binary_f1(golds: Sequence[int], preds: Sequence[int], positive: int = 1) -> float:
    """F1 of the positive class; 0.0 when it is never predicted nor present."""
    _check_lengths(golds, preds)
    return _f1_for_class(golds, preds, positive)


def macro_f1(golds: Sequence[int], preds: Sequence[int], n_classes: int) -> float:
    """Unweighted mean of per-class F1 over all declared classes.

    Classes absent from both golds and predictions contribute 0.0.
    """
    _check_lengths(golds, preds)
    if n_classes < 2:
        raise DataError(f"macro F1 needs at least 2 classes, got {n_classes}")
    return sum(_f1_for_class(golds, preds, c) for c in range(n_classes)) / n_classes


def pearson(golds: Sequence[float], preds: Sequence[float]) -> float:
    """Pearson correlation. Constant inputs are an error, not a NaN."""
    _check_lengths(golds, preds)
    n = len(golds)
    mg = sum(golds) / n
    mp = sum(preds) / n
    var_g = sum((g - mg) ** 2 for g in golds)
    var_p = sum((p - mp) ** 2 for p in preds)
    if var_g == 0.0 or var_p == 0.0:
        raise DataError("pearson correlation is undefined for a constant series")
    cov = sum((g - mg) * (p - mp) for g, p in zip(golds, preds))
    return cov / math.sqrt(var_g * var_p)


def compute_metric(
    metric: Metric,
    golds: Sequence,
    preds: Sequence,
    n_classes: int | None = None,
) -> float:
    if metric is Metric.ACCURACY:
        return accuracy(golds, preds)
    if metric is Metric.BINARY_F1:
        return binary_f1(golds, preds)
    if metric is Metric.MACRO_F1:
        if n_classes is None:
            raise DataError("macro F1 needs the task's class count")
        return macro_f1(golds, preds, n_classes)
    if metric is Metric.PEARSON:
        return pearson([float(g) for g in golds], [float(p) for p in preds])
    raise DataError(f"unknown metric {metric!r}")


def majority_class(train: Dataset) -> int:
    """Most frequent class over the full training split, ties to the lowest id."""
    if train.task.kind is TaskKind.REGRESSION:
        raise DataError("majority class is undefined for regression tasks")
    counts = [0] * train.task.n_classes
    for rec in train.records:
        if rec.label is not None:
            counts[int(rec.label)] += 1
    if not any(counts):
        raise DataError(f"split {train.split_name!r} has no labeled records")
    best = 0
    for c in range(1, len(counts)):
        if counts[c] > counts[best]:
            best = c
    return best


def sample_std(values: Sequence[float]) -> float:
    """Sample standard deviation (n-1 denominator); 0.0 for a single value."""
    n = len(values)
    if n == 0:
        raise DataError("cannot take the deviation of an empty sequence")
    if n == 1:
        return 0.0
    mean = sum(values) / n
    return math.sqrt(sum((v - mean) ** 2 for v in values) / (n - 1))


def mean(values: Sequence[float]) -> float:
    if not values:
        raise DataError("cannot take the mean of an empty sequence")
    return sum(values) / len(values)
