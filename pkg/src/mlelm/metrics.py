"""Example-based multi-label evaluation metrics and dataset statistics.

Metric values are accumulated in exact rational arithmetic (integer set
counts aggregated as ``fractions.Fraction``) and converted to float once at
the end, so results carry no float-accumulation ambiguity and compare
exactly against per-sample set-arithmetic oracles.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._validation import as_label_matrix, check_same_shape
from .errors import ShapeError

METRIC_FIELDS = ("hamming_loss", "accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class MetricsReport:
    """The five evaluation metrics for one run, each in [0, 1]."""

    hamming_loss: float
    accuracy: float
    precision: float
    recall: float
    f1: float
    sample_count: int

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_FIELDS}


@dataclass(frozen=True)
class DatasetStats:
    """Multi-labelness statistics of a dataset.

    ``label_cardinality`` is the mean number of labels per sample and
    ``label_density`` is that mean divided by the label-space size.
    """

    label_cardinality: float
    label_density: float
    samples: int
    labels: int
    features: int


def _checked_pair(predicted, truth):
    p = as_label_matrix(predicted, "predicted")
    t = as_label_matrix(truth, "truth")
    check_same_shape(p, t, "predicted", "truth")
    if p.shape[0] < 1 or p.shape[1] < 1:
        raise ShapeError("label matrices must be nonempty")
    return p, t


def hamming_loss(predicted, truth) -> float:
    """Fraction of sample/label cells where prediction and truth disagree."""
    p, t = _checked_pair(predicted, truth)
    mismatched = int(np.count_nonzero(p != t))
    return float(Fraction(mismatched, p.shape[0] * p.shape[1]))


def _per_sample(p: np.ndarray, t: np.ndarray):
    """Yield (accuracy, precision, recall, f1) per sample as exact Fractions.

    Empty-set conventions: if the true and predicted sets are both empty
    all four values are 1; a ratio with an empty denominator set is 0.
    """
    inter = np.count_nonzero(p & t, axis=1)
    pred_size = np.count_nonzero(p, axis=1)
    true_size = np.count_nonzero(t, axis=1)
    one = Fraction(1)
    zero = Fraction(0)
    for i, pt, tt in zip(inter.tolist(), pred_size.tolist(), true_size.tolist()):
        union = pt + tt - i
        if union == 0:
            yield one, one, one, one
            continue
        accuracy = Fraction(i, union)
        precision = Fraction(i, pt) if pt else zero
        recall = Fraction(i, tt) if tt else zero
        f1 = Fraction(2 * i, pt + tt)
        yield accuracy, precision, recall, f1


def example_based_metrics(predicted, truth) -> MetricsReport:
    """Per-sample set-overlap metrics averaged over samples.

    For sample i with true set Y and predicted set Z: accuracy is
    |Y∩Z|/|Y∪Z| (Jaccard), precision |Y∩Z|/|Z|, recall |Y∩Z|/|Y| and f1
    2|Y∩Z|/(|Y|+|Z|), with the empty-set conventions of
    :func:`_per_sample`.
    """
    p, t = _checked_pair(predicted, truth)
    n = p.shape[0]
    totals = [Fraction(0)] * 4
    for values in _per_sample(p, t):
        for j, v in enumerate(values):
            totals[j] += v
    accuracy, precision, recall, f1 = (float(total / n) for total in totals)
    return MetricsReport(
        hamming_loss=hamming_loss(p, t),
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        sample_count=n,
    )


def dataset_stats(labels, features: int) -> DatasetStats:
    """Label cardinality / density of a binary label matrix.

    ``features`` is carried through for reporting; it does not affect the
    computed statistics.
    """
    y = as_label_matrix(labels)
    n, m = y.shape
    if n < 1 or m < 1:
        raise ValueError("label matrix must be nonempty")
    cardinality = float(np.count_nonzero(y)) / n
    return DatasetStats(
        label_cardinality=cardinality,
        label_density=cardinality / m,
        samples=n,
        labels=m,
        features=int(features),
    )
