"""Seeded k-fold cross-validation with mean/std aggregation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import clone

from .data import MultiLabelDataset
from .metrics import METRIC_FIELDS, MetricsReport, example_based_metrics


@dataclass(frozen=True)
class CvReport:
    """Per-fold metrics plus their mean and population standard deviation.

    ``mean.sample_count`` is the total number of evaluated samples;
    ``stddev.sample_count`` is the fold count.
    """

    k: int
    per_fold: tuple[MetricsReport, ...]
    mean: MetricsReport
    stddev: MetricsReport
    seed: int


def kfold_partition(n: int, k: int, seed: int = 0) -> list[np.ndarray]:
    """Shuffle 0..n-1 with the given seed and cut the sequence into k
    contiguous chunks whose sizes differ by at most one."""
    if k < 2 or k > n:
        raise ValueError(f"k must be in [2, {n}], got {k}")
    order = np.random.default_rng(seed).permutation(n)
    return np.array_split(order, k)


def cross_validate(estimator, dataset: MultiLabelDataset, k: int, seed: int = 0) -> CvReport:
    """k-fold cross-validation of a classifier configuration.

    Each fold trains a fresh clone of ``estimator`` on the other k-1 folds
    and evaluates the five metrics on the held-out fold. The clone's hidden
    layer is re-randomized per fold with seed ``seed + fold_index`` (the
    estimator's own ``seed`` parameter is overridden), and normalization
    and threshold calibration happen inside ``fit``, so nothing about the
    held-out fold leaks into training.
    """
    n = dataset.n_samples
    folds = kfold_partition(n, k, seed)
    mask = np.ones(n, dtype=bool)
    per_fold = []
    for fold_index, test_idx in enumerate(folds):
        mask[:] = True
        mask[test_idx] = False
        train_idx = np.nonzero(mask)[0]
        fold_estimator = clone(estimator).set_params(seed=seed + fold_index)
        try:
            fold_estimator.fit(
                dataset.features[train_idx],
                dataset.labels[train_idx],
                label_names=dataset.label_names,
            )
        except Exception as exc:
            raise type(exc)(f"training failed on fold {fold_index}: {exc}") from exc
        predicted = fold_estimator.predict(dataset.features[test_idx])
        per_fold.append(example_based_metrics(predicted, dataset.labels[test_idx]))

    means = {}
    stds = {}
    for field in METRIC_FIELDS:
        values = np.array([getattr(report, field) for report in per_fold])
        means[field] = float(values.mean())
        stds[field] = float(values.std())  # population standard deviation
    total = sum(report.sample_count for report in per_fold)
    return CvReport(
        k=k,
        per_fold=tuple(per_fold),
        mean=MetricsReport(sample_count=total, **means),
        stddev=MetricsReport(sample_count=k, **stds),
        seed=seed,
    )
