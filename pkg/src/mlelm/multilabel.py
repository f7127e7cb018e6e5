"""Bipolar label encoding and threshold-based label decoding.

The classifier regresses on +/-1 targets and produces real-valued scores;
the functions here convert between the binary label world and that score
world, including the calibration of the decision threshold that separates
member from non-member scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import as_label_matrix, as_matrix, check_same_shape
from .errors import CalibrationError

METHOD_FIXED = "fixed"
METHOD_MIDPOINT = "midpoint_calibrated"


@dataclass(frozen=True)
class ThresholdReport:
    """Outcome of threshold selection over a score/label pair.

    ``margin`` is ``positive_min - negative_max``; a positive margin means
    the two score populations are separable and the threshold sits in the
    middle of the gap.
    """

    threshold: float
    positive_min: float
    negative_max: float
    margin: float
    method: str


def encode_bipolar(labels) -> np.ndarray:
    """Map binary labels {0, 1} to bipolar regression targets {-1, +1}."""
    y = as_label_matrix(labels)
    return y.astype(np.float64) * 2.0 - 1.0


def decode_bipolar(targets) -> np.ndarray:
    """Inverse of :func:`encode_bipolar`: positive values map to 1, else 0."""
    t = as_matrix(targets, "targets")
    return (t > 0.0).astype(np.int8)


def apply_threshold(raw_scores, threshold: float) -> np.ndarray:
    """Per-cell decision: 1 iff the score strictly exceeds the threshold.

    Scores exactly equal to the threshold are negative, so all-below rows
    produce empty predicted label sets.
    """
    scores = as_matrix(raw_scores, "raw_scores")
    return (scores > threshold).astype(np.int8)


def calibrate_threshold(raw_scores, true_labels) -> ThresholdReport:
    """Pick the decision threshold that best separates member scores from
    non-member scores.

    All score cells are split into positives (true label 1) and negatives
    (true label 0). When the populations are separable, the threshold is
    the midpoint of the gap between them. Otherwise the candidate cuts are
    the midpoints of adjacent distinct sorted scores and the cut with the
    fewest misclassified cells wins; ties prefer the cut with the larger
    gap to its neighboring scores, then the smaller absolute threshold,
    then the smaller threshold value.

    Raises :class:`CalibrationError` when one of the populations is empty,
    in which case callers fall back to a fixed threshold of 0.
    """
    scores = as_matrix(raw_scores, "raw_scores")
    labels = as_label_matrix(true_labels, "true_labels")
    check_same_shape(scores, labels, "raw_scores", "true_labels")

    flat = scores.ravel()
    positive = labels.ravel().astype(bool)
    if not positive.any() or positive.all():
        raise CalibrationError(
            "calibration needs at least one positive and one negative cell"
        )
    positive_min = float(flat[positive].min())
    negative_max = float(flat[~positive].max())
    margin = positive_min - negative_max

    if negative_max < positive_min:
        threshold = (negative_max + positive_min) / 2.0
        return ThresholdReport(threshold, positive_min, negative_max, margin, METHOD_MIDPOINT)

    order = np.argsort(flat, kind="stable")
    s = flat[order]
    pos_below = np.cumsum(positive[order])
    neg_below = np.cumsum(~positive[order])
    neg_total = int(neg_below[-1])

    # Cuts live between adjacent distinct values; cells above a cut are
    # predicted positive (strict comparison), so the error count at the cut
    # after index i is: positives at or below i, plus negatives above i.
    boundary = np.nonzero(s[:-1] < s[1:])[0]
    if boundary.size == 0:
        # Every cell carries the same score; no midpoint cut exists. Fall
        # back to that value itself (everything predicted negative).
        return ThresholdReport(float(s[0]), positive_min, negative_max, margin, METHOD_MIDPOINT)

    errors = pos_below[boundary] + (neg_total - neg_below[boundary])
    cuts = (s[boundary] + s[boundary + 1]) / 2.0
    gaps = s[boundary + 1] - s[boundary]
    # lexsort sorts by the last key first: fewest errors, widest gap,
    # smallest |cut|, smallest cut.
    best = np.lexsort((cuts, np.abs(cuts), -gaps, errors))[0]
    return ThresholdReport(float(cuts[best]), positive_min, negative_max, margin, METHOD_MIDPOINT)
