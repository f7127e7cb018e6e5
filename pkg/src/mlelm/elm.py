"""Random-projection network classifier trained in one shot by least squares.

A fixed hidden layer of randomly initialized neurons projects the inputs;
the output weights are the least-squares solution of ``H beta = Y`` with the
labels in bipolar (+/-1) encoding, obtained through a regularized
normal-equations pseudoinverse. A calibrated threshold turns the real-valued
output scores back into label sets.
"""

from __future__ import annotations

import math
import struct
import zlib

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import linalg
from ._validation import as_label_matrix, as_matrix, check_rows_match
from .errors import CalibrationError, ModelFormatError, ShapeError
from .multilabel import (
    METHOD_FIXED,
    METHOD_MIDPOINT,
    ThresholdReport,
    apply_threshold,
    calibrate_threshold,
    encode_bipolar,
)

ACTIVATIONS = {
    "sigmoid": expit,
    "tanh": np.tanh,
    "hardlimit": lambda z: (z >= 0.0).astype(np.float64),
}

MODEL_MAGIC = b"MLELM1"

_ACTIVATION_IDS = {"sigmoid": 0, "tanh": 1, "hardlimit": 2}
_ACTIVATION_NAMES = {i: name for name, i in _ACTIVATION_IDS.items()}
_METHOD_IDS = {METHOD_FIXED: 0, METHOD_MIDPOINT: 1}
_METHOD_NAMES = {i: name for name, i in _METHOD_IDS.items()}
_FLAG_TOP1 = 0x01
_FLAG_RIDGE_AUTO = 0x02

# magic, flags, activation id, D, hidden, M, threshold, threshold method,
# seed, effective ridge, weight range
_HEADER = struct.Struct("<6sBBIIIdBQddd")


def _activation(name: str):
    try:
        return ACTIVATIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown activation {name!r}; expected one of {sorted(ACTIVATIONS)}"
        ) from None


def init_hidden_layer(hidden_neurons, feature_count, weight_range=(-1.0, 1.0), seed=0):
    """Draw random input weights and biases for the hidden layer.

    Weights are i.i.d. uniform over ``weight_range``; biases are uniform
    over [0, 1). The stream is consumed one neuron at a time (weights, then
    bias), so for a fixed seed a wider layer extends a narrower one without
    changing its existing neurons.

    Returns ``(weights, biases)`` with shapes ``(hidden_neurons,
    feature_count)`` and ``(hidden_neurons,)``.
    """
    if hidden_neurons < 1:
        raise ValueError(f"hidden_neurons must be >= 1, got {hidden_neurons}")
    if feature_count < 1:
        raise ValueError(f"feature_count must be >= 1, got {feature_count}")
    low, high = (float(v) for v in weight_range)
    if not low < high:
        raise ValueError(f"weight_range must satisfy low < high, got ({low}, {high})")
    rng = np.random.default_rng(seed)
    raw = rng.random((int(hidden_neurons), int(feature_count) + 1))
    weights = low + (high - low) * raw[:, :-1]
    biases = raw[:, -1].copy()
    return weights, biases


def hidden_output(x, input_weights, biases, activation="sigmoid") -> np.ndarray:
    """Hidden layer activation matrix: entry (j, i) is g(w_i . x_j + b_i)."""
    x = as_matrix(x, "x")
    w = as_matrix(input_weights, "input_weights")
    b = np.asarray(biases, dtype=np.float64)
    if b.ndim != 1 or b.shape[0] != w.shape[0]:
        raise ShapeError(
            f"biases must be a vector of length {w.shape[0]}, got shape {b.shape}"
        )
    if x.shape[1] != w.shape[1]:
        raise ShapeError(
            f"x has {x.shape[1]} features but the hidden layer expects {w.shape[1]}"
        )
    g = _activation(activation)
    return g(x @ w.T + b)


def _fit_feature_scaling(x: np.ndarray):
    """Per-feature affine map onto [-1, 1]; constant features map to 0."""
    low = x.min(axis=0)
    high = x.max(axis=0)
    shift = (high + low) / 2.0
    scale = (high - low) / 2.0
    scale[scale == 0.0] = 1.0
    return shift, scale


class ElmClassifier(BaseEstimator):
    """Multi-label classifier with a random hidden layer and closed-form
    output weights.

    Training computes the hidden activation matrix H of the normalized
    inputs and solves ``H beta = Y`` (Y bipolar-encoded) in a single
    least-squares step; no iterative optimization is involved, which is
    what makes training fast. Prediction compares the raw output scores
    against the calibrated decision threshold.

    Parameters
    ----------
    hidden_neurons : int or None, default None
        Hidden layer width. ``None`` derives ``min(1000, 10 * n_labels +
        2 * n_features)`` from the training data at fit time.
    activation : {"sigmoid", "tanh", "hardlimit"}, default "sigmoid"
    seed : int, default 0
        Seed for the random hidden layer (unsigned 64-bit). Fixed data and
        parameters give a bit-identical model.
    ridge : float or None, default None
        Regularization added to the Gram matrix when solving for the
        output weights. ``None`` uses a small relative default so training
        never fails on a degenerate hidden matrix; ``0.0`` solves the
        exact normal equations and raises
        :class:`~mlelm.errors.SingularMatrixError` on a singular Gram.
    weight_range : (float, float), default (-1.0, 1.0)
        Uniform range for the random input weights; biases are always
        drawn from [0, 1).
    threshold : "auto" or float, default "auto"
        "auto" calibrates the decision threshold on the training scores
        (falling back to 0 when calibration is impossible); a number fixes
        it directly.
    top1_fallback : bool, default False
        When true, a sample whose scores all fall below the threshold is
        assigned its single best-scoring label instead of the empty set.

    Attributes
    ----------
    input_weights_ : ndarray of shape (hidden_neurons, n_features)
    biases_ : ndarray of shape (hidden_neurons,)
    output_weights_ : ndarray of shape (hidden_neurons, n_labels)
    threshold_ : float
    threshold_report_ : ThresholdReport
    feature_shift_, feature_scale_ : ndarray of shape (n_features,)
        Affine normalization fitted on the training features.
    label_names_ : tuple of str
    training_residual_ : float
        Relative Frobenius residual ||H beta - Y|| / ||Y|| on the
        training set; near zero when the network interpolates.
    """

    def __init__(
        self,
        hidden_neurons=None,
        activation="sigmoid",
        seed=0,
        ridge=None,
        weight_range=(-1.0, 1.0),
        threshold="auto",
        top1_fallback=False,
    ):
        self.hidden_neurons = hidden_neurons
        self.activation = activation
        self.seed = seed
        self.ridge = ridge
        self.weight_range = weight_range
        self.threshold = threshold
        self.top1_fallback = top1_fallback

    def fit(self, X, Y, label_names=None):
        """Fit on features X (n_samples, n_features) and binary labels Y
        (n_samples, n_labels)."""
        X = as_matrix(X, "X")
        Y = as_label_matrix(Y, "Y")
        check_rows_match(X, Y, "X", "Y")
        n, d = X.shape
        m = Y.shape[1]
        if n < 1 or d < 1 or m < 1:
            raise ValueError("training data must be nonempty")
        if label_names is not None and len(label_names) != m:
            raise ValueError(f"expected {m} label names, got {len(label_names)}")
        self._validate_params()

        hidden = self.hidden_neurons
        if hidden is None:
            hidden = min(1000, 10 * m + 2 * d)

        self.feature_shift_, self.feature_scale_ = _fit_feature_scaling(X)
        x_norm = (X - self.feature_shift_) / self.feature_scale_
        weights, biases = init_hidden_layer(hidden, d, self.weight_range, self.seed)
        h = hidden_output(x_norm, weights, biases, self.activation)
        targets = encode_bipolar(Y)

        ridge = self.ridge
        if ridge is None:
            # Resolve pseudoinverse's relative default here so the value can
            # be echoed into the serialized model: trace of the Gram matrix
            # is the sum of squared activations either way around.
            ridge = 1e-8 * float((h * h).sum()) / min(h.shape)
        beta = linalg.pseudoinverse(h, ridge) @ targets

        scores = h @ beta
        target_norm = math.sqrt(n * m)  # every bipolar entry is +/-1
        residual = float(np.linalg.norm(scores - targets)) / target_norm

        self.input_weights_ = weights
        self.biases_ = biases
        self.output_weights_ = beta
        self.hidden_neurons_ = int(hidden)
        self.n_features_in_ = d
        self.n_labels_ = m
        self.label_names_ = (
            tuple(str(name) for name in label_names)
            if label_names is not None
            else tuple(f"label_{i}" for i in range(m))
        )
        self.ridge_effective_ = float(ridge)
        self.training_residual_ = residual
        self.threshold_report_ = self._pick_threshold(scores, Y)
        self.threshold_ = self.threshold_report_.threshold
        return self

    def _validate_params(self):
        _activation(self.activation)
        if self.hidden_neurons is not None and self.hidden_neurons < 1:
            raise ValueError(f"hidden_neurons must be >= 1, got {self.hidden_neurons}")
        if self.ridge is not None and self.ridge < 0:
            raise ValueError(f"ridge must be nonnegative, got {self.ridge}")
        if isinstance(self.threshold, str) and self.threshold != "auto":
            raise ValueError(f'threshold must be "auto" or a number, got {self.threshold!r}')
        seed = int(self.seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit an unsigned 64-bit integer")

    def _pick_threshold(self, scores, labels) -> ThresholdReport:
        if isinstance(self.threshold, str):  # "auto", validated above
            try:
                return calibrate_threshold(scores, labels)
            except CalibrationError:
                return _fixed_report(scores, labels, 0.0)
        return _fixed_report(scores, labels, float(self.threshold))

    def _check_fitted(self):
        if not hasattr(self, "output_weights_"):
            raise NotFittedError(
                "this ElmClassifier instance is not fitted yet; call fit first"
            )

    def decision_function(self, X) -> np.ndarray:
        """Raw real-valued scores, one column per label."""
        self._check_fitted()
        X = as_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ShapeError(
                f"X has {X.shape[1]} features but the model was fitted with "
                f"{self.n_features_in_}"
            )
        x_norm = (X - self.feature_shift_) / self.feature_scale_
        h = hidden_output(x_norm, self.input_weights_, self.biases_, self.activation)
        return h @ self.output_weights_

    def predict(self, X) -> np.ndarray:
        """Predicted binary label matrix (1 = label assigned)."""
        return self._labels_from_scores(self.decision_function(X))

    def _labels_from_scores(self, scores: np.ndarray) -> np.ndarray:
        labels = apply_threshold(scores, self.threshold_)
        if self.top1_fallback:
            empty = labels.sum(axis=1) == 0
            if empty.any():
                rows = np.nonzero(empty)[0]
                labels[rows, scores[rows].argmax(axis=1)] = 1
        return labels

    def score(self, X, Y) -> float:
        """Mean example-based accuracy (Jaccard overlap) against true labels."""
        from .metrics import example_based_metrics

        return example_based_metrics(self.predict(X), as_label_matrix(Y, "Y")).accuracy


def _fixed_report(scores, labels, threshold: float) -> ThresholdReport:
    positive = np.asarray(labels, dtype=bool).ravel()
    flat = np.asarray(scores, dtype=np.float64).ravel()
    positive_min = float(flat[positive].min()) if positive.any() else math.nan
    negative_max = float(flat[~positive].max()) if not positive.all() else math.nan
    return ThresholdReport(
        threshold=threshold,
        positive_min=positive_min,
        negative_max=negative_max,
        margin=positive_min - negative_max,
        method=METHOD_FIXED,
    )


def serialize_model(model: ElmClassifier) -> bytes:
    """Serialize a fitted classifier to the self-describing MLELM1 layout.

    Layout: magic "MLELM1", flags, activation id, dimensions, threshold and
    its method, seed, effective ridge, weight range, then the normalization
    vectors and weight matrices as little-endian float64, then the
    length-prefixed UTF-8 label names, then a CRC32 of everything before it.
    """
    model._check_fitted()
    flags = 0
    if model.top1_fallback:
        flags |= _FLAG_TOP1
    if model.ridge is None:
        flags |= _FLAG_RIDGE_AUTO
    low, high = (float(v) for v in model.weight_range)
    parts = [
        _HEADER.pack(
            MODEL_MAGIC,
            flags,
            _ACTIVATION_IDS[model.activation],
            model.n_features_in_,
            model.hidden_neurons_,
            model.n_labels_,
            model.threshold_,
            _METHOD_IDS[model.threshold_report_.method],
            int(model.seed),
            model.ridge_effective_,
            low,
            high,
        ),
        np.ascontiguousarray(model.feature_shift_, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.feature_scale_, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.input_weights_, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.biases_, dtype="<f8").tobytes(),
        np.ascontiguousarray(model.output_weights_, dtype="<f8").tobytes(),
    ]
    for name in model.label_names_:
        encoded = name.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise ValueError(f"label name too long to serialize: {name[:40]}...")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def deserialize_model(data: bytes) -> ElmClassifier:
    """Reconstruct a fitted classifier from MLELM1 bytes."""
    if len(data) < _HEADER.size + 4:
        raise ModelFormatError("model data truncated")
    if data[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise ModelFormatError("bad magic; not an MLELM1 model file")
    body, (crc,) = data[:-4], struct.unpack("<I", data[-4:])
    if zlib.crc32(body) != crc:
        raise ModelFormatError("checksum mismatch; model file is corrupt")

    (
        _magic,
        flags,
        activation_id,
        n_features,
        hidden,
        n_labels,
        threshold,
        method_id,
        seed,
        ridge_effective,
        low,
        high,
    ) = _HEADER.unpack_from(body)
    if activation_id not in _ACTIVATION_NAMES:
        raise ModelFormatError(f"unknown activation id {activation_id}")
    if method_id not in _METHOD_NAMES:
        raise ModelFormatError(f"unknown threshold method id {method_id}")

    offset = _HEADER.size

    def take_floats(count, shape):
        nonlocal offset
        nbytes = count * 8
        if offset + nbytes > len(body):
            raise ModelFormatError("model data truncated")
        arr = np.frombuffer(body, dtype="<f8", count=count, offset=offset)
        offset += nbytes
        return arr.astype(np.float64).reshape(shape)

    shift = take_floats(n_features, (n_features,))
    scale = take_floats(n_features, (n_features,))
    weights = take_floats(hidden * n_features, (hidden, n_features))
    biases = take_floats(hidden, (hidden,))
    beta = take_floats(hidden * n_labels, (hidden, n_labels))

    names = []
    for _ in range(n_labels):
        if offset + 2 > len(body):
            raise ModelFormatError("model data truncated in label names")
        (length,) = struct.unpack_from("<H", body, offset)
        offset += 2
        if offset + length > len(body):
            raise ModelFormatError("model data truncated in label names")
        names.append(body[offset : offset + length].decode("utf-8"))
        offset += length
    if offset != len(body):
        raise ModelFormatError(f"{len(body) - offset} unexpected trailing bytes")

    method = _METHOD_NAMES[method_id]
    model = ElmClassifier(
        hidden_neurons=int(hidden),
        activation=_ACTIVATION_NAMES[activation_id],
        seed=int(seed),
        ridge=None if flags & _FLAG_RIDGE_AUTO else float(ridge_effective),
        weight_range=(low, high),
        threshold="auto" if method == METHOD_MIDPOINT else float(threshold),
        top1_fallback=bool(flags & _FLAG_TOP1),
    )
    model.feature_shift_ = shift
    model.feature_scale_ = scale
    model.input_weights_ = weights
    model.biases_ = biases
    model.output_weights_ = beta
    model.hidden_neurons_ = int(hidden)
    model.n_features_in_ = int(n_features)
    model.n_labels_ = int(n_labels)
    model.label_names_ = tuple(names)
    model.ridge_effective_ = float(ridge_effective)
    model.training_residual_ = math.nan  # not stored in the file
    model.threshold_ = float(threshold)
    model.threshold_report_ = ThresholdReport(
        threshold=float(threshold),
        positive_min=math.nan,
        negative_max=math.nan,
        margin=math.nan,
        method=method,
    )
    return model


def save_model(model: ElmClassifier, path) -> None:
    """Write the fitted model to ``path`` in MLELM1 format."""
    with open(path, "wb") as fh:
        fh.write(serialize_model(model))


def load_model(path) -> ElmClassifier:
    """Read an MLELM1 model file back into a fitted classifier."""
    with open(path, "rb") as fh:
        return deserialize_model(fh.read())
