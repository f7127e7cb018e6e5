import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mlelm import ElmClassifier
from mlelm.elm import (
    deserialize_model,
    hidden_output,
    init_hidden_layer,
    load_model,
    save_model,
    serialize_model,
)
from mlelm.errors import ModelFormatError, ShapeError, SingularMatrixError
from mlelm.multilabel import METHOD_FIXED, METHOD_MIDPOINT

from synth import random_dataset, separable_dataset


def fitted(n=20, d=6, m=3, hidden=40, seed=0, **params):
    ds = random_dataset(n, d, m, seed=seed + 1000)
    clf = ElmClassifier(hidden_neurons=hidden, seed=seed, **params)
    return clf.fit(ds.features, ds.labels, label_names=ds.label_names), ds


class TestHiddenLayerInit:
    def test_same_seed_is_bit_identical(self):
        w1, b1 = init_hidden_layer(8, 5, seed=42)
        w2, b2 = init_hidden_layer(8, 5, seed=42)
        assert np.array_equal(w1, w2) and np.array_equal(b1, b2)

    def test_different_seeds_differ(self):
        w1, _ = init_hidden_layer(8, 5, seed=1)
        w2, _ = init_hidden_layer(8, 5, seed=2)
        assert (w1 != w2).any()

    def test_uniform_law_of_large_numbers(self):
        w, b = init_hidden_layer(2000, 500, weight_range=(-1.0, 1.0), seed=3)
        assert w.size == 1_000_000
        assert abs(w.mean()) <= 0.01
        assert w.min() < -0.99 and w.max() > 0.99
        assert 0.0 <= b.min() and b.max() < 1.0

    def test_growing_the_layer_keeps_existing_neurons(self):
        w_small, b_small = init_hidden_layer(6, 4, seed=9)
        w_big, b_big = init_hidden_layer(10, 4, seed=9)
        assert np.array_equal(w_big[:6], w_small)
        assert np.array_equal(b_big[:6], b_small)

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            init_hidden_layer(0, 4)
        with pytest.raises(ValueError):
            init_hidden_layer(4, 0)
        with pytest.raises(ValueError):
            init_hidden_layer(4, 4, weight_range=(1.0, -1.0))


class TestHiddenOutput:
    def test_sigmoid_at_zero_is_half(self):
        h = hidden_output(np.zeros((3, 2)), np.zeros((5, 2)), np.zeros(5), "sigmoid")
        assert np.array_equal(h, np.full((3, 5), 0.5))

    def test_scalar_sigmoid_oracle(self):
        h = hidden_output([[2.0]], [[1.0]], [0.0], "sigmoid")
        assert h[0, 0] == pytest.approx(1.0 / (1.0 + math.exp(-2.0)), abs=1e-12)

    def test_hardlimit_step(self):
        h = hidden_output([[-0.3], [0.3], [0.0]], [[1.0]], [0.0], "hardlimit")
        assert h.ravel().tolist() == [0.0, 1.0, 1.0]

    def test_feature_mismatch(self):
        with pytest.raises(ShapeError):
            hidden_output(np.ones((2, 3)), np.ones((4, 2)), np.ones(4))

    def test_unknown_activation(self):
        with pytest.raises(ValueError):
            hidden_output(np.ones((1, 1)), np.ones((1, 1)), np.ones(1), "relu")


class TestFit:
    def test_interpolation_when_hidden_at_least_samples(self):
        ds = random_dataset(20, 6, 3, seed=0)
        clf = ElmClassifier(hidden_neurons=40, ridge=0.0, seed=1)
        clf.fit(ds.features, ds.labels)
        assert clf.training_residual_ <= 1e-6
        assert np.array_equal(clf.predict(ds.features), ds.labels)

    def test_duplicated_samples_leave_weights_unchanged(self):
        # Least squares with every equation repeated scales both sides of
        # the normal equations by two, so beta must not move.
        ds = random_dataset(5, 3, 2, seed=2)
        doubled_x = np.vstack([ds.features, ds.features])
        doubled_y = np.vstack([ds.labels, ds.labels])
        base = ElmClassifier(hidden_neurons=4, ridge=0.0, seed=3)
        once = clone(base).fit(ds.features, ds.labels)
        twice = clone(base).fit(doubled_x, doubled_y)
        assert np.abs(once.output_weights_ - twice.output_weights_).max() <= 1e-8

    def test_fit_is_deterministic(self):
        ds = random_dataset(15, 4, 3, seed=4)
        a = ElmClassifier(hidden_neurons=10, seed=5).fit(ds.features, ds.labels)
        b = ElmClassifier(hidden_neurons=10, seed=5).fit(ds.features, ds.labels)
        assert serialize_model(a) == serialize_model(b)

    def test_seed_changes_the_model(self):
        ds = random_dataset(15, 4, 3, seed=4)
        a = ElmClassifier(hidden_neurons=10, seed=5).fit(ds.features, ds.labels)
        b = ElmClassifier(hidden_neurons=10, seed=6).fit(ds.features, ds.labels)
        assert serialize_model(a) != serialize_model(b)

    def test_residual_does_not_grow_with_width(self):
        ds = random_dataset(60, 5, 3, seed=6)
        residuals = []
        for hidden in (10, 20, 40):
            clf = ElmClassifier(hidden_neurons=hidden, ridge=0.0, seed=7)
            clf.fit(ds.features, ds.labels)
            residuals.append(clf.training_residual_)
        assert residuals[1] <= residuals[0] + 1e-8
        assert residuals[2] <= residuals[1] + 1e-8

    def test_ridge_shrinks_output_weights(self):
        ds = random_dataset(40, 5, 3, seed=8)
        norms = []
        for ridge in (0.0, 1e-4, 1e-2):
            clf = ElmClassifier(hidden_neurons=20, ridge=ridge, seed=9)
            clf.fit(ds.features, ds.labels)
            norms.append(np.linalg.norm(clf.output_weights_))
        assert norms[0] >= norms[1] >= norms[2]

    def test_default_width_derived_from_data(self):
        ds = random_dataset(30, 5, 3, seed=10)
        clf = ElmClassifier().fit(ds.features, ds.labels)
        assert clf.hidden_neurons_ == min(1000, 10 * 3 + 2 * 5)

    def test_constant_feature_is_neutralized(self):
        ds = random_dataset(12, 3, 2, seed=11)
        x = ds.features.copy()
        x[:, 1] = 4.25
        clf = ElmClassifier(hidden_neurons=8, seed=12).fit(x, ds.labels)
        assert clf.feature_scale_[1] == 1.0
        assert clf.feature_shift_[1] == 4.25
        assert np.isfinite(clf.decision_function(x)).all()

    def test_singular_gram_with_zero_ridge_raises(self):
        # one sample repeated makes the hidden matrix rank one
        x = np.tile([[0.3, -0.2]], (6, 1))
        y = np.tile([[1, 0]], (6, 1))
        with pytest.raises(SingularMatrixError):
            ElmClassifier(hidden_neurons=4, ridge=0.0, seed=13).fit(x, y)
        # the relative default ridge keeps the same fit well defined
        clf = ElmClassifier(hidden_neurons=4, ridge=None, seed=13).fit(x, y)
        assert np.isfinite(clf.output_weights_).all()

    def test_parameter_validation(self):
        ds = random_dataset(10, 3, 2, seed=14)
        bad = [
            dict(activation="relu"),
            dict(hidden_neurons=0),
            dict(ridge=-1.0),
            dict(threshold="sometimes"),
            dict(seed=-1),
            dict(seed=2**64),
        ]
        for params in bad:
            with pytest.raises(ValueError):
                ElmClassifier(**params).fit(ds.features, ds.labels)
        with pytest.raises(ValueError):
            ElmClassifier().fit(ds.features, ds.labels, label_names=("just_one",))
        with pytest.raises(ShapeError):
            ElmClassifier().fit(ds.features, ds.labels[:-1])
        with pytest.raises(ValueError):
            ElmClassifier().fit(ds.features * np.nan, ds.labels)


class TestPredict:
    def test_unfitted_raises(self):
        with pytest.raises(NotFittedError):
            ElmClassifier().predict(np.ones((1, 2)))

    def test_zero_output_weights_give_empty_sets(self):
        clf, ds = fitted()
        clf.output_weights_ = np.zeros_like(clf.output_weights_)
        clf.threshold_ = 0.0
        assert not clf.predict(ds.features).any()
        assert not clf.decision_function(ds.features).any()

    def test_hand_built_single_neuron_pipeline(self):
        clf = ElmClassifier(hidden_neurons=1, activation="sigmoid")
        clf.input_weights_ = np.array([[1.0]])
        clf.biases_ = np.array([0.0])
        clf.output_weights_ = np.array([[2.0, -1.0]])
        clf.feature_shift_ = np.array([0.0])
        clf.feature_scale_ = np.array([1.0])
        clf.threshold_ = 0.0
        clf.hidden_neurons_ = 1
        clf.n_features_in_ = 1
        clf.n_labels_ = 2
        clf.label_names_ = ("a", "b")
        scores = clf.decision_function([[0.0]])
        assert scores.tolist() == [[1.0, -0.5]]
        assert clf.predict([[0.0]]).tolist() == [[1, 0]]

    def test_feature_count_mismatch(self):
        clf, _ = fitted(d=6)
        with pytest.raises(ShapeError):
            clf.predict(np.ones((2, 5)))

    def test_threshold_derives_from_training_scores(self):
        # the stored threshold must be exactly the midpoint of the gap in
        # the scores that decision_function reproduces on the training set
        ds = random_dataset(18, 5, 3, seed=15)
        clf = ElmClassifier(hidden_neurons=36, ridge=0.0, seed=16)
        clf.fit(ds.features, ds.labels)
        scores = clf.decision_function(ds.features)
        positive = ds.labels.astype(bool)
        expected = (scores[~positive].max() + scores[positive].min()) / 2.0
        assert clf.threshold_ == expected
        assert clf.threshold_report_.method == METHOD_MIDPOINT

    def test_fixed_threshold_parameter(self):
        clf, ds = fitted(threshold=0.25)
        assert clf.threshold_ == 0.25
        assert clf.threshold_report_.method == METHOD_FIXED
        scores = clf.decision_function(ds.features)
        assert np.array_equal(clf.predict(ds.features), (scores > 0.25).astype(np.int8))

    def test_top1_fallback_fills_empty_rows(self):
        clf, ds = fitted(top1_fallback=True)
        clf.threshold_ = 1e9  # force every score below the threshold
        predicted = clf.predict(ds.features)
        assert (predicted.sum(axis=1) == 1).all()
        scores = clf.decision_function(ds.features)
        assert np.array_equal(predicted.argmax(axis=1), scores.argmax(axis=1))

    def test_score_is_mean_jaccard(self):
        ds = separable_dataset(30, 4, 2, seed=17)
        clf = ElmClassifier(hidden_neurons=60, seed=18)
        clf.fit(ds.features, ds.labels)
        assert 0.0 <= clf.score(ds.features, ds.labels) <= 1.0

    def test_single_label_data_agrees_with_argmax_oracle(self):
        # with one label per sample and a separating margin, thresholded
        # prediction must coincide with picking the best-scoring label
        rng = np.random.default_rng(22)
        n, m = 24, 4
        x = rng.uniform(-1, 1, (n, 3))
        y = np.zeros((n, m), dtype=np.int8)
        y[np.arange(n), rng.integers(0, m, n)] = 1
        clf = ElmClassifier(hidden_neurons=48, ridge=0.0, seed=23).fit(x, y)
        assert clf.threshold_report_.margin > 0
        predicted = clf.predict(x)
        scores = clf.decision_function(x)
        expected = np.zeros_like(y)
        expected[np.arange(n), scores.argmax(axis=1)] = 1
        assert np.array_equal(predicted, expected)


class TestSerialization:
    def test_roundtrip_preserves_bytes_and_predictions(self):
        clf, ds = fitted(seed=19)
        blob = serialize_model(clf)
        restored = deserialize_model(blob)
        assert serialize_model(restored) == blob
        rng = np.random.default_rng(20)
        x = rng.uniform(-2, 2, (100, ds.n_features))
        assert np.array_equal(restored.decision_function(x), clf.decision_function(x))
        assert np.array_equal(restored.predict(x), clf.predict(x))
        assert restored.label_names_ == clf.label_names_
        assert restored.get_params()["seed"] == clf.seed

    def test_save_and_load_file(self, tmp_path):
        clf, ds = fitted(seed=21)
        path = tmp_path / "model.mlelm"
        save_model(clf, path)
        restored = load_model(path)
        assert np.array_equal(restored.predict(ds.features), clf.predict(ds.features))

    def test_magic_is_checked(self):
        clf, _ = fitted()
        blob = serialize_model(clf)
        with pytest.raises(ModelFormatError):
            deserialize_model(b"NOTMLM" + blob[6:])

    def test_checksum_detects_corruption(self):
        clf, _ = fitted()
        blob = bytearray(serialize_model(clf))
        blob[len(blob) // 2] ^= 0xFF
        with pytest.raises(ModelFormatError):
            deserialize_model(bytes(blob))

    def test_truncation_detected(self):
        clf, _ = fitted()
        blob = serialize_model(clf)
        with pytest.raises(ModelFormatError):
            deserialize_model(blob[:10])

    def test_serializing_unfitted_model_fails(self):
        with pytest.raises(NotFittedError):
            serialize_model(ElmClassifier())

    def test_flags_survive_roundtrip(self):
        clf, _ = fitted(top1_fallback=True, ridge=1e-3)
        restored = deserialize_model(serialize_model(clf))
        assert restored.top1_fallback is True
        assert restored.ridge == pytest.approx(1e-3)
        auto, _ = fitted(ridge=None)
        assert deserialize_model(serialize_model(auto)).ridge is None
