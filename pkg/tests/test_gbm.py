import numpy as np
import pytest

from logselect.errors import (
    DegenerateSplit,
    MissingFeature,
    SingleClassLabels,
    ValidationError,
)
from logselect.gbm import (
    GbmClassifier,
    GbmConfig,
    evaluate,
    permutation_importance,
    split_train_test,
)


def planted_data(rng, n=400, noise=0.05, n_noise_cols=10):
    """Binary signal column + noise columns; label = signal XOR flips."""
    signal = rng.integers(0, 2, n).astype(float)
    noise_cols = rng.integers(0, 3, size=(n, n_noise_cols)).astype(float)
    X = np.column_stack([signal, noise_cols])
    y = signal.astype(bool) ^ (rng.random(n) < noise)
    return X, y


class TestSplit:
    def test_quarter_of_four(self):
        train, test = split_train_test(4, 0.25, seed=0)
        assert len(train) == 1 and len(test) == 3

    def test_disjoint_exhaustive(self):
        train, test = split_train_test(100, 0.25, seed=3)
        assert len(np.intersect1d(train, test)) == 0
        assert sorted(np.concatenate([train, test]).tolist()) == list(range(100))

    def test_deterministic_per_seed(self):
        assert (split_train_test(50, 0.3, seed=9)[0] == split_train_test(50, 0.3, seed=9)[0]).all()
        assert (split_train_test(50, 0.3, seed=9)[0] != split_train_test(50, 0.3, seed=10)[0]).any()

    def test_degenerate_split_rejected(self):
        with pytest.raises(DegenerateSplit):
            split_train_test(2, 0.1, seed=0)

    def test_fraction_bounds(self):
        with pytest.raises(ValidationError):
            split_train_test(10, 1.5, seed=0)


class TestTraining:
    def test_perfect_separator_within_ten_rounds(self, rng):
        X, y = planted_data(rng, noise=0.0)
        clf = GbmClassifier(rounds=10).fit(X, y)
        assert (clf.predict(X) == y).all()

    def test_single_class_rejected(self, rng):
        X = rng.random((20, 3))
        with pytest.raises(SingleClassLabels):
            GbmClassifier().fit(X, np.ones(20, dtype=bool))

    def test_zero_features_gives_majority_rate(self, rng):
        y = np.array([True] * 30 + [False] * 10)
        clf = GbmClassifier(rounds=20).fit(np.empty((40, 0)), y)
        assert (clf.predict(np.empty((40, 0))) == 1).all()
        assert evaluate(clf, np.empty((40, 0)), y).accuracy == 0.75

    def test_zero_rounds_predicts_prior(self, rng):
        X, y = planted_data(rng)
        clf = GbmClassifier(rounds=0).fit(X, y)
        proba = clf.predict_proba(X)[:, 1]
        assert np.allclose(proba, proba[0])

    def test_training_loss_non_increasing(self, rng):
        X, y = planted_data(rng, noise=0.2)
        clf = GbmClassifier(rounds=60).fit(X, y)
        losses = clf.train_losses_
        assert len(losses) == 61
        assert (np.diff(losses) <= 1e-12).all()

    def test_probabilities_strictly_inside_unit_interval(self, rng):
        X, y = planted_data(rng, noise=0.0)
        proba = GbmClassifier(rounds=100).fit(X, y).predict_proba(X)[:, 1]
        assert (proba > 0.0).all() and (proba < 1.0).all()

    def test_deterministic_models(self, rng):
        X, y = planted_data(rng, noise=0.1)
        a = GbmClassifier(rounds=30).fit(X, y)
        b = GbmClassifier(rounds=30).fit(X, y)
        for ta, tb in zip(a.trees_, b.trees_):
            assert ta.feature == tb.feature
            assert ta.threshold == tb.threshold
            assert ta.value == tb.value
        assert (a.predict_proba(X) == b.predict_proba(X)).all()

    def test_planted_signal_accuracy_bound(self, rng):
        X, y = planted_data(rng, n=1000, noise=0.05)
        train, test = split_train_test(1000, 0.5, seed=4)
        clf = GbmClassifier().fit(X[train], y[train])
        assert evaluate(clf, X[test], y[test]).accuracy >= 0.90

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            GbmConfig(learning_rate=0.0)
        with pytest.raises(ValidationError):
            GbmConfig(max_depth=0)

    def test_adding_positive_leaf_tree_raises_probabilities(self, rng):
        from logselect.gbm import _Tree

        X, y = planted_data(rng)
        clf = GbmClassifier(rounds=5).fit(X, y)
        before = clf.predict_proba(X)[:, 1]
        bump = _Tree()
        bump.add_leaf(1.0)
        clf.trees_.append(bump)
        after = clf.predict_proba(X)[:, 1]
        assert (after > before).all()


class TestPredict:
    def test_missing_feature_detected(self, rng):
        X, y = planted_data(rng)
        clf = GbmClassifier(rounds=5).fit(X, y)
        with pytest.raises(MissingFeature):
            clf.predict(X[:, :3])

    def test_empty_tree_list_is_base_score(self, rng):
        X, y = planted_data(rng)
        clf = GbmClassifier(rounds=0).fit(X, y)
        expected = 1.0 / (1.0 + np.exp(-clf.base_score_))
        assert np.allclose(clf.predict_proba(X)[:, 1], expected)


class TestEvaluate:
    def test_constant_high_prediction_on_all_true(self):
        y = np.ones(12, dtype=bool)
        clf = GbmClassifier(rounds=0)
        clf.fit(np.zeros((12, 1)), np.array([True] * 11 + [False]))  # prior > 0.5
        metrics = evaluate(clf, np.zeros((12, 1)), y)
        assert metrics.accuracy == pytest.approx(1.0)
        assert (metrics.tp, metrics.fp, metrics.fn, metrics.tn) == (12, 0, 0, 0)

    def test_inverted_predictions_score_zero(self, rng):
        X, y = planted_data(rng, noise=0.0)
        clf = GbmClassifier(rounds=10).fit(X, y)
        assert evaluate(clf, X, ~y).accuracy == 0.0

    def test_confusion_sums_to_test_size(self, rng):
        X, y = planted_data(rng, noise=0.3)
        clf = GbmClassifier(rounds=10).fit(X, y)
        metrics = evaluate(clf, X, y)
        assert metrics.total == len(y)


class TestPermutationImportance:
    def test_unused_feature_scores_exactly_zero(self, rng):
        X, y = planted_data(rng, noise=0.0, n_noise_cols=2)
        X = np.column_stack([X, np.full(len(y), 7.0)])  # constant, never split on
        clf = GbmClassifier(rounds=10).fit(X, y)
        imp = permutation_importance(clf, X, y, seed=0)
        assert 3 not in clf.used_features()
        assert imp[3] == 0.0

    def test_perfect_separator_dominates(self, rng):
        X, y = planted_data(rng, n=600, noise=0.0)
        train, hold = split_train_test(600, 0.7, seed=1)
        clf = GbmClassifier(rounds=20).fit(X[train], y[train])
        imp = permutation_importance(clf, X[hold], y[hold], seed=0)
        assert imp[0] > 0.3
        assert imp[0] == imp.max()

    def test_deterministic_per_seed(self, rng):
        X, y = planted_data(rng, noise=0.1)
        clf = GbmClassifier(rounds=10).fit(X, y)
        a = permutation_importance(clf, X, y, seed=5)
        b = permutation_importance(clf, X, y, seed=5)
        assert (a == b).all()


class TestModelDump:
    def test_json_round_trips_through_predictions(self, rng):
        import json

        X, y = planted_data(rng, noise=0.1)
        clf = GbmClassifier(rounds=8).fit(X, y)
        payload = json.loads(json.dumps(clf.to_json()))
        assert payload["n_features"] == X.shape[1]
        assert len(payload["trees"]) == 8
        # replaying the dumped trees reproduces decision_function
        raw = np.full(X.shape[0], payload["base_score"])
        for tree in payload["trees"]:
            node = np.zeros(X.shape[0], dtype=int)
            feature = np.asarray(tree["feature"])
            while (feature[node] >= 0).any():
                idx = np.flatnonzero(feature[node] >= 0)
                f = feature[node[idx]]
                go_left = X[idx, f] <= np.asarray(tree["threshold"])[node[idx]]
                node[idx] = np.where(go_left, np.asarray(tree["left"])[node[idx]],
                                     np.asarray(tree["right"])[node[idx]])
            raw += payload["learning_rate"] * np.asarray(tree["value"])[node]
        assert np.allclose(raw, clf.decision_function(X))
