"""Random and Fisher selectors, plus cross-algorithm contracts."""

import numpy as np
import pytest

from logselect.errors import SingleClassLabels, ValidationError
from logselect.selection import (
    ALGORITHMS,
    FisherSelector,
    RandomSelector,
    fisher_scores,
    make_selector,
    run_selection,
)


def toy_problem(rng, n=50, f=12):
    X = rng.integers(0, 4, size=(n, f)).astype(float)
    y = rng.integers(0, 2, n).astype(bool)
    X[:, 0] = y  # planted separator
    return X, y


class TestRandom:
    def test_k_equals_n_is_a_permutation(self):
        selector = RandomSelector(k=5, seed=3).fit(np.zeros((4, 5)))
        assert sorted(selector.selected_) == [0, 1, 2, 3, 4]

    def test_same_seed_same_selection(self, rng):
        X = rng.random((30, 100))
        a = RandomSelector(k=10, seed=11).fit(X).selected_
        b = RandomSelector(k=10, seed=11).fit(X).selected_
        assert a == b

    def test_nearby_seeds_differ(self, rng):
        X = rng.random((10, 1000))
        for seed in (0, 100, 2**40):
            a = RandomSelector(k=10, seed=seed).fit(X).selected_
            b = RandomSelector(k=10, seed=seed + 1).fit(X).selected_
            assert a != b

    def test_k_above_n_features_returns_all(self):
        selector = RandomSelector(k=99, seed=0).fit(np.zeros((3, 7)))
        assert sorted(selector.selected_) == list(range(7))

    def test_scores_all_zero(self):
        selector = RandomSelector(k=3, seed=0).fit(np.zeros((3, 7)))
        assert selector.scores_ == [0.0, 0.0, 0.0]


class TestFisherScores:
    def test_hand_computed_value(self):
        # classes {1,2} and {3,4}: num = 2(1.5-2.5)^2 + 2(3.5-2.5)^2 = 4,
        # den = 2*0.25 + 2*0.25 = 1
        X = np.array([[1.0], [2.0], [3.0], [4.0]])
        y = np.array([False, False, True, True])
        assert fisher_scores(X, y)[0] == pytest.approx(4.0, abs=1e-12)

    def test_perfect_separator_is_infinite(self):
        X = np.array([[0.0], [0.0], [1.0], [1.0]])
        y = np.array([False, False, True, True])
        assert fisher_scores(X, y)[0] == np.inf

    def test_constant_feature_scores_zero(self):
        X = np.array([[3.0, 0.1], [3.0, 0.9], [3.0, 0.2], [3.0, 0.8]])
        y = np.array([False, True, False, True])
        assert fisher_scores(X, y)[0] == 0.0

    def test_constant_float_feature_scores_zero(self):
        # means of repeated floats can round; the constant check must not
        X = np.full((6, 1), 0.1)
        y = np.array([False, True, False, True, False, True])
        assert fisher_scores(X, y)[0] == 0.0

    def test_single_class_rejected(self):
        with pytest.raises(SingleClassLabels):
            fisher_scores(np.zeros((4, 2)), np.ones(4, dtype=bool))

    def test_affine_invariance(self, rng):
        X = rng.normal(size=(80, 30))
        y = rng.integers(0, 2, 80).astype(bool)
        base = fisher_scores(X, y)
        for a in (0.5, 3.0, 10.0):
            scaled = fisher_scores(a * X + 1.7, y)
            assert np.allclose(scaled, base, rtol=1e-9)


class TestFisherSelector:
    def test_infinite_score_wins(self):
        X = np.array([[0.0, 5.0], [0.0, 6.0], [1.0, 7.0], [1.0, 9.0]])
        y = np.array([False, False, True, True])
        selector = FisherSelector(k=1).fit(X, y)
        assert selector.selected_ == [0]

    def test_all_constant_features_tie_by_index(self):
        X = np.ones((6, 5))
        y = np.array([True, False] * 3)
        selector = FisherSelector(k=3).fit(X, y)
        assert selector.selected_ == [0, 1, 2]
        assert selector.scores_ == [0.0, 0.0, 0.0]

    def test_descending_score_order_on_toy(self):
        X = np.array([
            [1.0, 0.0, 10.0, 3.0],
            [2.0, 0.0, 11.0, 1.0],
            [3.0, 1.0, 30.0, 2.0],
            [4.0, 1.0, 31.0, 4.0],
        ])
        y = np.array([False, False, True, True])
        scores = fisher_scores(X, y)
        selector = FisherSelector(k=4).fit(X, y)
        assert list(scores[selector.selected_]) == sorted(scores, reverse=True)


class TestCommonContracts:
    """Every algorithm: valid, unique, deterministic selections."""

    PARAMS = {"lasso_vote": {"runs": 3, "n_lambdas": 12}}  # keep the suite fast

    @pytest.mark.parametrize("algorithm", sorted(ALGORITHMS))
    def test_valid_unique_deterministic(self, rng, algorithm):
        X, y = toy_problem(rng)
        params = self.PARAMS.get(algorithm, {})
        first = run_selection(X, y, algorithm, 4, 123, **params)
        second = run_selection(X, y, algorithm, 4, 123, **params)
        assert first.selected == second.selected
        assert first.scores == second.scores
        assert len(set(first.selected)) == len(first.selected) == 4
        assert all(0 <= j < X.shape[1] for j in first.selected)

    @pytest.mark.parametrize("algorithm", sorted(ALGORITHMS))
    def test_k_capped_at_feature_count(self, rng, algorithm):
        X, y = toy_problem(rng, f=3)
        result = run_selection(X, y, algorithm, 10, 9, **self.PARAMS.get(algorithm, {}))
        assert sorted(result.selected) == [0, 1, 2]

    def test_unknown_algorithm_rejected(self):
        with pytest.raises(ValidationError):
            make_selector("nope", 3, 0)

    def test_k_must_be_positive(self, rng):
        X, y = toy_problem(rng)
        with pytest.raises(ValidationError):
            run_selection(X, y, "fisher", 0, 0)

    @pytest.mark.parametrize(
        "algorithm",
        ["fisher", "clust_fisher", "clust_importance", "mrmr", "clust_mrmr",
         "lasso_vote", "recursive"],
    )
    def test_supervised_algorithms_reject_single_class(self, rng, algorithm):
        X = rng.random((20, 6))
        with pytest.raises(SingleClassLabels):
            run_selection(X, np.ones(20, dtype=bool), algorithm, 2, 0,
                          **self.PARAMS.get(algorithm, {}))

    def test_cluster_map_contract(self, rng):
        """Cluster variants: map total, idempotent, selected map to themselves."""
        X, y = toy_problem(rng, n=40, f=20)
        for algorithm in ("cluster", "clust_importance", "clust_fisher", "clust_mrmr"):
            result = run_selection(X, y, algorithm, 3, 5)
            cm = result.cluster_map
            assert cm is not None and len(cm) == 20
            assert set(cm.tolist()) <= set(result.selected)
            for j in result.selected:
                assert cm[j] == j

    def test_selection_result_json(self, rng):
        X, y = toy_problem(rng, f=5)
        result = run_selection(X, y, "cluster", 2, 0)
        payload = result.to_json([f"f{j}" for j in range(5)])
        assert len(payload["selected"]) == 2
        assert len(payload["cluster_map"]) == 5
        assert payload["elapsed_ns"] >= 0
