"""Random baseline and Fisher-score selection."""

from __future__ import annotations

import numpy as np

from ..validation import check_two_classes, check_X_y
from .base import BaseSelector, rank_descending


class RandomSelector(BaseSelector):
    """Uniform draw of k distinct features; the no-skill baseline.

    Deterministic per seed. The bench harness, not this selector, is
    responsible for the median-of-three protocol.
    """

    requires_labels = False

    def __init__(self, k=10, seed=0):
        self.k = k
        self.seed = seed

    def _fit(self, X, y):
        n_features = X.shape[1]
        rng = np.random.default_rng(self.seed)
        size = min(self.k, n_features)
        self.selected_ = [int(j) for j in rng.choice(n_features, size=size, replace=False)]
        self.scores_ = [0.0] * size


def fisher_scores(X, y) -> np.ndarray:
    """Two-class Fisher score per feature.

    F_j = sum_c n_c (mu_cj - mu_j)^2 / sum_c n_c var_cj with population
    variances. Constant features score 0; a positive numerator over a
    zero denominator yields the +inf sentinel.
    """
    X, y = check_X_y(X, y)
    check_two_classes(y)
    pos = X[y]
    neg = X[~y]
    n1, n0 = pos.shape[0], neg.shape[0]

    constant = (X == X[0]).all(axis=0)
    mu = X.mean(axis=0)
    num = n0 * (neg.mean(axis=0) - mu) ** 2 + n1 * (pos.mean(axis=0) - mu) ** 2
    den = n0 * neg.var(axis=0) + n1 * pos.var(axis=0)

    scores = np.zeros(X.shape[1])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / den
    finite = ~constant & (den > 0)
    scores[finite] = ratio[finite]
    scores[~constant & (den == 0) & (num > 0)] = np.inf
    return scores


def _fisher_select(X, y, k) -> tuple[list[int], list[float]]:
    scores = fisher_scores(X, y)
    order = rank_descending(scores)[: min(k, X.shape[1])]
    return [int(j) for j in order], [float(scores[j]) for j in order]


class FisherSelector(BaseSelector):
    """Top-k features by two-class Fisher score, ties to the lower index."""

    def __init__(self, k=10, seed=0):
        self.k = k
        self.seed = seed

    def _fit(self, X, y):
        self.selected_, self.scores_ = _fisher_select(X, y, self.k)
