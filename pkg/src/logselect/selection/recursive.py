"""Recursive feature elimination driven by permutation importance.

Subset sizes follow a geometric schedule from the full feature count
down to k; each round trains the internal booster on the surviving
subset and keeps the most important features for the next round.
"""

from __future__ import annotations

import math

import numpy as np

from ..gbm import GbmConfig, permutation_importance, split_train_test
from ..seeding import derive_seed
from ..validation import check_two_classes
from .base import BaseSelector, rank_descending


def elimination_schedule(n_features: int, k: int, steps: int) -> list[int]:
    """Strictly decreasing round sizes ending at k."""
    sizes: list[int] = []
    prev = n_features
    for i in range(1, steps + 1):
        size = math.ceil(n_features ** ((steps - i) / steps) * k ** (i / steps))
        size = max(k, min(size, prev - 1))
        sizes.append(size)
        prev = size
        if size == k:
            break
    if not sizes or sizes[-1] != k:
        sizes.append(k)
    return sizes


class RecursiveSelector(BaseSelector):
    """Multi-round importance-based elimination (2 rounds by default).

    Scores are the final round's permutation importances of the
    selected features.
    """

    def __init__(self, k=10, seed=0, steps=2, gbm=None, holdout_fraction=0.3, repeats=3):
        self.k = k
        self.seed = seed
        self.steps = steps
        self.gbm = gbm
        self.holdout_fraction = holdout_fraction
        self.repeats = repeats

    def _fit(self, X, y):
        from ..errors import ValidationError

        if self.steps < 1:
            raise ValidationError(f"steps must be >= 1, got {self.steps}")
        check_two_classes(y)
        n_features = X.shape[1]
        if n_features <= self.k:
            self.selected_ = list(range(n_features))
            self.scores_ = [0.0] * n_features
            self.sizes_ = []
            return

        config = self.gbm if self.gbm is not None else GbmConfig()
        sizes = elimination_schedule(n_features, self.k, self.steps)
        self.sizes_ = sizes

        fit_rows, hold_rows = split_train_test(
            X.shape[0], 1.0 - self.holdout_fraction, derive_seed(self.seed, "holdout")
        )
        current = np.arange(n_features)
        for round_no, size in enumerate(sizes):
            sub = X[:, current]
            model = config.as_classifier().fit(sub[fit_rows], y[fit_rows])
            imp = permutation_importance(
                model,
                sub[hold_rows],
                y[hold_rows],
                seed=derive_seed(self.seed, "perm", round_no),
                repeats=self.repeats,
            )
            order = rank_descending(imp)
            if round_no == len(sizes) - 1:
                top = order[: self.k]
                self.selected_ = [int(current[i]) for i in top]
                self.scores_ = [float(imp[i]) for i in top]
            else:
                keep = np.sort(current[order[:size]])
                current = keep
