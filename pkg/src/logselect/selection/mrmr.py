"""Greedy MID mRMR selection, its bootstrap ensemble, and the
clustering hybrid.

One greedy run picks the feature most relevant to the outcome first,
then repeatedly the feature maximising relevance minus mean mutual
information with the already-selected set. The ensemble repeats runs on
seeded bootstrap resamples of the cases and combines by vote frequency,
then mean greedy rank, then index.
"""

from __future__ import annotations

import numpy as np

from ..mi import CodeTable, _discretize
from ..validation import check_two_classes
from .base import BaseSelector
from .cluster import _cluster_select, _remap_through


def _greedy_mid(table: CodeTable, ycodes: np.ndarray, ylevels: int, k: int) -> tuple[list[int], np.ndarray]:
    """One greedy MID run; returns (ordered picks, relevance vector)."""
    relevance = table.mi_vs(ycodes, ylevels)
    n_features = relevance.shape[0]
    k = min(k, n_features)

    picked = [int(np.argmax(relevance))]  # ties: lower index
    mask = np.zeros(n_features, dtype=bool)
    mask[picked[0]] = True
    redundancy_sum = np.zeros(n_features)
    while len(picked) < k:
        codes, levels = table.column(picked[-1])
        redundancy_sum += table.mi_vs(codes, levels)
        score = relevance - redundancy_sum / len(picked)
        score[mask] = -np.inf
        nxt = int(np.argmax(score))
        picked.append(nxt)
        mask[nxt] = True
    return picked, relevance


def _mrmr_select(X, y, k, seed, solution_count, bins) -> tuple[list[int], list[float]]:
    check_two_classes(y)
    n = X.shape[0]
    table = CodeTable(X, bins)
    ycodes, ylevels = _discretize(y, bins)

    if solution_count == 1:
        selected, relevance = _greedy_mid(table, ycodes, ylevels, k)
        return selected, [float(relevance[j]) for j in selected]

    runs: list[list[int]] = []
    for run in range(solution_count):
        rng = np.random.default_rng([seed, run])  # independent stream per run
        rows = rng.integers(0, n, size=n)
        Xb = X[rows]
        yb = y[rows]
        table_b = CodeTable(Xb, bins)
        ycodes_b, ylevels_b = _discretize(yb, bins)
        order, _ = _greedy_mid(table_b, ycodes_b, ylevels_b, k)
        runs.append(order)

    votes: dict[int, int] = {}
    ranks: dict[int, list[int]] = {}
    for order in runs:
        for pos, j in enumerate(order):
            votes[j] = votes.get(j, 0) + 1
            ranks.setdefault(j, []).append(pos)
    combined = sorted(votes, key=lambda j: (-votes[j], float(np.mean(ranks[j])), j))
    selected = [int(j) for j in combined[: min(k, X.shape[1])]]
    relevance = table.mi_vs(ycodes, ylevels)
    return selected, [float(relevance[j]) for j in selected]


class MrmrSelector(BaseSelector):
    """Greedy MID mRMR; solution_count > 1 runs a bootstrap ensemble.

    solution_count=1 reproduces the classic greedy recurrence exactly;
    the default of 5 combines five resampled runs. Scores are the
    full-data relevance MI of the selected features.
    """

    def __init__(self, k=10, seed=0, solution_count=5, bins=4):
        self.k = k
        self.seed = seed
        self.solution_count = solution_count
        self.bins = bins

    def _fit(self, X, y):
        self.selected_, self.scores_ = _mrmr_select(
            X, y, self.k, self.seed, self.solution_count, self.bins
        )


class ClusterMrmrSelector(BaseSelector):
    """Clustering down to 2k representatives, then the mRMR ensemble.

    With at most 2k features the clustering stage is skipped and the
    result is bit-identical to the plain ensemble.
    """

    def __init__(self, k=10, seed=0, solution_count=5, bins=4, max_iter=100):
        self.k = k
        self.seed = seed
        self.solution_count = solution_count
        self.bins = bins
        self.max_iter = max_iter

    def _fit(self, X, y):
        n_features = X.shape[1]
        if n_features <= 2 * self.k:
            self.selected_, self.scores_ = _mrmr_select(
                X, y, self.k, self.seed, self.solution_count, self.bins
            )
            return
        survivors, _, cluster_map = _cluster_select(X, 2 * self.k, self.seed, self.max_iter)
        survivors = sorted(survivors)
        local_sel, local_scores = _mrmr_select(
            X[:, survivors], y, self.k, self.seed, self.solution_count, self.bins
        )
        self.selected_ = [int(survivors[i]) for i in local_sel]
        self.scores_ = local_scores
        self.cluster_map_ = _remap_through(cluster_map, self.selected_, X)
