"""Feature clustering selection and its importance/Fisher hybrids.

Every feature column is one clustering point whose dimensions are the
cases. After dropping exact-duplicate columns, k-means groups the
features and each cluster contributes the member nearest its centroid.
The full feature -> representative map comes along for root-cause use.
"""

from __future__ import annotations

import math

import numpy as np

from ..gbm import GbmConfig, permutation_importance, split_train_test
from ..kmeans import kmeans_fit
from ..seeding import derive_seed
from ..validation import check_two_classes
from .base import BaseSelector, rank_descending
from .basic import _fisher_select


def _duplicate_columns(X: np.ndarray) -> np.ndarray:
    """Map every column index to the first column with identical values."""
    rep = np.arange(X.shape[1], dtype=np.int64)
    seen: dict[bytes, int] = {}
    cols = np.ascontiguousarray(X.T)
    for j in range(X.shape[1]):
        rep[j] = seen.setdefault(cols[j].tobytes(), j)
    return rep


def _cluster_select(X, k, seed, max_iter) -> tuple[list[int], list[float], np.ndarray]:
    """Core clustering step: (selected, scores, full cluster map)."""
    n_features = X.shape[1]
    rep0 = _duplicate_columns(X)
    distinct = np.flatnonzero(rep0 == np.arange(n_features))
    n_clusters = min(k, distinct.shape[0])

    points = np.ascontiguousarray(X[:, distinct].T, dtype=np.float64)
    rng = np.random.default_rng(seed)
    centroids, labels = kmeans_fit(points, n_clusters, rng, max_iter=max_iter)

    selected: list[int] = []
    scores: list[float] = []
    for c in range(n_clusters):
        members = np.flatnonzero(labels == c)
        diffs = points[members] - centroids[c][None, :]
        d2 = np.einsum("ij,ij->i", diffs, diffs)
        pos = int(np.argmin(d2))  # ties: lowest feature index
        selected.append(int(distinct[members[pos]]))
        scores.append(-math.sqrt(max(float(d2[pos]), 0.0)))

    local = np.full(n_features, -1, dtype=np.int64)
    local[distinct] = np.arange(distinct.shape[0])
    cluster_map = np.asarray(selected, dtype=np.int64)[labels[local[rep0]]]
    return selected, scores, cluster_map


def _remap_through(cluster_map: np.ndarray, selected: list[int], X: np.ndarray) -> np.ndarray:
    """Re-point representatives eliminated by a second selection stage.

    A feature whose representative survived keeps it; otherwise it maps
    to the selected feature whose column is nearest (Euclidean) to its
    old representative, ties to the lower index.
    """
    sel_sorted = np.sort(np.asarray(selected, dtype=np.int64))
    sel_set = set(int(s) for s in selected)
    sel_cols = X[:, sel_sorted]
    target: dict[int, int] = {}
    for r in np.unique(cluster_map):
        r = int(r)
        if r in sel_set:
            target[r] = r
        else:
            diffs = sel_cols - X[:, [r]]
            d2 = np.einsum("ij,ij->j", diffs, diffs)
            target[r] = int(sel_sorted[int(np.argmin(d2))])
    return np.asarray([target[int(r)] for r in cluster_map], dtype=np.int64)


class ClusterSelector(BaseSelector):
    """Unsupervised k-means feature clustering; labels are ignored.

    ``cluster_map_`` maps every original feature (duplicates included)
    to its cluster's representative, and each selected feature is its
    own representative. Scores are negative distance to the centroid.
    """

    requires_labels = False

    def __init__(self, k=10, seed=0, max_iter=100):
        self.k = k
        self.seed = seed
        self.max_iter = max_iter

    def _fit(self, X, y):
        self.selected_, self.scores_, self.cluster_map_ = _cluster_select(
            X, self.k, self.seed, self.max_iter
        )


def _internal_split(n_rows: int, holdout_fraction: float, seed: int):
    """Fit/holdout split of the provided rows for importance scoring."""
    return split_train_test(n_rows, 1.0 - holdout_fraction, seed)


class ClusterImportanceSelector(BaseSelector):
    """Clustering down to ~25% of the features, then importance ranking.

    Stage one keeps max(k, ceil(0.25 * n_features)) cluster
    representatives; stage two ranks them by permutation importance of
    an internal booster and keeps the top k.
    """

    def __init__(self, k=10, seed=0, max_iter=100, gbm=None, holdout_fraction=0.3, repeats=3):
        self.k = k
        self.seed = seed
        self.max_iter = max_iter
        self.gbm = gbm
        self.holdout_fraction = holdout_fraction
        self.repeats = repeats

    def _fit(self, X, y):
        check_two_classes(y)
        n_features = X.shape[1]
        if n_features <= self.k:
            self.selected_ = list(range(n_features))
            self.scores_ = [0.0] * n_features
            self.cluster_map_ = np.arange(n_features, dtype=np.int64)
            self.stage1_size_ = n_features
            return

        keep = max(self.k, math.ceil(0.25 * n_features))
        if keep < n_features:
            survivors, _, cluster_map = _cluster_select(X, keep, self.seed, self.max_iter)
            survivors = sorted(survivors)
        else:
            survivors = list(range(n_features))
            cluster_map = np.arange(n_features, dtype=np.int64)
        self.stage1_size_ = len(survivors)

        selected, scores = _importance_rank(
            X, y, survivors, self.k, self.seed,
            self.gbm, self.holdout_fraction, self.repeats,
        )
        self.selected_ = selected
        self.scores_ = scores
        self.cluster_map_ = _remap_through(cluster_map, selected, X)


def _importance_rank(X, y, survivors, k, seed, gbm, holdout_fraction, repeats):
    """Permutation-importance ranking of `survivors` on a held-out slice."""
    config = gbm if gbm is not None else GbmConfig()
    fit_rows, hold_rows = _internal_split(X.shape[0], holdout_fraction, derive_seed(seed, "holdout"))
    sub = X[:, survivors]
    model = config.as_classifier().fit(sub[fit_rows], y[fit_rows])
    imp = permutation_importance(
        model, sub[hold_rows], y[hold_rows], seed=derive_seed(seed, "perm"), repeats=repeats
    )
    order = rank_descending(imp)[: min(k, len(survivors))]
    return [int(survivors[i]) for i in order], [float(imp[i]) for i in order]


class ClusterFisherSelector(BaseSelector):
    """Clustering down to 2k representatives, then Fisher for the final k.

    With at most 2k features to start from the clustering stage is
    skipped and the result is exactly the Fisher selection (then no
    cluster map is produced).
    """

    def __init__(self, k=10, seed=0, max_iter=100):
        self.k = k
        self.seed = seed
        self.max_iter = max_iter

    def _fit(self, X, y):
        n_features = X.shape[1]
        if n_features <= 2 * self.k:
            self.selected_, self.scores_ = _fisher_select(X, y, self.k)
            return
        survivors, _, cluster_map = _cluster_select(X, 2 * self.k, self.seed, self.max_iter)
        survivors = sorted(survivors)
        local_sel, local_scores = _fisher_select(X[:, survivors], y, self.k)
        self.selected_ = [int(survivors[i]) for i in local_sel]
        self.scores_ = local_scores
        self.cluster_map_ = _remap_through(cluster_map, self.selected_, X)
