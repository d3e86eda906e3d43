"""Shared selector machinery: the sklearn-style base class and result type.

Every selector maps (X, y, k, seed) to an ordered subset of at most k
feature columns, deterministically. Fitted selectors expose
``selected_`` (ordered indices), ``scores_`` (algorithm-specific),
``cluster_map_`` (feature -> representative, clustering variants only)
and ``elapsed_ns_`` (wall clock of the selection itself).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ..errors import ValidationError
from ..validation import as_array, as_label_array


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of one selection call."""

    selected: tuple[int, ...]
    scores: tuple[float, ...]
    cluster_map: np.ndarray | None
    elapsed_ns: int

    def to_json(self, feature_names: Sequence[str]) -> dict:
        payload = {
            "selected": [feature_names[j] for j in self.selected],
            "scores": [float(s) for s in self.scores],
            "elapsed_ns": self.elapsed_ns,
        }
        if self.cluster_map is not None:
            payload["cluster_map"] = {
                feature_names[j]: feature_names[int(r)] for j, r in enumerate(self.cluster_map)
            }
        return payload


class BaseSelector(BaseEstimator):
    """Base class for the feature selectors.

    Subclasses implement ``_fit(X, y)`` and set ``selected_``,
    ``scores_`` and optionally ``cluster_map_``. ``k`` and ``seed`` are
    common constructor parameters.
    """

    requires_labels = True

    def fit(self, X, y=None):
        X = as_array(X)
        if self.k < 1:
            raise ValidationError(f"k must be >= 1, got {self.k}")
        if y is not None:
            y = as_label_array(y)
            if y.shape[0] != X.shape[0]:
                raise ValidationError(
                    f"labels length {y.shape[0]} does not match {X.shape[0]} cases"
                )
        elif self.requires_labels:
            raise ValidationError(f"{type(self).__name__} requires labels")

        self.n_features_in_ = X.shape[1]
        self.cluster_map_ = None
        t0 = time.perf_counter_ns()
        self._fit(X, y)
        self.elapsed_ns_ = time.perf_counter_ns() - t0

        assert len(set(self.selected_)) == len(self.selected_)
        return self

    def _fit(self, X: np.ndarray, y: np.ndarray | None) -> None:
        raise NotImplementedError

    def get_support(self, indices: bool = False):
        if indices:
            return np.asarray(self.selected_, dtype=np.int64)
        mask = np.zeros(self.n_features_in_, dtype=bool)
        mask[list(self.selected_)] = True
        return mask

    def transform(self, X):
        X = as_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValidationError(
                f"X has {X.shape[1]} features, selector was fitted on {self.n_features_in_}"
            )
        return X[:, list(self.selected_)]

    def fit_transform(self, X, y=None):
        return self.fit(X, y).transform(X)

    def result(self) -> SelectionResult:
        return SelectionResult(
            selected=tuple(int(j) for j in self.selected_),
            scores=tuple(float(s) for s in self.scores_),
            cluster_map=None if self.cluster_map_ is None else np.asarray(self.cluster_map_).copy(),
            elapsed_ns=int(self.elapsed_ns_),
        )


def rank_descending(values: np.ndarray) -> np.ndarray:
    """Indices ordered by descending value, ties to the lower index."""
    idx = np.arange(values.shape[0])
    return np.lexsort((idx, -values))
