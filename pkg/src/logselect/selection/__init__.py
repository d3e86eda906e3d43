"""The nine feature-selection algorithms behind one registry.

Each selector is an sklearn-style estimator (``fit(X, y)``, then
``selected_`` / ``get_support()`` / ``transform``); ``run_selection``
wraps construction, fitting and timing into one call returning a
:class:`SelectionResult`.
"""

from __future__ import annotations

from ..errors import ValidationError
from .base import BaseSelector, SelectionResult
from .basic import FisherSelector, RandomSelector, fisher_scores
from .cluster import ClusterFisherSelector, ClusterImportanceSelector, ClusterSelector
from .lasso import LassoVoteSelector, fit_lasso_path, lambda_grid, lambda_max
from .mrmr import ClusterMrmrSelector, MrmrSelector
from .recursive import RecursiveSelector, elimination_schedule

ALGORITHMS: dict[str, type[BaseSelector]] = {
    "random": RandomSelector,
    "fisher": FisherSelector,
    "cluster": ClusterSelector,
    "clust_importance": ClusterImportanceSelector,
    "clust_fisher": ClusterFisherSelector,
    "mrmr": MrmrSelector,
    "clust_mrmr": ClusterMrmrSelector,
    "lasso_vote": LassoVoteSelector,
    "recursive": RecursiveSelector,
}


def make_selector(algorithm: str, k: int, seed: int, **params) -> BaseSelector:
    if algorithm not in ALGORITHMS:
        known = ", ".join(sorted(ALGORITHMS))
        raise ValidationError(f"unknown algorithm {algorithm!r} (known: {known})")
    return ALGORITHMS[algorithm](k=k, seed=seed, **params)


def run_selection(X, y, algorithm: str, k: int, seed: int, **params) -> SelectionResult:
    """Fit the named selector and return its result."""
    selector = make_selector(algorithm, k, seed, **params)
    selector.fit(X, y)
    return selector.result()


__all__ = [
    "ALGORITHMS",
    "BaseSelector",
    "ClusterFisherSelector",
    "ClusterImportanceSelector",
    "ClusterMrmrSelector",
    "ClusterSelector",
    "FisherSelector",
    "LassoVoteSelector",
    "MrmrSelector",
    "RandomSelector",
    "RecursiveSelector",
    "SelectionResult",
    "elimination_schedule",
    "fisher_scores",
    "fit_lasso_path",
    "lambda_grid",
    "lambda_max",
    "make_selector",
    "run_selection",
]
