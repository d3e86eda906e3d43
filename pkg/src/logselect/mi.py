"""Plugin mutual-information estimation and coverage scores.

Columns are discretized into min(bins, distinct) equal-frequency
buckets (binary columns pass through unbinned), and MI is the plugin
estimate of the joint code distribution, in bits. A batched path
computes MI of every column against one fixed column with a single
matrix product; it shares its arithmetic with the scalar path so both
agree bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptySelection, LengthMismatch


def _equal_freq_edges(sorted_cols: np.ndarray, n_buckets: int) -> np.ndarray:
    """Bucket edges at the 1/B..(B-1)/B quantiles of pre-sorted columns.

    `sorted_cols` is (n, f); returns (B-1, f) edges by linear
    interpolation between order statistics.
    """
    n = sorted_cols.shape[0]
    pos = np.arange(1, n_buckets) * (n - 1) / n_buckets
    lo = np.floor(pos).astype(np.int64)
    hi = np.minimum(lo + 1, n - 1)
    frac = (pos - lo)[:, None]
    base = sorted_cols[lo].astype(np.float64)
    return base + frac * (sorted_cols[hi].astype(np.float64) - base)


def _discretize_matrix(X: np.ndarray, bins: int) -> tuple[np.ndarray, np.ndarray]:
    """Column-wise codes and level counts for a whole matrix.

    Every column gets min(bins, distinct) buckets: columns with at most
    `bins` distinct values pass through as ranks (thresholds at the
    distinct values themselves); denser columns get equal-frequency
    edges. Codes are the count of thresholds <= value, so the scalar
    and batched paths share one arithmetic.
    """
    X = np.asarray(X)
    if X.dtype == bool or not np.issubdtype(X.dtype, np.floating):
        X = X.astype(np.float64)
    n, f = X.shape
    if n == 0 or f == 0:
        return np.zeros((n, f), dtype=np.int64), np.ones(f, dtype=np.int64)

    S = np.sort(X, axis=0)
    changes = S[1:] != S[:-1]  # (n-1, f)
    distinct = 1 + changes.sum(axis=0)
    # binary columns pass through unbinned even when bins == 1
    pass_through = max(bins, 2)
    identity = distinct <= pass_through
    levels = np.where(identity, np.maximum(distinct, 1), bins).astype(np.int64)

    n_thr = pass_through - 1
    thresholds = np.full((n_thr, f), np.inf)
    if identity.any():
        id_cols = np.flatnonzero(identity)
        cum = np.cumsum(changes[:, id_cols], axis=0)
        s_id = S[:, id_cols]
        for r in range(1, pass_through):
            take = distinct[id_cols] > r
            if take.any():
                pos = (cum >= r).argmax(axis=0) + 1  # index of the (r+1)-th distinct value
                thresholds[r - 1, id_cols[take]] = s_id[pos[take], np.flatnonzero(take)]
    if bins >= 2 and (~identity).any():
        qcols = ~identity
        thresholds[: bins - 1, qcols] = _equal_freq_edges(S[:, qcols], bins)

    codes = np.zeros((n, f), dtype=np.int64)
    for r in range(n_thr):
        codes += X >= thresholds[r][None, :]
    return codes, levels


def _discretize(x: np.ndarray, bins: int) -> tuple[np.ndarray, int]:
    """Return (codes, levels): bucket codes in [0, levels)."""
    codes, levels = _discretize_matrix(np.asarray(x)[:, None], bins)
    return codes[:, 0], int(levels[0])


def _mi_from_joint(joint: np.ndarray) -> np.ndarray:
    """Plugin MI in bits from joint count tables, shape (..., A, B)."""
    total = joint.sum(axis=(-2, -1), keepdims=True)
    total = np.where(total == 0, 1.0, total)
    p = joint / total
    px = p.sum(axis=-1, keepdims=True)
    py = p.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * (np.log2(p) - np.log2(px) - np.log2(py))
    terms[p == 0] = 0.0
    return terms.sum(axis=(-2, -1))


def mutual_information(x: Sequence, y: Sequence, bins: int = 4) -> float:
    """Mutual information between two columns, in bits."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise LengthMismatch(x.shape[0], y.shape[0])
    cx, bx = _discretize(x, bins)
    cy, by = _discretize(y, bins)
    joint = np.bincount(cx * by + cy, minlength=bx * by).reshape(bx, by).astype(np.float64)
    return float(_mi_from_joint(joint))


class CodeTable:
    """Discretized codes for every column of a matrix, plus the one-hot
    expansion used to batch joint counts through a matrix product."""

    def __init__(self, X: np.ndarray, bins: int):
        X = np.asarray(X)
        n, f = X.shape
        self.bins = bins
        self.n_rows = n
        self.codes, self.levels = _discretize_matrix(X, bins)
        self.max_levels = int(self.levels.max()) if f else 1
        # ragged slot layout: column j owns slots offsets[j] .. offsets[j]+levels[j)
        self.offsets = np.concatenate(([0], np.cumsum(self.levels))).astype(np.int64)
        self._onehot: np.ndarray | None = None
        self._gather: np.ndarray | None = None

    def _expanded(self) -> np.ndarray:
        if self._onehot is None:
            n, f = self.codes.shape
            out = np.zeros((n, int(self.offsets[-1])), dtype=np.float32, order="F")
            out[np.arange(n)[:, None], self.codes + self.offsets[:-1][None, :]] = 1.0
            self._onehot = out
        return self._onehot

    def _pad_index(self) -> np.ndarray:
        # maps (column, level) to its slot; unused levels point at a zero pad row
        if self._gather is None:
            f = self.codes.shape[1]
            width = int(self.offsets[-1])
            idx = self.offsets[:-1][:, None] + np.arange(self.max_levels)[None, :]
            idx[np.arange(self.max_levels)[None, :] >= self.levels[:, None]] = width
            self._gather = idx
        return self._gather

    def mi_vs(self, fixed_codes: np.ndarray, fixed_levels: int) -> np.ndarray:
        """MI of every column against one fixed code column, in bits."""
        n, f = self.codes.shape
        if fixed_codes.shape[0] != n:
            raise LengthMismatch(fixed_codes.shape[0], n)
        onehot = np.zeros((n, fixed_levels), dtype=np.float32)
        onehot[np.arange(n), fixed_codes] = 1.0
        counts = self._expanded().T @ onehot  # (total slots, fixed_levels)
        counts = np.vstack([counts, np.zeros((1, fixed_levels), dtype=np.float32)])
        joint = counts[self._pad_index()].astype(np.float64)  # (f, max_levels, fixed_levels)
        return _mi_from_joint(joint)

    def column(self, j: int) -> tuple[np.ndarray, int]:
        return self.codes[:, j], int(self.levels[j])


@dataclass(frozen=True)
class MiCoverage:
    """How much information a selected subset retains."""

    vs_predictors: float
    vs_outcome: float
    bins: int


class CoverageScorer:
    """Coverage of feature subsets against one matrix and one outcome.

    Builds the code table once so repeated scoring against the same
    predictors (as the bench harness does) stays cheap. Thread-safe
    after construction.
    """

    def __init__(self, X, labels, bins: int = 4):
        from .validation import as_array, as_label_array

        X = as_array(X)
        y = as_label_array(labels)
        if X.shape[0] != y.shape[0]:
            raise LengthMismatch(X.shape[0], y.shape[0])
        self.bins = bins
        self.n_features = X.shape[1]
        self._table = CodeTable(X, bins)
        self._table._expanded()
        self._ycodes, self._ylevels = _discretize(y, bins)
        self._relevance = self._table.mi_vs(self._ycodes, self._ylevels)
        self._entropies: np.ndarray | None = None

    def _column_entropies(self) -> np.ndarray:
        if self._entropies is None:
            out = np.empty(self.n_features)
            for j in range(self.n_features):
                codes, levels = self._table.column(j)
                counts = np.bincount(codes, minlength=levels).astype(np.float64)
                p = counts / counts.sum()
                nz = p > 0
                out[j] = float(-(p[nz] * np.log2(p[nz])).sum())
            self._entropies = out
        return self._entropies

    def score(self, selected: Sequence[int]) -> MiCoverage:
        selected = list(selected)
        if not selected:
            raise EmptySelection()
        if any(j < 0 or j >= self.n_features for j in selected):
            raise IndexError("selected feature index out of range")

        if len(set(selected)) == self.n_features:
            # self-information dominates the max: mean column entropy
            vs_predictors = float(self._column_entropies().mean())
            vs_outcome = float(self._relevance.max())
        else:
            best = np.full(self.n_features, -np.inf)
            for a in selected:
                codes_a, levels_a = self._table.column(a)
                best = np.maximum(best, self._table.mi_vs(codes_a, levels_a))
            vs_predictors = float(best.mean())
            vs_outcome = float(max(self._relevance[j] for j in selected))
        return MiCoverage(
            vs_predictors=max(0.0, vs_predictors),
            vs_outcome=max(0.0, vs_outcome),
            bins=self.bins,
        )


def mi_coverage(selected: Sequence[int], X, labels, bins: int = 4) -> MiCoverage:
    """Coverage of `selected` against all predictors and the outcome.

    vs_predictors: mean over all columns b of max over selected a of
    MI(a, b). vs_outcome: max over selected a of MI(a, labels).
    """
    return CoverageScorer(X, labels, bins).score(selected)
