"""Gradient-boosted trees on logistic loss, from scratch.

The booster fits depth-limited regression trees to the negative
gradient (residuals y - p) each round, with Newton leaf values scaled
by the learning rate. Split search works on value histograms: candidate
thresholds are midpoints between distinct values observed in the node,
and the first best split wins ties (lower feature index, then lower
threshold), so training is fully deterministic for a given config.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from .errors import DegenerateSplit, MissingFeature, ValidationError
from .seeding import rng_from
from .validation import check_two_classes, check_X_y

_LEAF_CLIP = 10.0  # bounds |F| so probabilities stay strictly inside (0, 1)
_MIN_GAIN = 1e-12


@dataclass(frozen=True)
class GbmConfig:
    rounds: int = 100
    learning_rate: float = 0.1
    max_depth: int = 3
    min_leaf: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.rounds < 0:
            raise ValidationError("rounds must be >= 0")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValidationError("learning_rate must be in (0, 1]")
        if self.max_depth < 1:
            raise ValidationError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValidationError("min_leaf must be >= 1")

    def as_classifier(self) -> "GbmClassifier":
        return GbmClassifier(
            rounds=self.rounds,
            learning_rate=self.learning_rate,
            max_depth=self.max_depth,
            min_leaf=self.min_leaf,
            seed=self.seed,
        )


@dataclass
class _Tree:
    """Flat node arrays; node 0 is the root, leaves have feature == -1."""

    feature: list[int] = field(default_factory=list)
    threshold: list[float] = field(default_factory=list)
    left: list[int] = field(default_factory=list)
    right: list[int] = field(default_factory=list)
    value: list[float] = field(default_factory=list)

    def add_leaf(self, value: float) -> int:
        return self._add(-1, 0.0, -1, -1, value)

    def add_split(self, feature: int, threshold: float) -> int:
        return self._add(feature, threshold, -1, -1, 0.0)

    def _add(self, f: int, t: float, l: int, r: int, v: float) -> int:
        self.feature.append(f)
        self.threshold.append(t)
        self.left.append(l)
        self.right.append(r)
        self.value.append(v)
        return len(self.feature) - 1

    def predict(self, X: np.ndarray) -> np.ndarray:
        feat = np.asarray(self.feature)
        thr = np.asarray(self.threshold)
        left = np.asarray(self.left)
        right = np.asarray(self.right)
        val = np.asarray(self.value)
        node = np.zeros(X.shape[0], dtype=np.int64)
        while True:
            internal = feat[node] >= 0
            if not internal.any():
                break
            idx = np.flatnonzero(internal)
            f = feat[node[idx]]
            go_left = X[idx, f] <= thr[node[idx]]
            node[idx] = np.where(go_left, left[node[idx]], right[node[idx]])
        return val[node]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class GbmClassifier(BaseEstimator, ClassifierMixin):
    """Binary gradient-boosting classifier with deterministic training.

    Parameters
    ----------
    rounds : int, default=100
        Number of boosting rounds (trees).
    learning_rate : float, default=0.1
        Shrinkage applied to every leaf value.
    max_depth : int, default=3
        Maximum tree depth.
    min_leaf : int, default=5
        Minimum samples per leaf considered by the split search.
    seed : int, default=0
        Reserved for permutation utilities; training itself is
        deterministic and draws no random numbers.

    Attributes
    ----------
    trees_ : list
        Fitted regression trees, one per round.
    base_score_ : float
        Log-odds of the training positive rate.
    train_losses_ : ndarray of shape (rounds + 1,)
        Mean logistic loss before boosting and after each round.
    """

    def __init__(self, rounds=100, learning_rate=0.1, max_depth=3, min_leaf=5, seed=0):
        self.rounds = rounds
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.seed = seed

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        check_two_classes(y)
        GbmConfig(self.rounds, self.learning_rate, self.max_depth, self.min_leaf, self.seed)
        n, n_features = X.shape
        yf = y.astype(np.float64)
        sign = 2.0 * yf - 1.0

        p_hat = yf.mean()
        self.base_score_ = float(np.log(p_hat / (1.0 - p_hat)))
        self.n_features_in_ = n_features
        self.classes_ = np.array([0, 1])

        # per-feature value histograms: codes into the sorted distinct values
        uniques: list[np.ndarray] = []
        codes = np.empty((n, n_features), dtype=np.int32)
        for j in range(n_features):
            u, inv = np.unique(X[:, j], return_inverse=True)
            uniques.append(u)
            codes[:, j] = inv

        raw = np.full(n, self.base_score_)
        losses = [float(np.mean(np.logaddexp(0.0, -sign * raw)))]
        trees: list[_Tree] = []
        all_rows = np.arange(n)
        for _ in range(self.rounds):
            p = _sigmoid(raw)
            resid = yf - p
            hess = p * (1.0 - p)
            tree = _Tree()
            deltas = np.zeros(n)
            self._grow(tree, codes, uniques, all_rows, resid, hess, 0, deltas)
            raw = raw + self.learning_rate * deltas
            trees.append(tree)
            losses.append(float(np.mean(np.logaddexp(0.0, -sign * raw))))
        self.trees_ = trees
        self.train_losses_ = np.asarray(losses)
        return self

    def _grow(self, tree, codes, uniques, rows, resid, hess, depth, deltas) -> int:
        r = resid[rows]
        n_node = rows.shape[0]
        if depth < self.max_depth and n_node >= 2 * self.min_leaf:
            best = self._best_split(codes, uniques, rows, r)
            if best is not None:
                feature, threshold, go_left = best
                node = tree.add_split(feature, threshold)
                left = self._grow(tree, codes, uniques, rows[go_left], resid, hess, depth + 1, deltas)
                right = self._grow(tree, codes, uniques, rows[~go_left], resid, hess, depth + 1, deltas)
                tree.left[node] = left
                tree.right[node] = right
                return node
        h_sum = hess[rows].sum()
        w = float(np.clip(r.sum() / (h_sum + 1e-12), -_LEAF_CLIP, _LEAF_CLIP))
        deltas[rows] = w
        return tree.add_leaf(w)

    def _best_split(self, codes, uniques, rows, r):
        n_node = rows.shape[0]
        s_total = r.sum()
        parent = s_total * s_total / n_node
        best_gain = _MIN_GAIN
        best = None
        node_codes = codes[rows]
        for j in range(codes.shape[1]):
            u = uniques[j]
            if u.shape[0] < 2:
                continue
            cj = node_codes[:, j]
            cnt = np.bincount(cj, minlength=u.shape[0])
            obs = np.flatnonzero(cnt)
            if obs.shape[0] < 2:
                continue
            sums = np.bincount(cj, weights=r, minlength=u.shape[0])
            cand = obs[:-1]
            n_left = np.cumsum(cnt)[cand]
            n_right = n_node - n_left
            s_left = np.cumsum(sums)[cand]
            s_right = s_total - s_left
            gain = s_left * s_left / n_left + s_right * s_right / n_right - parent
            gain[(n_left < self.min_leaf) | (n_right < self.min_leaf)] = -np.inf
            i = int(np.argmax(gain))  # first max: ties go to the lower threshold
            if gain[i] > best_gain:
                best_gain = gain[i]
                c = cand[i]
                # midpoint between the node's observed values around the cut
                best = (j, float((u[c] + u[obs[i + 1]]) / 2.0), cj <= c)
        return best

    def decision_function(self, X) -> np.ndarray:
        X = self._check_rows(X)
        raw = np.full(X.shape[0], self.base_score_)
        for tree in self.trees_:
            raw += self.learning_rate * tree.predict(X)
        return raw

    def predict_proba(self, X) -> np.ndarray:
        p = _sigmoid(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)

    def used_features(self) -> set[int]:
        used: set[int] = set()
        for tree in self.trees_:
            used.update(f for f in tree.feature if f >= 0)
        return used

    def to_json(self) -> dict:
        """Debug dump: base score plus every tree's flat node arrays."""
        return {
            "base_score": self.base_score_,
            "learning_rate": self.learning_rate,
            "n_features": self.n_features_in_,
            "trees": [
                {
                    "feature": list(tree.feature),
                    "threshold": list(tree.threshold),
                    "left": list(tree.left),
                    "right": list(tree.right),
                    "value": list(tree.value),
                }
                for tree in self.trees_
            ],
        }

    def _check_rows(self, X) -> np.ndarray:
        from .validation import as_array

        X = as_array(X)
        if X.shape[1] != self.n_features_in_:
            raise MissingFeature(self.n_features_in_, X.shape[1])
        return X


def split_train_test(n_cases: int, train_fraction: float = 0.25, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Seeded disjoint exhaustive split; train size = round(fraction * n)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValidationError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if n_cases < 2:
        raise DegenerateSplit(n_cases, train_fraction)
    n_train = int(round(train_fraction * n_cases))
    if n_train == 0 or n_train == n_cases:
        raise DegenerateSplit(n_cases, train_fraction)
    perm = np.random.default_rng(seed).permutation(n_cases)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int
    predict_ns: int
    train_ns: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def evaluate(model: GbmClassifier, X, y, train_ns: int = 0) -> EvalMetrics:
    """Accuracy and confusion counts at the 0.5 threshold."""
    _, y = check_X_y(X, y)
    t0 = time.perf_counter_ns()
    pred = model.predict(X).astype(bool)
    predict_ns = time.perf_counter_ns() - t0
    tp = int((pred & y).sum())
    fp = int((pred & ~y).sum())
    fn = int((~pred & y).sum())
    tn = int((~pred & ~y).sum())
    return EvalMetrics(
        accuracy=float((tp + tn) / y.shape[0]),
        tp=tp,
        fp=fp,
        fn=fn,
        tn=tn,
        predict_ns=predict_ns,
        train_ns=train_ns,
    )


def permutation_importance(model: GbmClassifier, X, y, seed: int = 0, repeats: int = 3) -> np.ndarray:
    """Mean accuracy drop when a column is shuffled, per feature.

    Rows should be held out from the model's training rows. Features no
    tree references score exactly 0.
    """
    X, y = check_X_y(X, y)
    if X.shape[1] != model.n_features_in_:
        raise MissingFeature(model.n_features_in_, X.shape[1])
    yi = y.astype(np.int64)
    baseline = float((model.predict(X) == yi).mean())
    used = model.used_features()

    importances = np.zeros(X.shape[1])
    work = X.copy()
    n = X.shape[0]
    for j in range(X.shape[1]):
        if j not in used:
            continue
        original = work[:, j].copy()
        drops = np.empty(repeats)
        for rep in range(repeats):
            perm = rng_from(seed, j, rep).permutation(n)
            work[:, j] = original[perm]
            drops[rep] = baseline - float((model.predict(work) == yi).mean())
        work[:, j] = original
        importances[j] = drops.mean()
    return importances
