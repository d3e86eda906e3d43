"""Lloyd k-means with k-means++ seeding, deterministic per generator.

Feature clustering treats every feature column as one point whose
dimensions are the cases. Convergence is declared when assignments
stabilise; empty clusters are re-seeded with the point farthest from
its assigned centroid.
"""

from __future__ import annotations

import numpy as np


def _sq_dists_to(points: np.ndarray, centroid: np.ndarray) -> np.ndarray:
    diff = points - centroid[None, :]
    return np.einsum("ij,ij->i", diff, diff)


def _assign(points: np.ndarray, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # ||p - c||^2 = ||p||^2 - 2 p.c + ||c||^2 ; argmin ties go to the lowest cluster id
    p2 = np.einsum("ij,ij->i", points, points)[:, None]
    c2 = np.einsum("ij,ij->i", centroids, centroids)[None, :]
    d2 = p2 - 2.0 * (points @ centroids.T) + c2
    np.maximum(d2, 0.0, out=d2)
    labels = np.argmin(d2, axis=1)
    return labels, d2[np.arange(points.shape[0]), labels]


def _plus_plus_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = _sq_dists_to(points, points[chosen[0]])
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            remaining = np.setdiff1d(np.arange(n), chosen[:i])
            chosen[i] = remaining[0]
        else:
            chosen[i] = rng.choice(n, p=d2 / total)
        d2 = np.minimum(d2, _sq_dists_to(points, points[chosen[i]]))
    return points[chosen].astype(np.float64)


def _lloyd(points: np.ndarray, k: int, rng: np.random.Generator, max_iter: int) -> tuple[np.ndarray, np.ndarray]:
    n = points.shape[0]
    centroids = _plus_plus_init(points, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    for _ in range(max_iter):
        new_labels, dists = _assign(points, centroids)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for c in range(k):
            members = labels == c
            if members.any():
                centroids[c] = points[members].mean(axis=0)
            else:
                far = int(np.argmax(dists))
                centroids[c] = points[far]
                dists[far] = -1.0
    return centroids, labels


def kmeans_fit(
    points: np.ndarray,
    k: int,
    rng: np.random.Generator,
    max_iter: int = 100,
    n_init: int = 10,
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster `points` (n x d) into k groups; returns (centroids, labels).

    Runs `n_init` seeded restarts and keeps the lowest-distortion one
    (strictly better wins, so ties keep the earliest restart).
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for {n} points")

    best: tuple[np.ndarray, np.ndarray] | None = None
    best_inertia = np.inf
    for _ in range(max(1, n_init)):
        centroids, labels = _lloyd(points, k, rng, max_iter)
        _, dists = _assign(points, centroids)
        inertia = float(dists.sum())
        if inertia < best_inertia:
            best_inertia = inertia
            best = (centroids, labels)
    return best
