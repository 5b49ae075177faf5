import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from eeg_probe.errors import DimensionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    n_iter: int


def squared_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d = (x * x).sum(axis=1)[:, None] - 2.0 * x @ centroids.T + (centroids * centroids).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_plus_plus(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    centroids = [x[rng.integers(len(x))]]
    closest = squared_distances(x, np.asarray(centroids))[:, 0]
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            idx = rng.choice(len(x), p=closest / total)
        else:
            idx = rng.integers(len(x))
        centroids.append(x[idx])
        closest = np.minimum(closest, squared_distances(x, x[idx][None, :])[:, 0])
    return np.asarray(centroids)


def _lloyd(x: np.ndarray, centroids: np.ndarray, max_iter: int, tol: float) -> KMeansResult:
    k = len(centroids)
    previous = np.inf
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        dist = squared_distances(x, centroids)
        assignments = dist.argmin(axis=1)
        point_dist = dist[np.arange(len(x)), assignments]
        # empty clusters take over the farthest point among clusters with more than one member
        for c in range(k):
            if not np.any(assignments == c):
                counts = np.bincount(assignments, minlength=k)
                far = int(np.where(counts[assignments] > 1, point_dist, -np.inf).argmax())
                assignments[far] = c
                point_dist[far] = 0.0
                centroids = centroids.copy()
                centroids[c] = x[far]
        inertia = float(point_dist.sum())
        assert inertia <= previous + 1e-9 * (1.0 + abs(previous)), \
            f'k-means inertia increased from {previous} to {inertia}'
        previous = inertia
        updated = np.stack([x[assignments == c].mean(axis=0) for c in range(k)])
        shift = float(np.sqrt(((updated - centroids) ** 2).sum(axis=1)).max())
        centroids = updated
        if shift <= tol:
            break
    dist = squared_distances(x, centroids)
    assignments = dist.argmin(axis=1)
    inertia = float(dist[np.arange(len(x)), assignments].sum())
    return KMeansResult(assignments=assignments, centroids=centroids, inertia=inertia, n_iter=n_iter)


def kmeans(emb: np.ndarray, k: int, restarts: int = 10, max_iter: int = 300, tol: float = 1e-6,
           seed: int = 0) -> KMeansResult:
    """
    Lloyd's algorithm with k-means++ seeding; the best of `restarts` runs by inertia is returned.
    """
    x = np.asarray(emb, dtype=np.float64)
    if x.ndim != 2:
        raise DimensionError(f'kmeans needs an N x D matrix, got shape {x.shape}')
    if k < 1 or len(x) < k:
        raise DimensionError(f'kmeans needs 1 <= k <= N, got k={k} with N={len(x)}')
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(max(restarts, 1)):
        result = _lloyd(x, kmeans_plus_plus(x, k, rng), max_iter=max_iter, tol=tol)
        if best is None or result.inertia < best.inertia:
            best = result
    logger.debug(f'kmeans k={k}: inertia {best.inertia:.6g} after {best.n_iter} iterations')
    return best


def contingency_matrix(assignments: np.ndarray, labels: np.ndarray) -> np.ndarray:
    _, cluster_idx = np.unique(assignments, return_inverse=True)
    _, label_idx = np.unique(labels, return_inverse=True)
    matrix = np.zeros((cluster_idx.max() + 1, label_idx.max() + 1), dtype=np.int64)
    np.add.at(matrix, (cluster_idx, label_idx), 1)
    return matrix


def cluster_accuracy(assignments: np.ndarray, true_labels: np.ndarray) -> float:
    """
    Accuracy after the maximum-weight one-to-one matching of cluster ids to labels.
    """
    assignments = np.asarray(assignments).ravel()
    true_labels = np.asarray(true_labels).ravel()
    if len(assignments) != len(true_labels):
        raise DimensionError(f'{len(assignments)} assignments for {len(true_labels)} labels')
    if len(assignments) == 0:
        raise DimensionError(f'cluster_accuracy of an empty assignment')
    matrix = contingency_matrix(assignments, true_labels)
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    return float(matrix[rows, cols].sum()) / len(assignments)
