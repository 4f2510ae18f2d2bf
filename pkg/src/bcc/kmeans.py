import numpy as np
from scipy.optimize import linear_sum_assignment


def kmeans_pp_seeds(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """K-means++ seeding: first center uniform, then D^2 weighting."""
    N = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[rng.integers(N)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for k in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, N - 1)
        else:
            idx = int(rng.integers(N))
        centers[k] = X[idx]
        d2 = np.minimum(d2, np.sum((X - centers[k]) ** 2, axis=1))
    return centers


def kmeans(X: np.ndarray, K: int, rng: np.random.Generator, max_iter: int = 50) -> np.ndarray:
    """Lloyd's algorithm from K-means++ seeds; returns 0-based labels.

    A center that loses all its points keeps its previous position.
    """
    X = np.asarray(X, dtype=float)
    centers = kmeans_pp_seeds(X, K, rng)
    labels = None
    for _ in range(max_iter):
        d = (X * X).sum(1)[:, None] - 2.0 * X @ centers.T + (centers * centers).sum(1)[None, :]
        new = np.argmin(d, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in range(K):
            members = labels == k
            if members.any():
                centers[k] = X[members].mean(axis=0)
    return labels


def align_labels(labels: np.ndarray, reference: np.ndarray, K: int) -> np.ndarray:
    """Rename ``labels`` so they agree with ``reference`` as often as possible.

    Only label names change, never the partition.
    """
    W = np.zeros((K, K), dtype=np.int64)
    np.add.at(W, (labels, reference), 1)
    rows, cols = linear_sum_assignment(W, maximize=True)
    sigma = np.empty(K, dtype=np.int64)
    sigma[rows] = cols
    return sigma[labels]
