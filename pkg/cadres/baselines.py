"""Cadres Comparator Models.

K-means clustering (Lloyd iterations from k-means++ seeds) followed by one
closed-form ridge regression per cluster. This is the cluster-then-regress
comparator for the supervised cadre model; with K = 1 it reduces to global
ridge regression.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging

import numpy as np

from dataclasses import dataclass, field
from typing import Optional

from cadres.data import Dataset
from cadres.errors import BaselineError


def _sq_dist(X: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """N x K squared Euclidean distances; `centers` is K x P."""
    return np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)


def kmeans_plusplus(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """Choose K distinct row indices by k-means++ seeding.

    The first row is uniform; each next row is drawn with probability
    proportional to its squared distance from the nearest chosen row. When
    every unchosen row coincides with a chosen one, the next row is uniform
    over the unchosen rows.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if n < K:
        raise BaselineError(f'Cannot seed {K} centers from {n} rows')

    chosen = [int(rng.integers(n))]
    dist_sq = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    for _ in range(1, K):
        probs = dist_sq.copy()
        probs[chosen] = 0.0
        total = probs.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=probs / total))
        else:
            nxt = int(rng.choice(np.setdiff1d(np.arange(n), chosen)))

        chosen.append(nxt)
        dist_sq = np.minimum(dist_sq, np.sum((X - X[nxt]) ** 2, axis=1))

    return np.asarray(chosen)


@dataclass(frozen=True)
class KMeansModel:
    """Fitted K-means Clustering.

    `centers` is P x K. `labels` are the training assignments,
    `inertia_history` the within-cluster sum of squares after every
    assignment step and `n_iter` the number of center updates.
    """
    centers: np.ndarray
    labels: np.ndarray
    inertia_history: tuple[float, ...] = ()
    n_iter: int = 0

    @property
    def K(self) -> int:
        return self.centers.shape[1]

    def predict(self, x: np.ndarray) -> int | np.ndarray:
        """Nearest-center (Euclidean) cluster of each row."""
        x = np.asarray(x, dtype=float)
        labels = np.argmin(_sq_dist(np.atleast_2d(x), self.centers.T), axis=1)
        return int(labels[0]) if x.ndim == 1 else labels


def kmeans_fit(
    ds: Dataset | np.ndarray,
    K: int,
    seed: int,
    max_iter: int = 300,
    *,
    init_centers: Optional[np.ndarray] = None,
) -> KMeansModel:
    """Fit K-means with Lloyd iterations until the assignment is a fixed point.

    `init_centers` (K x P) replaces k-means++ seeding when given. Empty
    clusters keep their previous center.
    """
    X = ds.features if isinstance(ds, Dataset) else np.asarray(ds, dtype=float)
    n = X.shape[0]
    if K < 1:
        raise BaselineError(f'K must be positive, got {K}')
    if n < K:
        raise BaselineError(f'Cannot fit {K} clusters to {n} rows')

    if init_centers is None:
        centers = X[kmeans_plusplus(X, K, np.random.default_rng(seed))].copy()
    else:
        centers = np.array(init_centers, dtype=float)
        if centers.shape != (K, X.shape[1]):
            raise BaselineError(f'Initial centers must have shape {(K, X.shape[1])}, got {centers.shape}')

    labels = None
    history = []
    n_iter = 0
    while True:
        d2 = _sq_dist(X, centers)
        new_labels = np.argmin(d2, axis=1)
        history.append(float(d2[np.arange(n), new_labels].sum()))

        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        if n_iter >= max_iter:
            logging.debug(f'K-means stopped at max_iter={max_iter} before converging')
            break

        for k in range(K):
            mask = labels == k
            if mask.any():
                centers[k] = X[mask].mean(axis=0)
        n_iter += 1

    logging.debug(f'K-means with K={K} converged after {n_iter} updates, inertia {history[-1]:.6g}')
    return KMeansModel(centers=centers.T, labels=labels, inertia_history=tuple(history), n_iter=n_iter)


def ridge_fit(X: np.ndarray, y: np.ndarray, ridge: float) -> tuple[np.ndarray, float]:
    """Closed-form ridge regression with an unpenalized intercept.

    Minimizes sum (y - X w - w0)^2 + ridge ||w||^2 by solving the centered
    normal equations.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if ridge < 0:
        raise BaselineError(f'Ridge strength must be nonnegative, got {ridge}')

    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    A = Xc.T @ Xc + ridge * np.eye(X.shape[1])
    if ridge == 0 and np.linalg.matrix_rank(A) < X.shape[1]:
        raise BaselineError('Ridge system is singular with ridge=0; use a ridge strength > 0')

    w = np.linalg.solve(A, Xc.T @ (y - y_mean))
    return w, float(y_mean - x_mean @ w)


@dataclass(frozen=True)
class ClusterwiseRidge:
    """K-means Clusters with one Ridge Regression per Cluster.

    `weights` is K x P and `intercepts` has length K. Clusters flagged in
    `uses_global` had no training rows and carry the global ridge model.
    """
    kmeans: KMeansModel
    weights: np.ndarray
    intercepts: np.ndarray
    ridge: float
    uses_global: tuple[bool, ...] = field(default=())


def clusterwise_ridge_fit(
    ds: Dataset,
    K: int,
    ridge: float,
    seed: int,
    max_iter: int = 300,
) -> ClusterwiseRidge:
    """Fit K-means on the features, then ridge regression inside every cluster."""
    km = kmeans_fit(ds, K, seed, max_iter)
    X, y = ds.features, ds.target

    global_model = None
    weights = np.zeros((K, ds.P))
    intercepts = np.zeros(K)
    uses_global = []
    for k in range(K):
        mask = km.labels == k
        if mask.any():
            weights[k], intercepts[k] = ridge_fit(X[mask], y[mask], ridge)
            uses_global.append(False)
        else:
            if global_model is None:
                global_model = ridge_fit(X, y, ridge)
            logging.debug(f'Cluster {k} is empty, using the global ridge model')
            weights[k], intercepts[k] = global_model
            uses_global.append(True)

    return ClusterwiseRidge(
        kmeans=km,
        weights=weights,
        intercepts=intercepts,
        ridge=float(ridge),
        uses_global=tuple(uses_global),
    )


def clusterwise_predict(model: ClusterwiseRidge, x: np.ndarray) -> float | np.ndarray:
    """Predict with the ridge model of the nearest cluster center."""
    x = np.asarray(x, dtype=float)
    X = np.atleast_2d(x)
    labels = np.atleast_1d(model.kmeans.predict(X))
    pred = np.sum(X * model.weights[labels], axis=1) + model.intercepts[labels]
    return float(pred[0]) if x.ndim == 1 else pred
