"""Cadres Hyperparameter Selection.

Grid search with k-fold cross-validation over a (standardized) training set,
for the supervised cadre model and for the clusterwise ridge comparator.
Grid points and folds are independent and may run on a thread pool; the
results are always reduced in grid order.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import itertools
import logging

import numpy as np
import pandas as pd

from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

from cadres.baselines import clusterwise_predict, clusterwise_ridge_fit
from cadres.config import Grid, Hyperparams, TrainConfig
from cadres.data import Dataset
from cadres.errors import BaselineError, DivergenceError, SelectionError
from cadres.eval import mse
from cadres.optim import train as train_model


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Split range(n) into k disjoint, exhaustive, sorted validation folds."""
    if k < 2:
        raise SelectionError(f'Cross-validation needs at least 2 folds, got {k}')
    if n < k:
        raise SelectionError(f'Cannot make {k} folds from {n} rows')
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(perm, k)]


def _fold_split(train: Dataset, folds: list[np.ndarray], i: int) -> tuple[Dataset, Dataset]:
    fit_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
    return train.take(np.sort(fit_idx)), train.take(folds[i])


def grid_points(grid: Grid, base: Optional[Hyperparams] = None) -> list[Hyperparams]:
    """Expand a Grid into Hyperparams in grid order (M, gamma, lambda_d, lambda_W).

    Fields not covered by the grid (alphas, feature subsets) come from
    `base`. When the grid leaves `lambda_W_values` unset, lambda_W follows
    lambda_d.
    """
    base = base or Hyperparams()
    points = []
    if grid.lambda_W_values is None:
        lambdas = [(lam, lam) for lam in grid.lambda_d_values]
    else:
        lambdas = list(itertools.product(grid.lambda_d_values, grid.lambda_W_values))

    for M, gamma, (lambda_d, lambda_W) in itertools.product(grid.M_values, grid.gamma_values, lambdas):
        points.append(base.model_copy(update={
            'M': M, 'gamma': gamma, 'lambda_d': lambda_d, 'lambda_W': lambda_W,
        }))
    return points


def select_best(table: pd.DataFrame, *, size_col: str = 'M', strength_col: str = 'lambda_W') -> int:
    """Index of the best CV table row.

    Lowest mean MSE wins; ties go to the smaller `size_col`, then the larger
    `strength_col`. Diverged rows are never selected.
    """
    ok = table[~table['diverged'] & np.isfinite(table['mse_mean'])]
    if ok.empty:
        raise SelectionError('Every grid point diverged during cross-validation')

    order = sorted(
        ok.index,
        key=lambda i: (ok.at[i, 'mse_mean'], ok.at[i, size_col], -ok.at[i, strength_col]),
    )
    return int(order[0])


def _reduce(scores: list[float], k: int) -> dict:
    arr = np.asarray(scores, dtype=float).reshape(-1, k)
    diverged = ~np.all(np.isfinite(arr), axis=1)
    with np.errstate(invalid='ignore'):
        means = np.where(diverged, np.nan, arr.mean(axis=1))
        stds = np.where(diverged, np.nan, arr.std(axis=1))
    return {'mse_mean': means, 'mse_std': stds, 'diverged': diverged}


def cross_validate(
    train: Dataset,
    grid: Grid,
    k: int,
    cfg: TrainConfig,
    *,
    base: Optional[Hyperparams] = None,
    seed: Optional[int] = None,
    workers: int = 1,
) -> tuple[Hyperparams, pd.DataFrame]:
    """Select cadre-model hyperparameters by k-fold cross-validation.

    Every grid point is trained on k - 1 folds and scored by validation MSE
    on the held-out fold. Returns the selected Hyperparams and the table of
    mean/std validation MSE per grid point (one row per point, in grid
    order). Folds are drawn with `seed` (defaults to `cfg.seed`).
    """
    points = grid_points(grid, base)
    folds = kfold_indices(train.N, k, cfg.seed if seed is None else seed)

    min_fit = train.N - max(f.size for f in folds)
    M_max = max(grid.M_values)
    if min_fit < M_max:
        raise SelectionError(f'Cross-validation folds have {min_fit} training rows, fewer than M={M_max}')

    def score(task: tuple[int, int]) -> float:
        p, i = task
        hp = points[p]
        fit, val = _fold_split(train, folds, i)
        tag = f'point {p + 1}/{len(points)} fold {i + 1}/{k}'
        try:
            model = train_model(fit, hp, cfg, tag=tag)
        except DivergenceError as exc:
            logging.warning(f'<{tag}> Diverged: {exc}')
            return float('nan')
        return mse(model.predict(val.features), val.target)

    tasks = list(itertools.product(range(len(points)), range(k)))
    logging.info(f'Cross-validating {len(points)} grid points with {k} folds')
    with ThreadPoolExecutor(max_workers=workers) as pool:
        scores = list(pool.map(score, tasks))

    table = pd.DataFrame({
        'M': [hp.M for hp in points],
        'gamma': [hp.gamma for hp in points],
        'lambda_d': [hp.lambda_d for hp in points],
        'lambda_W': [hp.lambda_W for hp in points],
        **_reduce(scores, k),
    })

    best = select_best(table)
    logging.info(f'Selected M={points[best].M}, gamma={points[best].gamma}, '
                 f'lambda_d={points[best].lambda_d}, lambda_W={points[best].lambda_W}')
    return points[best], table


def cross_validate_baseline(
    train: Dataset,
    K_values: Sequence[int],
    ridge_values: Sequence[float],
    k: int,
    seed: int,
    *,
    workers: int = 1,
) -> tuple[tuple[int, float], pd.DataFrame]:
    """Select (K, ridge) for the clusterwise ridge comparator by k-fold CV.

    K = 1 is global ridge regression. Grid points that cannot be fitted on a
    fold (too few rows, singular systems) are flagged as diverged.
    """
    points = list(itertools.product(K_values, ridge_values))
    if not points:
        raise SelectionError('Baseline grid must not be empty')
    folds = kfold_indices(train.N, k, seed)

    def score(task: tuple[int, int]) -> float:
        p, i = task
        K, ridge = points[p]
        fit, val = _fold_split(train, folds, i)
        try:
            model = clusterwise_ridge_fit(fit, K, ridge, seed)
        except BaselineError as exc:
            logging.debug(f'<K={K} ridge={ridge} fold {i + 1}/{k}> Not fitted: {exc}')
            return float('nan')
        return mse(clusterwise_predict(model, val.features), val.target)

    tasks = list(itertools.product(range(len(points)), range(k)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        scores = list(pool.map(score, tasks))

    table = pd.DataFrame({
        'K': [K for K, _ in points],
        'ridge': [ridge for _, ridge in points],
        **_reduce(scores, k),
    })

    best = select_best(table, size_col='K', strength_col='ridge')
    return points[best], table
