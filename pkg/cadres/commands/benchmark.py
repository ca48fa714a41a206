"""Cadres Benchmark Command.

Repeated random train/test splits comparing the supervised cadre model with
global ridge regression and K-means + ridge. Every split standardizes on its
own training part, selects hyperparameters by cross-validation on that part
and scores the standardized test MSE.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging

import numpy as np
import pandas as pd

from concurrent.futures import ThreadPoolExecutor
from scipy.stats import ttest_rel

from cadres.baselines import clusterwise_predict, clusterwise_ridge_fit
from cadres.config import BenchmarkConfig, Grid, Hyperparams, SplitSpec, TrainConfig
from cadres.data import Dataset, apply_scaler, fit_scaler, load_csv, split
from cadres.errors import DivergenceError
from cadres.eval import mse
from cadres.optim import train
from cadres.select import cross_validate, cross_validate_baseline, grid_points

from .base import CommandRunner

METHOD_SCM = 'scm'
METHOD_RIDGE = 'ridge'
METHOD_KM_RIDGE = 'km_ridge'
METHODS = (METHOD_SCM, METHOD_RIDGE, METHOD_KM_RIDGE)


def split_seeds(seed: int, n_splits: int) -> list[int]:
    """Independent per-split seeds derived from the master seed."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n_splits)]


def run_split(
    ds: Dataset,
    index: int,
    seed: int,
    bench: BenchmarkConfig,
    grid: Grid,
    base: Hyperparams,
    cfg: TrainConfig,
) -> list[dict]:
    """Score every method on one split; returns one row per method."""
    tag = f'split {index + 1}'
    raw_train, raw_test = split(ds, SplitSpec(train_fraction=bench.train_fraction, seed=seed))
    scaler = fit_scaler(raw_train)
    tr, te = apply_scaler(raw_train, scaler), apply_scaler(raw_test, scaler)
    cfg = cfg.model_copy(update={'seed': seed})

    rows = []

    # Supervised cadre model
    points = grid_points(grid, base)
    if len(points) == 1:
        hp = points[0]
    else:
        hp, _ = cross_validate(tr, grid, bench.folds, cfg, base=base, seed=seed)

    try:
        model = train(tr, hp, cfg, tag=tag)
        scm_mse = mse(model.predict(te.features), te.target)
    except DivergenceError as exc:
        logging.warning(f'<{tag}> Cadre model diverged: {exc}')
        scm_mse = float('nan')
    rows.append({
        'split': index + 1,
        'method': METHOD_SCM,
        'test_mse': scm_mse,
        'selected': f'M={hp.M} gamma={hp.gamma} lambda_d={hp.lambda_d} lambda_W={hp.lambda_W}',
    })

    # Global ridge (K = 1) and K-means + ridge
    for method, K_values in ((METHOD_RIDGE, [1]), (METHOD_KM_RIDGE, bench.K_values)):
        (K, ridge), _ = cross_validate_baseline(tr, K_values, bench.ridge_values, bench.folds, seed)
        fitted = clusterwise_ridge_fit(tr, K, ridge, seed)
        rows.append({
            'split': index + 1,
            'method': method,
            'test_mse': mse(clusterwise_predict(fitted, te.features), te.target),
            'selected': f'K={K} ridge={ridge}',
        })

    logging.info(f'<{tag}> ' + ', '.join(f'{r["method"]} {r["test_mse"]:.4f}' for r in rows))
    return rows


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation of test MSE per method.

    `p_value` is the paired t-test of each baseline against the cadre model
    across splits (NaN with fewer than two usable splits).
    """
    wide = results.pivot(index='split', columns='method', values='test_mse')
    rows = []
    for method in METHODS:
        values = wide[method].to_numpy(dtype=float)
        p_value = float('nan')
        if method != METHOD_SCM:
            ok = np.isfinite(values) & np.isfinite(wide[METHOD_SCM].to_numpy(dtype=float))
            if ok.sum() >= 2:
                p_value = float(ttest_rel(wide[METHOD_SCM].to_numpy(dtype=float)[ok], values[ok]).pvalue)
        rows.append({
            'method': method,
            'mse_mean': float(np.nanmean(values)) if np.isfinite(values).any() else float('nan'),
            'mse_std': float(np.nanstd(values, ddof=1)) if np.isfinite(values).sum() > 1 else float('nan'),
            'n_splits': int(np.isfinite(values).sum()),
            'p_value': p_value,
        })
    return pd.DataFrame(rows)


class BenchmarkCommand(CommandRunner):
    """Compare the cadre model with ridge baselines over random splits.

    Reported MSEs are on the standardized target scale.
    """
    name = 'benchmark'
    comment = 'repeated train/test comparison'

    def benchmark_config(self) -> BenchmarkConfig:
        data = self._config.benchmark.model_dump()
        for flag, field in (('splits', 'n_splits'), ('folds', 'folds'), ('train_fraction', 'train_fraction')):
            value = getattr(self._args, flag, None)
            if value is not None:
                data[field] = value
        return BenchmarkConfig.model_validate(data)

    def _execute(self) -> None:
        ds = load_csv(self.require('data'), self.require('target'))
        bench = self.benchmark_config()
        cfg = self.train_config()
        base = self.hyperparams()
        seeds = split_seeds(cfg.seed, bench.n_splits)

        logging.info(f'<{self.name}> {bench.n_splits} splits of {ds.N} rows')
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            per_split = list(pool.map(
                lambda i: run_split(ds, i, seeds[i], bench, self._config.grid, base, cfg),
                range(bench.n_splits),
            ))

        results = pd.DataFrame([row for rows in per_split for row in rows])
        summary = summarize(results)

        if self.arg('out'):
            out_fn = self.outputFile(self.arg('out'))
            results.to_csv(out_fn, index=False)
            logging.info(f'<{self.name}> Wrote benchmark results to {out_fn}')

        print(self.render('benchmark.txt.j2', bench=bench, summary=summary.to_dict('records')), end='')
