"""Cadres Model Assessment.

Generalization (MSE), cadre stability via bootstrap average best match, and
the interpretability statistics DR (density rate of the cadre-assignment
weights) and tau (spread of the regression weights across cadres).

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging

import numpy as np
import pandas as pd

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from scipy.optimize import linear_sum_assignment
from typing import Iterable, Optional, Sequence

from cadres.config import Hyperparams, TrainConfig
from cadres.data import Dataset, bootstrap_sample
from cadres.errors import DataError, DivergenceError
from cadres.model import CadreParams, assign, memberships
from cadres.optim import train

#: Relative threshold below which an entry of d counts as zero
DR_THRESHOLD = 1e-3


def mse(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean squared error."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise ValueError(f'Length mismatch: {pred.shape} predictions for {truth.shape} targets')
    if pred.size < 1:
        raise ValueError('MSE needs at least one value')
    return float(np.mean((pred - truth) ** 2))


def match_score(a: Iterable[int], b: Iterable[int]) -> float:
    """Overlap match min(|A & B| / |A|, |A & B| / |B|) of two index sets.

    Empty sets score 0 and are logged.
    """
    a, b = set(a), set(b)
    if not a or not b:
        logging.warning('Match score requested for an empty index set, scoring 0')
        return 0.0
    common = len(a & b)
    return min(common / len(a), common / len(b))


@dataclass(frozen=True)
class AssignmentTable:
    """Hard cadre assignments of the same N observations under B + 1 models.

    Row 0 is the reference model; entries are 0-based cadre indices.
    """
    assignments: np.ndarray
    row_ids: Optional[np.ndarray] = None

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=int)
        if a.ndim != 2 or a.shape[0] < 1:
            raise ValueError(f'Assignment table must be a (B+1) x N matrix, got shape {a.shape}')
        if a.min() < 0:
            raise ValueError('Assignment table entries must be nonnegative cadre indices')
        object.__setattr__(self, 'assignments', a)

    @property
    def B(self) -> int:
        return self.assignments.shape[0] - 1

    @property
    def N(self) -> int:
        return self.assignments.shape[1]

    def to_frame(self) -> pd.DataFrame:
        """One row per observation, one column per model, 1-based cadres."""
        frame = pd.DataFrame(
            self.assignments.T + 1,
            columns=[f'model_{b}' for b in range(self.B + 1)],
        )
        ids = self.row_ids if self.row_ids is not None else np.arange(self.N)
        frame.insert(0, 'row_id', ids)
        return frame


def abm(table: AssignmentTable, m: int) -> float:
    """Average best match of reference cadre `m` across the bootstrap models.

    Returns NaN (and logs a warning) when cadre `m` is empty in the reference
    model.
    """
    if table.B < 1:
        raise ValueError('Average best match needs at least one bootstrap model')

    ref = np.flatnonzero(table.assignments[0] == m)
    if ref.size == 0:
        logging.warning(f'Cadre {m + 1} is empty in the reference model')
        return float('nan')

    best = []
    for row in table.assignments[1:]:
        best.append(max(
            match_score(ref, np.flatnonzero(row == k)) for k in np.unique(row)
        ))
    return float(np.mean(best))


def assignment_table(
    ds: Dataset,
    models: Sequence[CadreParams],
    gamma: float,
) -> AssignmentTable:
    """Assign every observation of `ds` under each model."""
    return AssignmentTable(
        assignments=np.vstack([assign(ds.features, params, gamma) for params in models]),
        row_ids=ds.row_ids,
    )


def density_rate(params: CadreParams, threshold: float = DR_THRESHOLD) -> float:
    """Fraction of cadre-assignment weights with |d_p| > threshold * max |d|."""
    if threshold <= 0:
        raise ValueError(f'Density rate threshold must be positive, got {threshold}')
    abs_d = np.abs(params.d)
    dmax = abs_d.max()
    if dmax == 0:
        return 0.0
    return float(np.count_nonzero(abs_d > threshold * dmax) / abs_d.size)


def tau_statistic(params: CadreParams) -> float:
    """Population standard deviation of each weight across cadres, averaged over features."""
    return float(np.mean(np.std(params.W, axis=1)))


def matched_accuracy(true_labels: np.ndarray, pred_labels: np.ndarray) -> float:
    """Label accuracy after the best one-to-one relabeling of the predictions."""
    true_labels = np.asarray(true_labels)
    pred_labels = np.asarray(pred_labels)
    if true_labels.shape != pred_labels.shape or true_labels.size == 0:
        raise ValueError('Label vectors must be nonempty and of equal length')

    t_vals, t_idx = np.unique(true_labels, return_inverse=True)
    p_vals, p_idx = np.unique(pred_labels, return_inverse=True)
    confusion = np.zeros((t_vals.size, p_vals.size), dtype=int)
    np.add.at(confusion, (t_idx, p_idx), 1)

    rows, cols = linear_sum_assignment(confusion, maximize=True)
    return float(confusion[rows, cols].sum() / true_labels.size)


def feature_relevance(
    params: CadreParams,
    feature_names: Sequence[str],
    threshold: float = DR_THRESHOLD,
) -> pd.DataFrame:
    """Cadre-assignment weights per feature, most relevant first."""
    abs_d = np.abs(params.d)
    dmax = abs_d.max()
    relative = abs_d / dmax if dmax > 0 else np.zeros_like(abs_d)
    frame = pd.DataFrame({
        'feature': [feature_names[i] for i in params.cadre_feature_idx],
        'd': params.d,
        'relative': relative,
        'selected': relative > threshold,
    })
    return frame.sort_values('relative', ascending=False, kind='stable').reset_index(drop=True)


def cadre_summary(
    ds: Dataset,
    params: CadreParams,
    gamma: float,
) -> pd.DataFrame:
    """Describe every cadre: size, target mean and std, mean membership, center and weights.

    `target_std` is the sample standard deviation, NaN for cadres with fewer
    than two rows.
    """
    labels = assign(ds.features, params, gamma)
    G = memberships(ds.features, params, gamma)

    rows = []
    for m in range(params.M):
        mask = labels == m
        row = {
            'cadre': m + 1,
            'size': int(mask.sum()),
            'share': float(mask.mean()),
            'target_mean': float(ds.target[mask].mean()) if mask.any() else float('nan'),
            'target_std': float(ds.target[mask].std(ddof=1)) if mask.sum() > 1 else float('nan'),
            'mean_membership': float(G[:, m].mean()),
            'w0': float(params.w0[m]),
        }
        for j, p in enumerate(params.cadre_feature_idx):
            row[f'c_{ds.feature_names[p]}'] = float(params.C[j, m])
        for j, p in enumerate(params.target_feature_idx):
            row[f'w_{ds.feature_names[p]}'] = float(params.W[j, m])
        rows.append(row)

    return pd.DataFrame(rows)


@dataclass(frozen=True)
class BootstrapReport:
    """Cadre Stability across Bootstrap Models.

    `per_cadre_abm[m]` is NaN for cadres listed in `empty_cadres`;
    `model_abm` averages the remaining entries. `B` counts the bootstrap
    models that trained successfully; `failed_replicas` lists the 1-based
    replica numbers that diverged and were excluded. DR and tau are reported
    for the reference model followed by every successful replica.
    """
    per_cadre_abm: np.ndarray
    model_abm: float
    assignment_table: AssignmentTable
    B: int
    B_requested: int
    empty_cadres: tuple[int, ...] = ()
    failed_replicas: tuple[int, ...] = ()
    density_rates: tuple[float, ...] = ()
    taus: tuple[float, ...] = ()

    @property
    def mean_density_rate(self) -> float:
        return float(np.mean(self.density_rates)) if self.density_rates else float('nan')

    @property
    def mean_tau(self) -> float:
        return float(np.mean(self.taus)) if self.taus else float('nan')


def _train_replica(
    ds: Dataset,
    hp: Hyperparams,
    cfg: TrainConfig,
    seed: int,
    initial: Optional[CadreParams],
    tag: str,
) -> CadreParams:
    sample = bootstrap_sample(ds, seed)
    return train(sample, hp, cfg.model_copy(update={'seed': seed}), initial=initial, tag=tag).params


def bootstrap_quality(
    ds: Dataset,
    hp: Hyperparams,
    cfg: TrainConfig,
    B: int,
    seed: int,
    *,
    replica_cfg: Optional[TrainConfig] = None,
    workers: int = 1,
) -> BootstrapReport:
    """Assess cadre stability with warm-started bootstrap models.

    A reference model is trained on a bootstrap sample of `ds`. Each of the
    B further models is trained on its own bootstrap sample starting from the
    reference parameters (using `replica_cfg` if given). Every observation of
    the original `ds` is then assigned under all models and the average best
    match of each reference cadre is computed.
    """
    if B < 1:
        raise DataError(f'At least one bootstrap replica is needed, got B={B}')

    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(B + 1)]
    reference = _train_replica(ds, hp, cfg, seeds[0], None, 'bootstrap reference')

    replica_cfg = replica_cfg or cfg

    def run(b: int) -> Optional[CadreParams]:
        try:
            return _train_replica(ds, hp, replica_cfg, seeds[b], reference, f'replica {b}')
        except DivergenceError as exc:
            logging.warning(f'<replica {b}> Excluded: {exc}')
            return None

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(run, range(1, B + 1)))

    failed = tuple(b for b, params in enumerate(results, start=1) if params is None)
    models = [reference] + [params for params in results if params is not None]
    if len(models) < 2:
        raise DivergenceError(f'All {B} bootstrap replicas diverged')

    table = assignment_table(ds, models, hp.gamma)
    per_cadre = np.array([abm(table, m) for m in range(reference.M)])
    empty = tuple(int(m) for m in np.flatnonzero(np.isnan(per_cadre)))
    model_abm = float(np.nanmean(per_cadre)) if len(empty) < reference.M else float('nan')

    logging.info(f'Bootstrap with {table.B} replicas: model ABM {model_abm:.3f}')
    return BootstrapReport(
        per_cadre_abm=per_cadre,
        model_abm=model_abm,
        assignment_table=table,
        B=table.B,
        B_requested=B,
        empty_cadres=empty,
        failed_replicas=failed,
        density_rates=tuple(density_rate(p) for p in models),
        taus=tuple(tau_statistic(p) for p in models),
    )
