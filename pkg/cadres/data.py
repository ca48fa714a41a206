"""Cadres Dataset Handling.

Ingestion, standardization, splitting, bootstrap resampling, and synthetic
data generation. Datasets and Scalers are frozen and hold read-only arrays,
so they can be shared between concurrent training runs.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import csv
import logging
import math
import os

import numpy as np
import pandas as pd

from dataclasses import dataclass
from typing import Optional, Sequence

from cadres.config import SplitSpec
from cadres.errors import DataError

#: Connectivity ranges for the three synthetic groups (gaps between bands)
SYNTH_CONNECTIVITY_BANDS = ((0.0, 1.0), (1.2, 2.2), (2.4, 3.4))

#: Connectivity thresholds separating the synthetic groups
SYNTH_THRESHOLDS = (1.1, 2.3)

#: Polarizability is bimodal and independent of the group
SYNTH_POLARIZABILITY_MODES = (2.0, 5.0)
SYNTH_POLARIZABILITY_SPREAD = 0.35

#: Per-group target slope and intercept in polarizability
SYNTH_SLOPES = (1.5, -1.0, -2.5)
SYNTH_INTERCEPTS = (0.0, 10.0, 16.0)

#: Target noise standard deviation
SYNTH_NOISE = 0.25

SYNTH_FEATURES = ('connectivity', 'polarizability')
SYNTH_TARGET = 'tg'

#: Prediction columns for cadre models fit to the synthetic data. With
#: connectivity in the regression as well, splitting on the polarizability
#: modes fits the target equally well and the groups are not recovered.
SYNTH_TARGET_FEATURES = ('polarizability',)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Dataset:
    """Feature Matrix, Target Vector and Column Metadata.

    `features` is N x P, `target` has length N, `feature_names` has P unique
    entries and `row_ids` identifies the source row of every observation
    (bootstrap samples repeat ids).
    """
    features: np.ndarray
    target: np.ndarray
    feature_names: tuple[str, ...]
    row_ids: Optional[np.ndarray] = None
    target_name: str = 'target'

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        target = np.asarray(self.target, dtype=float)

        if features.ndim != 2:
            raise DataError(f'Feature matrix must be 2-dimensional, got shape {features.shape}')
        n, p = features.shape
        if n < 1 or p < 1:
            raise DataError(f'Dataset must have at least one row and one feature, got {n}x{p}')
        if target.shape != (n,):
            raise DataError(f'Target must have length {n}, got shape {target.shape}')
        if not np.all(np.isfinite(features)) or not np.all(np.isfinite(target)):
            raise DataError('Dataset contains non-finite values')

        names = tuple(self.feature_names)
        if len(names) != p:
            raise DataError(f'Expected {p} feature names, got {len(names)}')
        if len(set(names)) != p:
            raise DataError(f'Feature names must be unique: {list(names)}')

        row_ids = np.arange(n) if self.row_ids is None else np.asarray(self.row_ids)
        if row_ids.shape != (n,):
            raise DataError(f'Row ids must have length {n}, got shape {row_ids.shape}')

        object.__setattr__(self, 'features', _readonly(features))
        object.__setattr__(self, 'target', _readonly(target))
        object.__setattr__(self, 'feature_names', names)
        object.__setattr__(self, 'row_ids', _readonly(row_ids))

    @property
    def N(self) -> int:
        return self.features.shape[0]

    @property
    def P(self) -> int:
        return self.features.shape[1]

    def feature_index(self, names: Sequence[str]) -> list[int]:
        """Map column names to column indices."""
        lookup = {name: i for i, name in enumerate(self.feature_names)}
        missing = [name for name in names if name not in lookup]
        if missing:
            raise DataError(f'Unknown feature column(s): {missing}')
        return [lookup[name] for name in names]

    def take(self, indices: Sequence[int]) -> 'Dataset':
        """Return the rows at `indices` (repeats allowed) as a new Dataset."""
        idx = np.asarray(indices, dtype=int)
        if idx.size == 0:
            raise DataError('Cannot take an empty set of rows')
        return Dataset(
            features=self.features[idx],
            target=self.target[idx],
            feature_names=self.feature_names,
            row_ids=self.row_ids[idx],
            target_name=self.target_name,
        )

    def with_values(self, features: np.ndarray, target: np.ndarray) -> 'Dataset':
        """Return a copy with replaced values and the same metadata."""
        return Dataset(
            features=features,
            target=target,
            feature_names=self.feature_names,
            row_ids=self.row_ids,
            target_name=self.target_name,
        )

    def to_frame(self, *, include_ids: bool = False) -> pd.DataFrame:
        """Convert to a DataFrame with feature columns then the target column."""
        frame = pd.DataFrame(self.features, columns=list(self.feature_names))
        frame[self.target_name] = self.target
        if include_ids:
            frame.insert(0, 'row_id', self.row_ids)
        return frame


@dataclass(frozen=True)
class Scaler:
    """Per-column Centering and Scaling.

    `means` and `stds` have length P + 1: the feature columns followed by the
    target.
    """
    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=float)
        stds = np.asarray(self.stds, dtype=float)
        if means.ndim != 1 or means.shape != stds.shape:
            raise DataError('Scaler means and stds must be vectors of equal length')
        if means.size < 2:
            raise DataError('Scaler must cover at least one feature and the target')
        if not np.all(stds > 0):
            raise DataError('Scaler standard deviations must be positive')
        object.__setattr__(self, 'means', _readonly(means))
        object.__setattr__(self, 'stds', _readonly(stds))

    @property
    def P(self) -> int:
        return self.means.size - 1

    @classmethod
    def identity(cls, p: int) -> 'Scaler':
        return cls(np.zeros(p + 1), np.ones(p + 1))


def _read_raw_frame(path: str) -> pd.DataFrame:
    """Read a CSV file as strings after checking the header row."""
    if not os.path.isfile(path):
        raise DataError(f'Data file {path} not found')

    try:
        with open(path, 'r', newline='', encoding='utf-8') as f:
            header = next(csv.reader(f), None)

        if not header:
            raise DataError(f'Data file {path} is empty')

        header = [h.strip() for h in header]
        dupes = sorted({h for h in header if header.count(h) > 1})
        if dupes:
            raise DataError(f'Data file {path} has duplicate column(s): {dupes}')

        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')

    except (pd.errors.ParserError, UnicodeDecodeError, csv.Error) as exc:
        raise DataError(f'Cannot parse data file {path}: {exc}') from exc

    frame.columns = header
    if frame.empty:
        raise DataError(f'Data file {path} has no data rows')

    return frame


def _to_numeric(frame: pd.DataFrame, path: str) -> pd.DataFrame:
    """Convert string cells to floats, reporting the first bad cell."""
    numeric = frame.apply(lambda col: pd.to_numeric(col.str.strip(), errors='coerce')).astype(float)
    bad = ~np.isfinite(numeric.to_numpy())
    if bad.any():
        rows, cols = np.nonzero(bad)
        row, col = rows[0], cols[0]
        raise DataError(
            f'Non-numeric or non-finite value {frame.iat[row, col]!r} in {path} '
            f'at row {row + 1}, column "{frame.columns[col]}"'
        )
    return numeric


def load_csv(path: str, target_column: str, *, id_column: Optional[str] = None) -> Dataset:
    """Load a Dataset from a CSV File.

    The target column is extracted and every other column (except the
    optional `id_column`) becomes a feature, in file order. Rows are numbered
    from 1 after the header in error messages.
    """
    frame = _read_raw_frame(path)
    if target_column not in frame.columns:
        raise DataError(f'Target column "{target_column}" not found in {path}')

    row_ids = None
    if id_column is not None:
        if id_column not in frame.columns:
            raise DataError(f'Id column "{id_column}" not found in {path}')
        if id_column == target_column:
            raise DataError('Id column and target column must differ')
        row_ids = frame.pop(id_column).to_numpy()

    numeric = _to_numeric(frame, path)
    target = numeric.pop(target_column).to_numpy()
    if numeric.shape[1] == 0:
        raise DataError(f'Data file {path} has no feature columns')

    logging.debug(f'Loaded {numeric.shape[0]} rows and {numeric.shape[1]} features from {path}')
    return Dataset(
        features=numeric.to_numpy(),
        target=target,
        feature_names=tuple(numeric.columns),
        row_ids=row_ids,
        target_name=target_column,
    )


def read_feature_frame(
    path: str,
    feature_names: Sequence[str],
    *,
    target_column: Optional[str] = None,
    id_column: Optional[str] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Read the feature columns named by a trained model from a CSV File.

    The file must contain every name in `feature_names`; the only other
    columns allowed are `target_column` and `id_column`. Returns the N x P
    feature matrix in `feature_names` order and the row ids.
    """
    frame = _read_raw_frame(path)
    allowed = set(feature_names) | {c for c in (target_column, id_column) if c}
    missing = [name for name in feature_names if name not in frame.columns]
    extra = [name for name in frame.columns if name not in allowed]
    if missing or extra:
        raise DataError(f'Column mismatch in {path}: missing {missing}, extra {extra}')

    if id_column is not None and id_column in frame.columns:
        row_ids = frame[id_column].to_numpy()
    else:
        row_ids = np.arange(len(frame))

    numeric = _to_numeric(frame[list(feature_names)], path)
    return numeric.to_numpy(), row_ids


def fit_scaler(ds: Dataset) -> Scaler:
    """Fit per-column means and sample standard deviations (ddof=1).

    Constant columns get a standard deviation of 1, so they become all-zero
    after centering.
    """
    if ds.N < 2:
        raise DataError(f'At least 2 rows are needed to fit a scaler, got {ds.N}')

    values = np.column_stack([ds.features, ds.target])
    means = values.mean(axis=0)
    stds = values.std(axis=0, ddof=1)

    constant = stds <= 1e-12 * np.maximum(1.0, np.abs(means))
    if constant.any():
        names = list(ds.feature_names) + [ds.target_name]
        logging.debug(f'Constant column(s) {[n for n, c in zip(names, constant) if c]} scaled by 1')
        stds = np.where(constant, 1.0, stds)

    return Scaler(means, stds)


def _check_scaler(ds: Dataset, sc: Scaler) -> None:
    if sc.P != ds.P:
        raise DataError(f'Scaler covers {sc.P} features but dataset has {ds.P}')


def apply_scaler(ds: Dataset, sc: Scaler) -> Dataset:
    """Standardize features and target: x -> (x - mean) / std."""
    _check_scaler(ds, sc)
    features = (ds.features - sc.means[:-1]) / sc.stds[:-1]
    target = (ds.target - sc.means[-1]) / sc.stds[-1]
    return ds.with_values(features, target)


def invert_scaler(ds: Dataset, sc: Scaler) -> Dataset:
    """Undo `apply_scaler`."""
    _check_scaler(ds, sc)
    features = ds.features * sc.stds[:-1] + sc.means[:-1]
    target = ds.target * sc.stds[-1] + sc.means[-1]
    return ds.with_values(features, target)


def scale_features(x: np.ndarray, sc: Scaler) -> np.ndarray:
    """Standardize raw feature rows (without a target)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != sc.P:
        raise DataError(f'Scaler covers {sc.P} features but input has {x.shape[-1]}')
    return (x - sc.means[:-1]) / sc.stds[:-1]


def inverse_target(y: np.ndarray, sc: Scaler) -> np.ndarray:
    """Map standardized target values back to the original scale."""
    return np.asarray(y, dtype=float) * sc.stds[-1] + sc.means[-1]


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return sorted (train, test) row indices partitioning range(n)."""
    n_train = math.floor(spec.train_fraction * n)
    if not 1 <= n_train <= n - 1:
        raise DataError(
            f'Split of {n} rows with train fraction {spec.train_fraction} '
            f'leaves {n_train} training rows'
        )

    perm = np.random.default_rng(spec.seed).permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(ds: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Split a Dataset into disjoint train and test Datasets."""
    train_idx, test_idx = split_indices(ds.N, spec)
    return ds.take(train_idx), ds.take(test_idx)


def bootstrap_sample(ds: Dataset, seed: int) -> Dataset:
    """Draw N rows uniformly with replacement."""
    rng = np.random.default_rng(seed)
    return ds.take(rng.integers(0, ds.N, size=ds.N))


def gen_synthetic(n_per_group: int, seed: int) -> tuple[Dataset, np.ndarray]:
    """Generate the connectivity/polarizability example data.

    Three groups are defined by connectivity alone. Within each group the
    target is linear in polarizability: rising for low connectivity and
    falling, at different rates, for medium and high connectivity.
    Polarizability is bimodal in every group, so clustering on both features
    splits along polarizability instead of connectivity. Cadre models
    recover the groups when only `SYNTH_TARGET_FEATURES` enter the
    regression.

    Returns the Dataset and the 0-based group label of every row.
    """
    if n_per_group < 10:
        raise DataError(f'n_per_group must be at least 10, got {n_per_group}')

    rng = np.random.default_rng(seed)
    n = 3 * n_per_group

    connectivity = np.concatenate([
        rng.uniform(lo, hi, size=n_per_group) for lo, hi in SYNTH_CONNECTIVITY_BANDS
    ])
    modes = rng.choice(SYNTH_POLARIZABILITY_MODES, size=n)
    polarizability = modes + rng.normal(0.0, SYNTH_POLARIZABILITY_SPREAD, size=n)

    labels = np.digitize(connectivity, SYNTH_THRESHOLDS)
    slopes = np.asarray(SYNTH_SLOPES)[labels]
    intercepts = np.asarray(SYNTH_INTERCEPTS)[labels]
    target = intercepts + slopes * polarizability + rng.normal(0.0, SYNTH_NOISE, size=n)

    order = rng.permutation(n)
    ds = Dataset(
        features=np.column_stack([connectivity, polarizability])[order],
        target=target[order],
        feature_names=SYNTH_FEATURES,
        target_name=SYNTH_TARGET,
    )
    return ds, labels[order]
