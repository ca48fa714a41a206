"""Shared fixtures for the Cadres test suite."""

import os

import numpy as np
import pytest

from cadres.config import Hyperparams, TrainConfig
from cadres.data import Dataset, gen_synthetic
from cadres.model import CadreParams


def random_params(rng: np.random.Generator, P: int, M: int, *, sigma2: float = None) -> CadreParams:
    """Random full-feature parameters with entries away from zero."""
    d = rng.uniform(0.2, 1.5, size=P) * rng.choice([-1.0, 1.0], size=P)
    W = rng.uniform(0.1, 1.0, size=(P, M)) * rng.choice([-1.0, 1.0], size=(P, M))
    return CadreParams(
        C=rng.normal(size=(P, M)),
        d=d,
        W=W,
        w0=rng.normal(size=M),
        sigma2=sigma2 if sigma2 is not None else float(rng.uniform(0.5, 2.0)),
        cadre_feature_idx=range(P),
        target_feature_idx=range(P),
    )


def random_dataset(rng: np.random.Generator, N: int, P: int) -> Dataset:
    return Dataset(
        features=rng.normal(size=(N, P)),
        target=rng.normal(size=N),
        feature_names=[f'x{i}' for i in range(P)],
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20250101)


@pytest.fixture
def synthetic():
    """Synthetic three-group data and its 0-based group labels."""
    return gen_synthetic(60, seed=7)


@pytest.fixture
def linear_data(rng):
    """200 x 5 dataset with a linear target."""
    X = rng.normal(size=(200, 5))
    w = np.array([1.5, -2.0, 0.5, 0.0, 1.0])
    y = X @ w + 0.5 + rng.normal(0.0, 0.1, size=200)
    return Dataset(features=X, target=y, feature_names=[f'x{i}' for i in range(5)])


@pytest.fixture
def quick_config():
    """Short training runs for unit tests."""
    return TrainConfig(max_epochs=30, batch_size=32, patience=5, seed=11)


@pytest.fixture
def small_hp():
    return Hyperparams(M=2, gamma=1.0, lambda_d=0.05, lambda_W=0.05)


@pytest.fixture
def data_dir():
    """Directory with public benchmark CSVs; skips when unset."""
    path = os.environ.get('CADRES_DATA_DIR')
    if not path or not os.path.isdir(path):
        pytest.skip('CADRES_DATA_DIR is not set')
    return path
