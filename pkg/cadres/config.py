"""Cadres Configuration Loader.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging

import yaml

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator
from typing import Optional

#: Supported configuration file version
CONFIG_VERSION = 1


class Hyperparams(BaseModel):
    """Schema for Supervised Cadre Model Hyperparameters.

    `gamma`: Cadre-assignment sharpness
    `lambda_d`, `alpha_d`: Elastic net strength and mixing for the
                           cadre-assignment weights `d`
    `lambda_W`, `alpha_W`: Elastic net strength and mixing for the
                           regression weights `W`
    `M`: Number of cadres
    `cadre_features`: Column names used for cadre assignment (all if unset)
    `target_features`: Column names used for target prediction (all if unset)
    """
    gamma: float = Field(1.0, gt=0)
    lambda_d: float = Field(0.1, ge=0)
    lambda_W: float = Field(0.1, ge=0)
    alpha_d: float = Field(0.95, ge=0, le=1)
    alpha_W: float = Field(0.05, ge=0, le=1)
    M: int = Field(3, ge=1)
    cadre_features: Optional[list[str]] = None
    target_features: Optional[list[str]] = None

    @field_validator('cadre_features', 'target_features')
    @classmethod
    def _check_unique(cls, v: Optional[list[str]]) -> Optional[list[str]]:
        if v is not None:
            if not v:
                raise ValueError('feature list must not be empty')
            if len(set(v)) != len(v):
                raise ValueError('feature list contains duplicates')
        return v


class TrainConfig(BaseModel):
    """Schema for the Training Loop and Adam Optimizer Settings.

    `tol` is relative: a loss check counts as an improvement only when it
    lowers the best loss seen by more than `tol * max(1, |best|)`.
    """
    batch_size: int = Field(64, ge=1)
    max_epochs: int = Field(2000, ge=0)
    seed: int = 0
    patience: int = Field(10, ge=1)
    tol: float = Field(1e-6, gt=0)
    record_loss_every: int = Field(1, ge=1)
    lr: float = Field(0.01, gt=0)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    eps: float = Field(1e-8, gt=0)
    n_init: int = Field(1, ge=1)


class Grid(BaseModel):
    """Schema for the Cross-Validation Hyperparameter Grid.

    When `lambda_W_values` is unset, the regularization strengths are tied
    (`lambda_W = lambda_d` at every grid point).
    """
    M_values: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    gamma_values: list[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    lambda_d_values: list[float] = Field(default_factory=lambda: [0.01, 0.05, 0.1, 0.5])
    lambda_W_values: Optional[list[float]] = None

    @model_validator(mode='after')
    def _check_nonempty(self) -> 'Grid':
        for name in ('M_values', 'gamma_values', 'lambda_d_values', 'lambda_W_values'):
            values = getattr(self, name)
            if values is not None and not values:
                raise ValueError(f'grid list "{name}" must not be empty')
        if any(m < 1 for m in self.M_values):
            raise ValueError('grid M values must be positive')
        if any(g <= 0 for g in self.gamma_values):
            raise ValueError('grid gamma values must be positive')
        return self


class SplitSpec(BaseModel):
    """Schema for a Random Train/Test Split."""
    train_fraction: float = Field(0.75, gt=0, lt=1)
    seed: int = 0


class BenchmarkConfig(BaseModel):
    """Schema for the Repeated Train/Test Benchmark Protocol."""
    n_splits: int = Field(20, ge=1)
    train_fraction: float = Field(0.75, gt=0, lt=1)
    folds: int = Field(5, ge=2)
    K_values: list[int] = Field(default_factory=lambda: [1, 2, 3, 4, 5, 6])
    ridge_values: list[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0])


class CadresConfigMeta(BaseModel):
    """Schema for Cadres Metadata Configuration."""
    log_level: str = 'INFO'
    output_dir: Optional[str] = None
    workers: int = Field(1, ge=1)
    version: Optional[int] = None


class CadresConfig(BaseModel):
    """Schema for Cadres Configuration."""
    cadres: CadresConfigMeta = Field(default_factory=CadresConfigMeta)
    hyperparams: Hyperparams = Field(default_factory=Hyperparams)
    train: TrainConfig = Field(default_factory=TrainConfig)
    grid: Grid = Field(default_factory=Grid)
    benchmark: BenchmarkConfig = Field(default_factory=BenchmarkConfig)


def load_config(filename: str) -> CadresConfig | None:
    """Load Cadres Configuration from a YAML File."""
    with open(filename, 'r') as f:
        try:
            logging.debug(f'Loading configuration from {filename}')
            config_data = yaml.safe_load(f)

        except Exception as exc:
            logging.error(f'Failed to read configuration file: {exc}')
            return None

    # An empty file is a valid (all defaults) configuration
    if config_data is None:
        config_data = {}

    if not isinstance(config_data, dict):
        logging.error('Configuration file must be a mapping')
        return None

    # Check Version
    version = CONFIG_VERSION
    if 'cadres' not in config_data:
        logging.warning(f'Missing "cadres" key in configuration file, assuming configuration version {CONFIG_VERSION}')
    elif not isinstance(config_data['cadres'], dict) or 'version' not in config_data['cadres']:
        logging.warning(f'Missing "cadres.version" key in configuration file, assuming version {CONFIG_VERSION}')
    else:
        version = config_data['cadres']['version']

    if version != CONFIG_VERSION:
        logging.error(f'Configuration version {version} is not supported')
        return None

    # Check Schema with Pydantic
    try:
        return CadresConfig.model_validate(config_data)
    except ValidationError as exc:
        logging.error(f'Invalid configuration file {filename}: {exc}')
        return None
