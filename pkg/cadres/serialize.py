"""Cadres Model and Report Files.

Trained models and bootstrap reports are stored as JSON validated by
pydantic schemas. Floats are written in shortest round-trip form, so a model
loaded from disk reproduces in-process predictions bit for bit.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import logging
import math

import numpy as np

from pydantic import BaseModel, ValidationError
from typing import Optional

from cadres import __version__
from cadres.config import Hyperparams, TrainConfig
from cadres.data import Scaler
from cadres.errors import ModelFileError
from cadres.eval import BootstrapReport
from cadres.loss import LossBreakdown
from cadres.model import CadreParams
from cadres.optim import TrainedModel

#: Current model file format
MODEL_FORMAT_VERSION = 1


class ScalerSchema(BaseModel):
    """Schema for Scaler means/stds (features then target)."""
    means: list[float]
    stds: list[float]


class CadreParamsSchema(BaseModel):
    """Schema for Cadre Model Parameters."""
    C: list[list[float]]
    d: list[float]
    W: list[list[float]]
    w0: list[float]
    sigma2: float
    cadre_feature_idx: list[int]
    target_feature_idx: list[int]


class ProvenanceSchema(BaseModel):
    """Schema for Training Provenance."""
    seed: int
    config: TrainConfig
    final_loss: Optional[dict[str, float]] = None
    loss_history: list[tuple[int, float]] = []
    epochs_run: int = 0
    converged: bool = False
    package_version: str = __version__


class ModelFile(BaseModel):
    """Schema for a Trained Cadre Model File."""
    format_version: int = MODEL_FORMAT_VERSION
    feature_names: list[str]
    target_name: str
    scaler: Optional[ScalerSchema] = None
    hyperparams: Hyperparams
    params: CadreParamsSchema
    provenance: ProvenanceSchema

    @classmethod
    def from_trained(cls, model: TrainedModel) -> 'ModelFile':
        p = model.params
        return cls(
            feature_names=list(model.feature_names),
            target_name=model.target_name,
            scaler=ScalerSchema(
                means=model.scaler.means.tolist(),
                stds=model.scaler.stds.tolist(),
            ) if model.scaler is not None else None,
            hyperparams=model.hyperparams,
            params=CadreParamsSchema(
                C=p.C.tolist(),
                d=p.d.tolist(),
                W=p.W.tolist(),
                w0=p.w0.tolist(),
                sigma2=p.sigma2,
                cadre_feature_idx=list(p.cadre_feature_idx),
                target_feature_idx=list(p.target_feature_idx),
            ),
            provenance=ProvenanceSchema(
                seed=model.config.seed,
                config=model.config,
                final_loss=model.final_loss.as_dict() if model.final_loss else None,
                loss_history=list(model.loss_history),
                epochs_run=model.epochs_run,
                converged=model.converged,
            ),
        )

    def to_trained(self) -> TrainedModel:
        p = self.params
        return TrainedModel(
            params=CadreParams(
                C=np.array(p.C, dtype=float),
                d=np.array(p.d, dtype=float),
                W=np.array(p.W, dtype=float),
                w0=np.array(p.w0, dtype=float),
                sigma2=p.sigma2,
                cadre_feature_idx=p.cadre_feature_idx,
                target_feature_idx=p.target_feature_idx,
            ),
            hyperparams=self.hyperparams,
            config=self.provenance.config,
            feature_names=tuple(self.feature_names),
            target_name=self.target_name,
            scaler=Scaler(self.scaler.means, self.scaler.stds) if self.scaler else None,
            loss_history=tuple(tuple(h) for h in self.provenance.loss_history),
            final_loss=LossBreakdown(**self.provenance.final_loss) if self.provenance.final_loss else None,
            epochs_run=self.provenance.epochs_run,
            converged=self.provenance.converged,
        )


def save_model(model: TrainedModel, filename: str) -> None:
    """Write a trained model as JSON."""
    with open(filename, 'w') as f:
        f.write(ModelFile.from_trained(model).model_dump_json(indent=2))
    logging.debug(f'Wrote model file {filename}')


def load_model(filename: str) -> TrainedModel:
    """Read a trained model written by `save_model`."""
    try:
        with open(filename, 'r') as f:
            data = f.read()
    except OSError as exc:
        raise ModelFileError(f'Cannot read model file {filename}: {exc}') from exc

    try:
        model_file = ModelFile.model_validate_json(data)
    except ValidationError as exc:
        raise ModelFileError(f'Invalid model file {filename}: {exc}') from exc

    if model_file.format_version != MODEL_FORMAT_VERSION:
        raise ModelFileError(f'Model file format version {model_file.format_version} is not supported')

    try:
        return model_file.to_trained()
    except ValueError as exc:
        raise ModelFileError(f'Inconsistent model file {filename}: {exc}') from exc


def _nullable(x: float) -> Optional[float]:
    return None if math.isnan(x) else float(x)


class BootstrapReportFile(BaseModel):
    """Schema for a Bootstrap Cadre-Quality Report.

    Cadre and replica numbers are 1-based; ABM values of empty reference
    cadres are null.
    """
    hyperparams: Hyperparams
    seed: int
    B: int
    B_requested: int
    model_abm: Optional[float]
    per_cadre_abm: list[Optional[float]]
    empty_cadres: list[int]
    failed_replicas: list[int]
    density_rates: list[float]
    taus: list[float]
    mean_density_rate: float
    mean_tau: float
    assignments: list[list[int]]

    @classmethod
    def from_report(cls, report: BootstrapReport, hp: Hyperparams, seed: int) -> 'BootstrapReportFile':
        return cls(
            hyperparams=hp,
            seed=seed,
            B=report.B,
            B_requested=report.B_requested,
            model_abm=_nullable(report.model_abm),
            per_cadre_abm=[_nullable(v) for v in report.per_cadre_abm],
            empty_cadres=[m + 1 for m in report.empty_cadres],
            failed_replicas=list(report.failed_replicas),
            density_rates=list(report.density_rates),
            taus=list(report.taus),
            mean_density_rate=report.mean_density_rate,
            mean_tau=report.mean_tau,
            assignments=(report.assignment_table.assignments + 1).tolist(),
        )


def save_report(report: BootstrapReport, hp: Hyperparams, seed: int, filename: str) -> None:
    """Write a bootstrap report as JSON."""
    with open(filename, 'w') as f:
        f.write(BootstrapReportFile.from_report(report, hp, seed).model_dump_json(indent=2))
    logging.debug(f'Wrote bootstrap report {filename}')
