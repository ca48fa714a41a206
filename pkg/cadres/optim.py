"""Cadres Training.

Parameter initialization, the Adam update, and the minibatch training loop
for the supervised cadre model.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import dataclasses
import logging

import numpy as np

from dataclasses import dataclass
from typing import Optional

from cadres.baselines import kmeans_plusplus
from cadres.config import Hyperparams, TrainConfig
from cadres.data import Dataset, Scaler, inverse_target, scale_features
from cadres.errors import DataError, DivergenceError, ModelError
from cadres.loss import LossBreakdown, ParamGradient, gradient_arrays, loss_arrays
from cadres.model import CadreParams, assign, memberships, predict

#: Standard deviation of the initial regression weights
INIT_WEIGHT_SCALE = 0.1


@dataclass(frozen=True)
class AdamState:
    """Adam Moment Estimates over the packed parameter vector."""
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    lr: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def create(cls, params: CadreParams, cfg: Optional[TrainConfig] = None) -> 'AdamState':
        """Zero moments sized for `params`, with settings from `cfg`."""
        cfg = cfg or TrainConfig()
        return cls(
            first_moment=np.zeros(params.n_packed),
            second_moment=np.zeros(params.n_packed),
            step_count=0,
            lr=cfg.lr,
            beta1=cfg.beta1,
            beta2=cfg.beta2,
            eps=cfg.eps,
        )


def adam_step(
    state: AdamState,
    params: CadreParams,
    grads: ParamGradient,
) -> tuple[AdamState, CadreParams]:
    """Apply one bias-corrected Adam update."""
    theta = params.pack()
    g = grads.pack()
    if g.shape != theta.shape or state.first_moment.shape != theta.shape:
        raise ModelError(
            f'Shape mismatch: parameters {theta.shape}, gradient {g.shape}, '
            f'moments {state.first_moment.shape}'
        )

    t = state.step_count + 1
    m = state.beta1 * state.first_moment + (1.0 - state.beta1) * g
    v = state.beta2 * state.second_moment + (1.0 - state.beta2) * g ** 2
    m_hat = m / (1.0 - state.beta1 ** t)
    v_hat = v / (1.0 - state.beta2 ** t)

    theta = theta - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    # exp(u) leaves the float range past |u| ~ 709
    if not np.all(np.isfinite(theta)) or abs(theta[-1]) > 700:
        raise DivergenceError(f'Adam step {t} produced non-finite parameters')

    return dataclasses.replace(state, first_moment=m, second_moment=v, step_count=t), params.unpack(theta)


def feature_indices(ds: Dataset, hp: Hyperparams) -> tuple[list[int], list[int]]:
    """Resolve the cadre and target feature column indices."""
    all_idx = list(range(ds.P))
    cidx = ds.feature_index(hp.cadre_features) if hp.cadre_features else all_idx
    tidx = ds.feature_index(hp.target_features) if hp.target_features else all_idx
    return cidx, tidx


def init_params(train: Dataset, hp: Hyperparams, seed: int | np.random.Generator) -> CadreParams:
    """Initialize parameters for training.

    Centers are M distinct training rows picked by k-means++ seeding on the
    cadre features, d is all ones, W is drawn from Normal(0, 0.1^2), w0 is
    zero and sigma2 is one.
    """
    if train.N < hp.M:
        raise DataError(f'Cannot initialize {hp.M} cadres from {train.N} training rows')

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cidx, tidx = feature_indices(train, hp)

    Xc = train.features[:, cidx]
    rows = kmeans_plusplus(Xc, hp.M, rng)
    return CadreParams(
        C=Xc[rows].T,
        d=np.ones(len(cidx)),
        W=rng.normal(0.0, INIT_WEIGHT_SCALE, size=(len(tidx), hp.M)),
        w0=np.zeros(hp.M),
        sigma2=1.0,
        cadre_feature_idx=cidx,
        target_feature_idx=tidx,
    )


@dataclass(frozen=True)
class TrainedModel:
    """Trained Parameters with the Settings and History that produced them.

    `params` act on standardized rows. When a `scaler` is attached, the
    `predict`, `memberships` and `assign` methods take raw rows and
    `predict` returns targets on the original scale.
    """
    params: CadreParams
    hyperparams: Hyperparams
    config: TrainConfig
    feature_names: tuple[str, ...]
    target_name: str = 'target'
    scaler: Optional[Scaler] = None
    loss_history: tuple[tuple[int, float], ...] = ()
    final_loss: Optional[LossBreakdown] = None
    epochs_run: int = 0
    converged: bool = False

    def with_scaler(self, scaler: Scaler) -> 'TrainedModel':
        return dataclasses.replace(self, scaler=scaler)

    def standardize(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return scale_features(x, self.scaler) if self.scaler is not None else x

    def predict_standardized(self, x: np.ndarray) -> float | np.ndarray:
        """Prediction on the standardized target scale."""
        return predict(self.standardize(x), self.params, self.hyperparams.gamma)

    def predict(self, x: np.ndarray) -> float | np.ndarray:
        """Prediction on the original target scale."""
        pred = self.predict_standardized(x)
        return inverse_target(pred, self.scaler) if self.scaler is not None else pred

    def memberships(self, x: np.ndarray) -> np.ndarray:
        return memberships(self.standardize(x), self.params, self.hyperparams.gamma)

    def assign(self, x: np.ndarray) -> int | np.ndarray:
        return assign(self.standardize(x), self.params, self.hyperparams.gamma)


@dataclass
class _RunResult:
    params: CadreParams
    best_loss: float
    history: list[tuple[int, float]]
    epochs_run: int
    converged: bool


def _check_warm_start(initial: CadreParams, train: Dataset, hp: Hyperparams) -> None:
    if initial.M != hp.M:
        raise ModelError(f'Warm start has {initial.M} cadres but hyperparameters ask for {hp.M}')
    cidx, tidx = feature_indices(train, hp)
    if tuple(cidx) != initial.cadre_feature_idx or tuple(tidx) != initial.target_feature_idx:
        raise ModelError('Warm start feature columns do not match the hyperparameters')


def _run(
    X: np.ndarray,
    y: np.ndarray,
    hp: Hyperparams,
    cfg: TrainConfig,
    params: CadreParams,
    rng: np.random.Generator,
    tag: str,
) -> _RunResult:
    """Train from `params` until `max_epochs` or early stopping."""
    n = X.shape[0]
    batch_size = min(cfg.batch_size, n)
    if batch_size < cfg.batch_size:
        logging.debug(f'<{tag}> Batch size {cfg.batch_size} exceeds {n} rows, using {batch_size}')

    state = AdamState.create(params, cfg)
    best_loss = loss_arrays(X, y, params, hp).total
    best_params = params
    history = [(0, best_loss)]
    last_finite = best_loss
    stall = 0
    epoch = 0
    converged = False

    for epoch in range(1, cfg.max_epochs + 1):
        perm = rng.permutation(n)
        try:
            for start in range(0, n, batch_size):
                idx = perm[start:start + batch_size]
                _, grads = gradient_arrays(X[idx], y[idx], params, hp, n_total=n)
                state, params = adam_step(state, params, grads)

            if epoch % cfg.record_loss_every and epoch != cfg.max_epochs:
                continue
            total = loss_arrays(X, y, params, hp).total

        except DivergenceError as exc:
            raise DivergenceError(
                f'<{tag}> Training diverged in epoch {epoch} ({exc}); last finite loss {last_finite:.6g}',
                last_finite_loss=last_finite,
                epoch=epoch,
            ) from exc

        history.append((epoch, total))
        last_finite = total
        logging.debug(f'<{tag}> Epoch {epoch}: loss {total:.6g}')

        improved = total < best_loss - cfg.tol * max(1.0, abs(best_loss))
        if total < best_loss:
            best_loss = total
            best_params = params

        if improved:
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                converged = True
                logging.debug(f'<{tag}> Stopping after {epoch} epochs, no improvement in {stall} checks')
                break

    return _RunResult(best_params, best_loss, history, epoch, converged)


def train(
    train: Dataset,
    hp: Hyperparams,
    cfg: TrainConfig,
    *,
    initial: Optional[CadreParams] = None,
    tag: str = 'train',
) -> TrainedModel:
    """Fit a supervised cadre model on standardized training data.

    Runs epochs of shuffled minibatch Adam steps, records the full-data loss
    every `record_loss_every` epochs and stops at `max_epochs` or after
    `patience` checks without relative improvement `tol`. The best
    parameters seen are returned. With `initial`, training warm-starts from
    those parameters (one run); otherwise `n_init` runs start from random
    initializations and the lowest loss wins.
    """
    X, y = train.features, train.target
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.n_init if initial is None else 1)

    best: Optional[_RunResult] = None
    for i, seq in enumerate(seeds):
        rng = np.random.default_rng(seq)
        run_tag = tag if len(seeds) == 1 else f'{tag} init {i + 1}/{len(seeds)}'
        if initial is not None:
            _check_warm_start(initial, train, hp)
            params0 = initial
        else:
            params0 = init_params(train, hp, rng)

        result = _run(X, y, hp, cfg, params0, rng, run_tag)
        logging.debug(f'<{run_tag}> Best loss {result.best_loss:.6g} after {result.epochs_run} epochs')
        if best is None or result.best_loss < best.best_loss:
            best = result

    final_loss = loss_arrays(X, y, best.params, hp)
    logging.info(f'<{tag}> Trained M={hp.M} model on {train.N} rows, final loss {final_loss.total:.6g}')

    return TrainedModel(
        params=best.params,
        hyperparams=hp,
        config=cfg,
        feature_names=train.feature_names,
        target_name=train.target_name,
        loss_history=tuple(best.history),
        final_loss=final_loss,
        epochs_run=best.epochs_run,
        converged=best.converged,
    )
