"""Cadres Augmented Loss Functional.

The loss minimized during training is the negative log-posterior

    L = (1/2s2) sum_n sum_m g_m(x_n) (y_n - e_m(x_n))^2
      + (1 + N) log s2
      + (1/2s2) R(d; lambda_d, alpha_d)
      + (1/2s2) R(W; lambda_W, alpha_W)

with s2 = sigma^2 and R the elastic net functional. The data term is the
membership-weighted upper bound of the squared error of f(x). Gradients are
taken with respect to C, d, W, w0 and u = log sigma^2; the L1 subgradient at
zero is zero.

On a minibatch of size n drawn from N training rows, the data sum is scaled
by N / n and the log-variance term uses N (`n_total`), so the minibatch
gradient is an unbiased estimate of the full-data gradient.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import numpy as np

from dataclasses import dataclass
from scipy.special import logsumexp
from typing import Optional

from cadres.config import Hyperparams
from cadres.data import Dataset
from cadres.errors import DataError, DivergenceError
from cadres.model import CadreParams


@dataclass(frozen=True)
class LossBreakdown:
    """Per-term Values of the Augmented Loss.

    `total = (weighted_sse + penalty_d + penalty_W) / (2 sigma2) + log_sigma_term`
    """
    weighted_sse: float
    log_sigma_term: float
    penalty_d: float
    penalty_W: float
    total: float

    def as_dict(self) -> dict[str, float]:
        return {
            'weighted_sse': self.weighted_sse,
            'log_sigma_term': self.log_sigma_term,
            'penalty_d': self.penalty_d,
            'penalty_W': self.penalty_W,
            'total': self.total,
        }


@dataclass(frozen=True)
class ParamGradient:
    """Gradient of the Loss, shaped like `CadreParams` plus `du` for log sigma2."""
    C: np.ndarray
    d: np.ndarray
    W: np.ndarray
    w0: np.ndarray
    u: float

    def pack(self) -> np.ndarray:
        """Flatten in `CadreParams.pack()` order."""
        return np.concatenate([self.C.ravel(), self.d, self.W.ravel(), self.w0, [self.u]])

    @classmethod
    def unpack(cls, vec: np.ndarray, params: CadreParams) -> 'ParamGradient':
        sizes = np.cumsum([params.C.size, params.d.size, params.W.size, params.w0.size])
        C, d, W, w0, u = np.split(np.asarray(vec, dtype=float), sizes)
        return cls(C.reshape(params.C.shape), d, W.reshape(params.W.shape), w0, float(u[0]))


def elastic_net(v: np.ndarray, lam: float, alpha: float) -> float:
    """Elastic net penalty lambda * (alpha ||v||_1 + (1 - alpha) ||v||_2^2), entrywise."""
    v = np.asarray(v, dtype=float)
    return float(lam * (alpha * np.sum(np.abs(v)) + (1.0 - alpha) * np.sum(v ** 2)))


def _elastic_net_grad(v: np.ndarray, lam: float, alpha: float) -> np.ndarray:
    return lam * (alpha * np.sign(v) + 2.0 * (1.0 - alpha) * v)


@dataclass
class _Forward:
    """Intermediate values shared by the loss and its gradient."""
    diff: np.ndarray
    G: np.ndarray
    R: np.ndarray
    scale: float
    n_total: int
    breakdown: LossBreakdown


def _forward(
    X: np.ndarray,
    y: np.ndarray,
    params: CadreParams,
    hp: Hyperparams,
    n_total: Optional[int],
) -> _Forward:
    n = X.shape[0]
    if n < 1:
        raise DataError('Loss needs a nonempty batch')
    n_total = n if n_total is None else int(n_total)
    scale = n_total / n

    Xc = X[:, params.cadre_feature_idx]
    Xt = X[:, params.target_feature_idx]

    diff = Xc[:, :, None] - params.C[None, :, :]
    dist = np.einsum('p,npm->nm', np.abs(params.d), diff ** 2)
    logits = -hp.gamma * dist
    G = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))

    R = y[:, None] - (Xt @ params.W + params.w0)

    weighted_sse = scale * float(np.sum(G * R ** 2))
    penalty_d = elastic_net(params.d, hp.lambda_d, hp.alpha_d)
    penalty_W = elastic_net(params.W, hp.lambda_W, hp.alpha_W)
    log_sigma_term = (1.0 + n_total) * float(np.log(params.sigma2))
    total = (weighted_sse + penalty_d + penalty_W) / (2.0 * params.sigma2) + log_sigma_term

    terms = {
        'weighted_sse': weighted_sse,
        'penalty_d': penalty_d,
        'penalty_W': penalty_W,
        'log_sigma_term': log_sigma_term,
        'total': total,
    }
    for name, value in terms.items():
        if not np.isfinite(value):
            raise DivergenceError(f'Loss term "{name}" is not finite ({value})')

    return _Forward(diff, G, R, scale, n_total, LossBreakdown(**terms))


def loss_arrays(
    X: np.ndarray,
    y: np.ndarray,
    params: CadreParams,
    hp: Hyperparams,
    *,
    n_total: Optional[int] = None,
) -> LossBreakdown:
    """Loss on raw arrays (see `loss`)."""
    return _forward(X, y, params, hp, n_total).breakdown


def gradient_arrays(
    X: np.ndarray,
    y: np.ndarray,
    params: CadreParams,
    hp: Hyperparams,
    *,
    n_total: Optional[int] = None,
) -> tuple[LossBreakdown, ParamGradient]:
    """Loss and analytic gradient on raw arrays (see `gradient`)."""
    fw = _forward(X, y, params, hp, n_total)
    inv2s2 = 1.0 / (2.0 * params.sigma2)
    abs_d = np.abs(params.d)

    # Regression part
    dE = -2.0 * inv2s2 * fw.scale * fw.G * fw.R
    dW = X[:, params.target_feature_idx].T @ dE
    dW += inv2s2 * _elastic_net_grad(params.W, hp.lambda_W, hp.alpha_W)
    dw0 = dE.sum(axis=0)

    # Membership part, back through the softmax and the distances
    Q = inv2s2 * fw.scale * fw.R ** 2
    dS = fw.G * (Q - np.sum(fw.G * Q, axis=1, keepdims=True))
    dD = -hp.gamma * dS

    dC = -2.0 * abs_d[:, None] * np.einsum('nm,npm->pm', dD, fw.diff)
    dd = np.sign(params.d) * np.einsum('nm,npm->p', dD, fw.diff ** 2)
    dd += inv2s2 * _elastic_net_grad(params.d, hp.lambda_d, hp.alpha_d)

    b = fw.breakdown
    du = (1.0 + fw.n_total) - inv2s2 * (b.weighted_sse + b.penalty_d + b.penalty_W)

    return b, ParamGradient(C=dC, d=dd, W=dW, w0=dw0, u=float(du))


def loss(
    batch: Dataset,
    params: CadreParams,
    hp: Hyperparams,
    *,
    n_total: Optional[int] = None,
) -> LossBreakdown:
    """Evaluate the augmented loss on a batch.

    `n_total` is the number of training rows the batch stands for; it
    defaults to the batch size.
    """
    return loss_arrays(batch.features, batch.target, params, hp, n_total=n_total)


def gradient(
    batch: Dataset,
    params: CadreParams,
    hp: Hyperparams,
    *,
    n_total: Optional[int] = None,
) -> ParamGradient:
    """Analytic gradient of the augmented loss on a batch."""
    return gradient_arrays(batch.features, batch.target, params, hp, n_total=n_total)[1]


def fd_gradient(
    batch: Dataset,
    params: CadreParams,
    hp: Hyperparams,
    h: float = 1e-5,
    *,
    n_total: Optional[int] = None,
) -> ParamGradient:
    """Central finite-difference gradient of `loss().total`."""
    if h <= 0:
        raise ValueError(f'Finite difference step must be positive, got {h}')

    theta = params.pack()
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        step = np.zeros_like(theta)
        step[i] = h
        up = loss(batch, params.unpack(theta + step), hp, n_total=n_total).total
        down = loss(batch, params.unpack(theta - step), hp, n_total=n_total).total
        grad[i] = (up - down) / (2.0 * h)

    return ParamGradient.unpack(grad, params)
