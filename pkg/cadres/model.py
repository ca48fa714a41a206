"""Cadres Forward Model.

The supervised cadre model predicts

    f(x) = sum_m g_m(x) e_m(x)

where g_m(x) is a softmax over negative gamma-scaled squared seminorm
distances to the cadre centers and e_m(x) = (w^m)^T x + w0_m is the linear
model of cadre m. Cadre indices are 0-based.

Every function here accepts a single observation (length-P vector) or a batch
of observations (N x P matrix) and returns a correspondingly shaped result.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

import numpy as np

from dataclasses import dataclass
from scipy.special import logsumexp
from typing import Sequence

from cadres.config import Hyperparams
from cadres.errors import ModelError

__all__ = [
    'CadreParams',
    'Hyperparams',
    'assign',
    'cadre_predictions',
    'membership',
    'memberships',
    'predict',
    'predict_cadre',
    'seminorm_sq',
]


def _check_index(idx: Sequence[int], name: str) -> tuple[int, ...]:
    idx = tuple(int(i) for i in idx)
    if not idx:
        raise ModelError(f'{name} must not be empty')
    if min(idx) < 0:
        raise ModelError(f'{name} contains negative column indices')
    if len(set(idx)) != len(idx):
        raise ModelError(f'{name} contains duplicate column indices')
    return idx


@dataclass(frozen=True)
class CadreParams:
    """Full Parameter Set of a Supervised Cadre Model.

    `C` is P_C x M (columns are cadre centers), `d` has length P_C, `W` is
    P_T x M (columns are cadre regression weights), `w0` has length M and
    `sigma2` is the noise variance. `cadre_feature_idx` and
    `target_feature_idx` select the columns of an input row used for cadre
    assignment and target prediction respectively.
    """
    C: np.ndarray
    d: np.ndarray
    W: np.ndarray
    w0: np.ndarray
    sigma2: float
    cadre_feature_idx: tuple[int, ...]
    target_feature_idx: tuple[int, ...]

    def __post_init__(self):
        C = np.array(self.C, dtype=float, ndmin=2)
        d = np.array(self.d, dtype=float, ndmin=1)
        W = np.array(self.W, dtype=float, ndmin=2)
        w0 = np.array(self.w0, dtype=float, ndmin=1)
        cidx = _check_index(self.cadre_feature_idx, 'cadre_feature_idx')
        tidx = _check_index(self.target_feature_idx, 'target_feature_idx')

        m = w0.size
        if m < 1:
            raise ModelError('A cadre model needs at least one cadre')
        if C.shape != (len(cidx), m):
            raise ModelError(f'C must have shape {(len(cidx), m)}, got {C.shape}')
        if d.shape != (len(cidx),):
            raise ModelError(f'd must have length {len(cidx)}, got shape {d.shape}')
        if W.shape != (len(tidx), m):
            raise ModelError(f'W must have shape {(len(tidx), m)}, got {W.shape}')
        if not (np.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ModelError(f'sigma2 must be positive and finite, got {self.sigma2}')

        for name, value in (('C', C), ('d', d), ('W', W), ('w0', w0)):
            value.flags.writeable = False
            object.__setattr__(self, name, value)
        object.__setattr__(self, 'sigma2', float(self.sigma2))
        object.__setattr__(self, 'cadre_feature_idx', cidx)
        object.__setattr__(self, 'target_feature_idx', tidx)

    @property
    def M(self) -> int:
        return self.w0.size

    @property
    def P_C(self) -> int:
        return len(self.cadre_feature_idx)

    @property
    def P_T(self) -> int:
        return len(self.target_feature_idx)

    @property
    def n_packed(self) -> int:
        """Length of the `pack()` vector."""
        return self.C.size + self.d.size + self.W.size + self.w0.size + 1

    def pack(self) -> np.ndarray:
        """Flatten to [C, d, W, w0, log sigma2]."""
        return np.concatenate([
            self.C.ravel(), self.d, self.W.ravel(), self.w0, [np.log(self.sigma2)],
        ])

    def unpack(self, theta: np.ndarray) -> 'CadreParams':
        """Build parameters with this shape from a `pack()` vector."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_packed,):
            raise ModelError(f'Expected a parameter vector of length {self.n_packed}, got shape {theta.shape}')

        sizes = np.cumsum([self.C.size, self.d.size, self.W.size, self.w0.size])
        C, d, W, w0, u = np.split(theta, sizes)
        return CadreParams(
            C=C.reshape(self.C.shape),
            d=d,
            W=W.reshape(self.W.shape),
            w0=w0,
            sigma2=float(np.exp(u[0])),
            cadre_feature_idx=self.cadre_feature_idx,
            target_feature_idx=self.target_feature_idx,
        )

    def permute(self, order: Sequence[int]) -> 'CadreParams':
        """Relabel cadres so that new cadre i is old cadre `order[i]`."""
        order = np.asarray(order, dtype=int)
        if sorted(order.tolist()) != list(range(self.M)):
            raise ModelError(f'{order.tolist()} is not a permutation of {self.M} cadres')
        return CadreParams(
            C=self.C[:, order],
            d=self.d,
            W=self.W[:, order],
            w0=self.w0[order],
            sigma2=self.sigma2,
            cadre_feature_idx=self.cadre_feature_idx,
            target_feature_idx=self.target_feature_idx,
        )


def _rows(x: np.ndarray, params: CadreParams) -> tuple[np.ndarray, bool]:
    """Promote `x` to a 2-D batch and check it has enough columns."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    X = np.atleast_2d(x)
    if X.ndim != 2:
        raise ModelError(f'Expected a vector or matrix of observations, got shape {x.shape}')
    needed = max(max(params.cadre_feature_idx), max(params.target_feature_idx)) + 1
    if X.shape[1] < needed:
        raise ModelError(f'Observations have {X.shape[1]} columns but the model uses column {needed - 1}')
    return X, single


def seminorm_sq(x: np.ndarray, c: np.ndarray, d: np.ndarray) -> float:
    """Squared seminorm distance sum_p |d_p| (x_p - c_p)^2."""
    x, c, d = (np.asarray(v, dtype=float) for v in (x, c, d))
    if not (x.shape == c.shape == d.shape):
        raise ModelError(f'Length mismatch: x {x.shape}, c {c.shape}, d {d.shape}')
    return float(np.sum(np.abs(d) * (x - c) ** 2))


def sq_distances(Xc: np.ndarray, params: CadreParams) -> np.ndarray:
    """N x M squared seminorm distances from cadre-feature rows to centers."""
    diff = Xc[:, :, None] - params.C[None, :, :]
    return np.einsum('p,npm->nm', np.abs(params.d), diff ** 2)


def log_memberships(X: np.ndarray, params: CadreParams, gamma: float) -> np.ndarray:
    """N x M log cadre-membership probabilities for a batch."""
    logits = -gamma * sq_distances(X[:, params.cadre_feature_idx], params)
    return logits - logsumexp(logits, axis=1, keepdims=True)


def memberships(x: np.ndarray, params: CadreParams, gamma: float) -> np.ndarray:
    """Cadre-membership probabilities g_m(x) (M-vector or N x M)."""
    X, single = _rows(x, params)
    G = np.exp(log_memberships(X, params, gamma))
    return G[0] if single else G


def membership(x: np.ndarray, params: CadreParams, gamma: float) -> np.ndarray:
    """Cadre-membership distribution of a single observation."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ModelError(f'membership expects a single observation, got shape {x.shape}')
    return memberships(x, params, gamma)


def cadre_predictions(x: np.ndarray, params: CadreParams) -> np.ndarray:
    """Per-cadre linear predictions e_m(x) (M-vector or N x M)."""
    X, single = _rows(x, params)
    E = X[:, params.target_feature_idx] @ params.W + params.w0
    return E[0] if single else E


def predict_cadre(x: np.ndarray, params: CadreParams, m: int) -> float | np.ndarray:
    """Linear prediction e_m(x) of cadre `m`."""
    if not 0 <= m < params.M:
        raise ModelError(f'Cadre index {m} out of range for a model with {params.M} cadres')
    return cadre_predictions(x, params)[..., m]


def predict(x: np.ndarray, params: CadreParams, gamma: float) -> float | np.ndarray:
    """Membership-weighted prediction f(x) = sum_m g_m(x) e_m(x)."""
    G = memberships(x, params, gamma)
    E = cadre_predictions(x, params)
    return np.sum(G * E, axis=-1)


def assign(x: np.ndarray, params: CadreParams, gamma: float) -> int | np.ndarray:
    """Most likely cadre argmax_m g_m(x); ties go to the lowest index."""
    X, single = _rows(x, params)
    labels = np.argmax(log_memberships(X, params, gamma), axis=1)
    return int(labels[0]) if single else labels
