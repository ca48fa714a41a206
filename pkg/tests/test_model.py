import dataclasses

import numpy as np
import pytest

from conftest import random_params

from cadres.errors import ModelError
from cadres.model import (
    CadreParams,
    assign,
    cadre_predictions,
    membership,
    memberships,
    predict,
    predict_cadre,
    seminorm_sq,
)


class TestSeminorm:

    def test_value(self):
        assert seminorm_sq([1.0, 2.0], [0.0, 0.0], [2.0, -0.5]) == pytest.approx(2.0 + 2.0)

    def test_zero_weight_ignores_feature(self):
        assert seminorm_sq([1.0, 100.0], [1.0, -100.0], [1.0, 0.0]) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ModelError):
            seminorm_sq([1.0, 2.0], [0.0], [1.0, 1.0])


class TestMembership:

    def test_normalized(self, rng):
        for _ in range(1000):
            P, M = rng.integers(1, 5), rng.integers(1, 5)
            params = random_params(rng, P, M)
            g = membership(rng.normal(size=P) * 3, params, gamma=float(rng.uniform(0.1, 5.0)))
            assert np.all(g >= 0)
            assert abs(g.sum() - 1.0) < 1e-12

    def test_upper_bound(self, rng):
        for _ in range(1000):
            P, M = rng.integers(1, 5), rng.integers(1, 5)
            params = random_params(rng, P, M)
            x, y = rng.normal(size=P), rng.normal() * 3
            g = membership(x, params, 1.0)
            e = cadre_predictions(x, params)
            f = predict(x, params, 1.0)
            bound = np.sum(g * (e - y) ** 2)
            assert (f - y) ** 2 <= bound * (1 + 1e-12) + 1e-12

    def test_single_cadre(self, rng):
        params = random_params(rng, 3, 1)
        np.testing.assert_array_equal(memberships(rng.normal(size=(10, 3)), params, 2.0), 1.0)

    def test_far_points_stay_finite(self, rng):
        params = random_params(rng, 2, 3)
        G = memberships(np.array([[1e6, -1e6]]), params, gamma=100.0)
        assert np.all(np.isfinite(G))
        assert G.sum() == pytest.approx(1.0)

    def test_batch_matches_rows(self, rng):
        params = random_params(rng, 3, 4)
        X = rng.normal(size=(6, 3))
        G = memberships(X, params, 1.5)
        for n in range(6):
            np.testing.assert_allclose(G[n], membership(X[n], params, 1.5))

    def test_shift_invariant(self, rng):
        params = random_params(rng, 2, 3)
        X = rng.normal(size=(8, 2))
        # An extra feature with one center for all cadres adds the same
        # amount to every squared distance
        shifted = CadreParams(
            C=np.vstack([params.C, np.full((1, 3), 0.4)]),
            d=np.append(params.d, 1.7),
            W=params.W, w0=params.w0, sigma2=params.sigma2,
            cadre_feature_idx=[0, 1, 2], target_feature_idx=[0, 1],
        )
        X_shift = np.column_stack([X, rng.normal(size=8) * 3])
        np.testing.assert_allclose(
            memberships(X_shift, shifted, 1.3), memberships(X, params, 1.3), rtol=1e-9, atol=1e-15,
        )

    def test_scale_d_against_gamma(self, rng):
        params = random_params(rng, 3, 4)
        X = rng.normal(size=(10, 3))
        for k in (0.1, 3.0, 50.0):
            scaled = dataclasses.replace(params, d=params.d * k)
            np.testing.assert_allclose(
                memberships(X, scaled, 2.0 / k), memberships(X, params, 2.0), rtol=1e-9, atol=1e-15,
            )

    def test_membership_rejects_batch(self, rng):
        with pytest.raises(ModelError):
            membership(np.zeros((2, 3)), random_params(rng, 3, 2), 1.0)


class TestPredict:

    def test_weighted_sum(self, rng):
        params = random_params(rng, 4, 3)
        x = rng.normal(size=4)
        g = membership(x, params, 0.7)
        expected = sum(g[m] * predict_cadre(x, params, m) for m in range(3))
        assert predict(x, params, 0.7) == pytest.approx(expected)

    def test_predict_cadre_range(self, rng):
        with pytest.raises(ModelError, match='out of range'):
            predict_cadre(np.zeros(2), random_params(rng, 2, 2), 2)

    def test_feature_subsets(self):
        params = CadreParams(
            C=[[0.0, 10.0]],
            d=[1.0],
            W=[[2.0, -1.0]],
            w0=[1.0, 0.0],
            sigma2=1.0,
            cadre_feature_idx=[0],
            target_feature_idx=[1],
        )
        # Near the first center the first cadre's model on column 1 applies
        assert predict(np.array([0.0, 3.0]), params, 5.0) == pytest.approx(7.0)
        assert assign(np.array([9.0, 3.0]), params, 5.0) == 1

    def test_too_few_columns(self, rng):
        params = CadreParams(
            C=[[0.0]], d=[1.0], W=[[1.0]], w0=[0.0], sigma2=1.0,
            cadre_feature_idx=[2], target_feature_idx=[0],
        )
        with pytest.raises(ModelError, match='columns'):
            predict(np.zeros(2), params, 1.0)


class TestAssign:

    def test_tie_goes_to_lowest(self):
        params = CadreParams(
            C=[[1.0, 1.0, 1.0]], d=[1.0], W=[[0.0, 0.0, 0.0]], w0=[0.0, 0.0, 0.0],
            sigma2=1.0, cadre_feature_idx=[0], target_feature_idx=[0],
        )
        assert assign(np.array([0.3]), params, 1.0) == 0

    def test_argmax(self, rng):
        params = random_params(rng, 3, 4)
        X = rng.normal(size=(20, 3))
        np.testing.assert_array_equal(assign(X, params, 1.0), np.argmax(memberships(X, params, 1.0), axis=1))


class TestCadreParams:

    def test_pack_unpack(self, rng):
        params = random_params(rng, 3, 2)
        back = params.unpack(params.pack())
        np.testing.assert_allclose(back.C, params.C)
        np.testing.assert_allclose(back.W, params.W)
        assert back.sigma2 == pytest.approx(params.sigma2)

    def test_permute_keeps_predictions(self, rng):
        params = random_params(rng, 3, 3)
        X = rng.normal(size=(10, 3))
        permuted = params.permute([2, 0, 1])
        np.testing.assert_allclose(predict(X, permuted, 1.0), predict(X, params, 1.0))
        np.testing.assert_array_equal(memberships(X, permuted, 1.0)[:, 0], memberships(X, params, 1.0)[:, 2])

    @pytest.mark.parametrize('update', [
        {'C': np.zeros((2, 3))},
        {'d': np.ones(3)},
        {'W': np.zeros((2, 1))},
        {'sigma2': 0.0},
        {'sigma2': float('inf')},
        {'cadre_feature_idx': [0, 0]},
    ])
    def test_invalid(self, update):
        fields = dict(
            C=np.zeros((2, 2)), d=np.ones(2), W=np.zeros((2, 2)), w0=np.zeros(2),
            sigma2=1.0, cadre_feature_idx=[0, 1], target_feature_idx=[0, 1],
        )
        fields.update(update)
        with pytest.raises(ModelError):
            CadreParams(**fields)

    def test_read_only(self, rng):
        params = random_params(rng, 2, 2)
        with pytest.raises(ValueError):
            params.W[0, 0] = 5.0
