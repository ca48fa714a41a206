import numpy as np
import pytest

from cadres.baselines import (
    clusterwise_predict,
    clusterwise_ridge_fit,
    kmeans_fit,
    kmeans_plusplus,
    ridge_fit,
)
from cadres.data import Dataset
from cadres.errors import BaselineError
from cadres.eval import matched_accuracy


@pytest.fixture
def blobs(rng):
    centers = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    labels = np.repeat([0, 1, 2], 30)
    X = centers[labels] + rng.normal(0.0, 0.5, size=(90, 2))
    return X, labels


class TestKMeans:

    def test_plusplus_distinct(self, rng):
        X = np.vstack([np.zeros((5, 2)), np.ones((5, 2))])
        idx = kmeans_plusplus(X, 4, rng)
        assert len(set(idx.tolist())) == 4

    def test_recovers_blobs(self, blobs):
        X, labels = blobs
        km = kmeans_fit(X, 3, seed=0)
        assert matched_accuracy(labels, km.labels) == 1.0
        np.testing.assert_array_equal(km.predict(X), km.labels)

    def test_inertia_nonincreasing(self, blobs):
        X, _ = blobs
        km = kmeans_fit(X, 5, seed=1)
        assert np.all(np.diff(km.inertia_history) <= 1e-9)
        assert km.n_iter >= 1

    def test_empty_cluster_keeps_center(self, blobs):
        X, _ = blobs
        init = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [500.0, 500.0]])
        km = kmeans_fit(X, 4, seed=0, init_centers=init)
        np.testing.assert_array_equal(km.centers[:, 3], [500.0, 500.0])
        assert not np.any(km.labels == 3)

    def test_single_point_predict(self, blobs):
        X, _ = blobs
        km = kmeans_fit(X, 3, seed=0)
        assert isinstance(km.predict(X[0]), int)

    def test_too_few_rows(self):
        with pytest.raises(BaselineError):
            kmeans_fit(np.zeros((2, 2)), 3, seed=0)


class TestRidge:

    def test_matches_least_squares(self, rng):
        X = rng.normal(size=(50, 3))
        y = X @ [1.0, -2.0, 0.5] + 3.0 + rng.normal(0.0, 0.1, size=50)
        w, w0 = ridge_fit(X, y, 0.0)
        coef, *_ = np.linalg.lstsq(np.column_stack([X, np.ones(50)]), y, rcond=None)
        np.testing.assert_allclose(w, coef[:3], atol=1e-10)
        assert w0 == pytest.approx(coef[3])

    def test_intercept_not_penalized(self, rng):
        X = rng.normal(size=(40, 2))
        y = np.full(40, 7.0)
        w, w0 = ridge_fit(X, y, 100.0)
        np.testing.assert_allclose(w, 0.0, atol=1e-12)
        assert w0 == pytest.approx(7.0)

    def test_shrinks(self, rng):
        X = rng.normal(size=(40, 2))
        y = X @ [3.0, -3.0]
        small, _ = ridge_fit(X, y, 0.01)
        large, _ = ridge_fit(X, y, 100.0)
        assert np.linalg.norm(large) < np.linalg.norm(small)

    def test_singular(self, rng):
        x = rng.normal(size=20)
        with pytest.raises(BaselineError, match='singular'):
            ridge_fit(np.column_stack([x, x]), x, 0.0)


class TestClusterwise:

    def test_single_cluster_is_global_ridge(self, rng):
        X = rng.normal(size=(60, 3))
        y = X @ [1.0, 0.0, -1.0] + rng.normal(0.0, 0.2, size=60)
        ds = Dataset(X, y, ['a', 'b', 'c'])
        model = clusterwise_ridge_fit(ds, 1, 0.5, seed=0)
        w, w0 = ridge_fit(X, y, 0.5)
        np.testing.assert_allclose(clusterwise_predict(model, X), X @ w + w0)

    def test_piecewise(self, blobs, rng):
        X, labels = blobs
        slopes = np.array([1.0, -2.0, 4.0])
        y = slopes[labels] * X[:, 0] + labels
        model = clusterwise_ridge_fit(Dataset(X, y, ['a', 'b']), 3, 1e-6, seed=0)
        np.testing.assert_allclose(clusterwise_predict(model, X), y, atol=1e-3)
        assert isinstance(clusterwise_predict(model, X[0]), float)
        assert model.uses_global == (False, False, False)
