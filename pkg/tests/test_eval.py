import dataclasses
import logging

import numpy as np
import pytest

from conftest import random_params

from cadres.config import Hyperparams, TrainConfig
from cadres.eval import (
    AssignmentTable,
    abm,
    assignment_table,
    bootstrap_quality,
    cadre_summary,
    density_rate,
    feature_relevance,
    match_score,
    matched_accuracy,
    mse,
    tau_statistic,
)
from cadres.model import CadreParams


class TestMse:

    def test_value(self):
        assert mse(np.array([1.0, 2.0]), np.array([0.0, 4.0])) == pytest.approx(2.5)

    def test_mismatch(self):
        with pytest.raises(ValueError):
            mse(np.zeros(2), np.zeros(3))


class TestMatchScore:

    def test_identical(self):
        assert match_score({1, 2, 3}, [3, 2, 1]) == 1.0

    def test_disjoint(self):
        assert match_score({1, 2}, {3}) == 0.0

    def test_asymmetric_sizes(self):
        assert match_score({1, 2, 3, 4}, {1, 2}) == pytest.approx(0.5)

    def test_empty(self, caplog):
        with caplog.at_level(logging.WARNING):
            assert match_score(set(), {1}) == 0.0
        assert 'empty' in caplog.text


class TestAbm:

    def test_identical_assignments(self):
        row = np.array([0, 0, 1, 1, 2])
        table = AssignmentTable(np.vstack([row, row]))
        assert [abm(table, m) for m in range(3)] == [1.0, 1.0, 1.0]

    def test_relabeling_invariant(self, rng):
        ref = rng.integers(0, 3, size=50)
        replicas = [rng.integers(0, 3, size=50) for _ in range(4)]
        relabeled = [np.array([2, 0, 1])[r] for r in replicas]
        a = AssignmentTable(np.vstack([ref] + replicas))
        b = AssignmentTable(np.vstack([ref] + relabeled))
        for m in range(3):
            assert abm(a, m) == pytest.approx(abm(b, m))

    def test_even_split_scores_half(self):
        # Reference cadre 0 is rows 0-3; the replica splits it into two cadres
        table = AssignmentTable(np.array([
            [0, 0, 0, 0, 1, 1, 1, 1],
            [0, 0, 1, 1, 2, 2, 2, 2],
        ]))
        assert abm(table, 0) == pytest.approx(0.5)

    def test_random_assignments(self):
        rng = np.random.default_rng(3)
        table = AssignmentTable(rng.integers(0, 4, size=(6, 4000)))
        for m in range(4):
            assert abm(table, m) == pytest.approx(0.25, abs=0.05)

    def test_range(self, rng):
        table = AssignmentTable(rng.integers(0, 4, size=(6, 40)))
        for m in range(4):
            value = abm(table, m)
            assert np.isnan(value) or 0.0 <= value <= 1.0

    def test_empty_reference_cadre(self, caplog):
        table = AssignmentTable(np.array([[0, 0, 1], [0, 1, 1]]))
        with caplog.at_level(logging.WARNING):
            assert np.isnan(abm(table, 2))
        assert 'Cadre 3 is empty' in caplog.text

    def test_needs_replica(self):
        with pytest.raises(ValueError):
            abm(AssignmentTable(np.array([[0, 1]])), 0)

    def test_frame_is_one_based(self):
        frame = AssignmentTable(np.array([[0, 1], [1, 1]])).to_frame()
        assert list(frame.columns) == ['row_id', 'model_0', 'model_1']
        assert frame['model_0'].tolist() == [1, 2]


class TestInterpretability:

    def params(self, d, W):
        W = np.asarray(W, dtype=float)
        d = np.asarray(d, dtype=float)
        return CadreParams(
            C=np.zeros((d.size, W.shape[1])), d=d, W=W, w0=np.zeros(W.shape[1]), sigma2=1.0,
            cadre_feature_idx=range(d.size), target_feature_idx=range(W.shape[0]),
        )

    def test_density_rate(self):
        assert density_rate(self.params([1.0, 1e-5, -0.5, 0.0], np.ones((4, 2)))) == 0.5

    def test_density_rate_all_zero(self):
        assert density_rate(self.params([0.0, 0.0], np.ones((2, 2)))) == 0.0

    def test_density_rate_range(self, rng):
        for _ in range(20):
            value = density_rate(random_params(rng, 5, 3))
            assert 0.0 <= value <= 1.0

    def test_tau_zero(self):
        assert tau_statistic(self.params([1.0], [[1.0], [2.0]])) == 0.0
        assert tau_statistic(self.params([1.0], [[1.0, 1.0], [2.0, 2.0]])) == 0.0

    def test_tau_value(self):
        # Population std of (0, 2) is 1, of (1, 1) is 0
        assert tau_statistic(self.params([1.0], [[0.0, 2.0], [1.0, 1.0]])) == pytest.approx(0.5)

    def test_density_rate_scale_invariant(self):
        params = self.params([1.0, 5e-4, -0.3, 0.0, 2.0], np.ones((5, 2)))
        expected = density_rate(params)
        for k in (1e-3, 0.5, 7.0, 1e4):
            assert density_rate(dataclasses.replace(params, d=params.d * k)) == expected

    def test_tau_permutation_invariant(self, rng):
        params = random_params(rng, 4, 3)
        for order in ([2, 0, 1], [1, 0, 2]):
            assert tau_statistic(params.permute(order)) == pytest.approx(tau_statistic(params))

    def test_feature_relevance(self):
        frame = feature_relevance(self.params([0.1, -2.0, 0.0], np.ones((3, 1))), ['a', 'b', 'c'])
        assert frame['feature'].tolist() == ['b', 'a', 'c']
        assert frame['selected'].tolist() == [True, True, False]


class TestMatchedAccuracy:

    def test_permuted(self):
        assert matched_accuracy([0, 0, 1, 2], [2, 2, 0, 1]) == 1.0

    def test_partial(self):
        assert matched_accuracy([0, 0, 1, 1], [0, 1, 1, 1]) == 0.75


class TestBootstrap:

    def test_report(self, synthetic):
        ds, _ = synthetic
        hp = Hyperparams(M=3, gamma=1.0, lambda_d=0.05, lambda_W=0.05)
        cfg = TrainConfig(max_epochs=20, patience=5)
        report = bootstrap_quality(ds, hp, cfg, B=3, seed=2, workers=2)

        assert report.B == 3
        assert report.B_requested == 3
        assert report.assignment_table.assignments.shape == (4, ds.N)
        assert len(report.density_rates) == 4
        for v in report.per_cadre_abm:
            assert np.isnan(v) or 0.0 <= v <= 1.0
        assert 0.0 <= report.model_abm <= 1.0
        assert all(t >= 0 for t in report.taus)

    def test_deterministic(self, synthetic):
        ds, _ = synthetic
        hp = Hyperparams(M=2)
        cfg = TrainConfig(max_epochs=5)
        a = bootstrap_quality(ds, hp, cfg, B=2, seed=9)
        b = bootstrap_quality(ds, hp, cfg, B=2, seed=9, workers=2)
        np.testing.assert_array_equal(a.assignment_table.assignments, b.assignment_table.assignments)

    def test_zero_epoch_replicas_match_reference(self, synthetic):
        ds, _ = synthetic
        hp = Hyperparams(M=3)
        report = bootstrap_quality(
            ds, hp, TrainConfig(max_epochs=10), B=1, seed=0, replica_cfg=TrainConfig(max_epochs=0),
        )
        assert report.model_abm == 1.0

    def test_needs_replicas(self, synthetic):
        ds, _ = synthetic
        with pytest.raises(ValueError):
            bootstrap_quality(ds, Hyperparams(M=2), TrainConfig(max_epochs=1), B=0, seed=0)


class TestCadreSummary:

    def test_sizes(self, synthetic, rng):
        ds, _ = synthetic
        params = random_params(rng, 2, 3)
        frame = cadre_summary(ds, params, 1.0)
        assert frame['size'].sum() == ds.N
        assert frame['cadre'].tolist() == [1, 2, 3]
        assert 'w_connectivity' in frame.columns

    def test_target_spread(self):
        from cadres.data import Dataset

        ds = Dataset([[-1.0], [-1.1], [-0.9], [1.0]], [1.0, 3.0, 5.0, 7.0], ['x'])
        params = CadreParams(
            C=[[-1.0, 1.0]], d=[1.0], W=np.zeros((1, 2)), w0=np.zeros(2), sigma2=1.0,
            cadre_feature_idx=[0], target_feature_idx=[0],
        )
        frame = cadre_summary(ds, params, 5.0)
        assert frame['target_mean'].tolist() == pytest.approx([3.0, 7.0])
        assert frame.at[0, 'target_std'] == pytest.approx(2.0)
        assert np.isnan(frame.at[1, 'target_std'])


def test_assignment_table_rows(synthetic, rng):
    ds, _ = synthetic
    models = [random_params(rng, 2, 3) for _ in range(3)]
    table = assignment_table(ds, models, 1.0)
    assert table.B == 2
    assert table.N == ds.N
