import numpy as np
import pytest

from cadres.config import SplitSpec
from cadres.data import (
    SYNTH_THRESHOLDS,
    Dataset,
    Scaler,
    apply_scaler,
    bootstrap_sample,
    fit_scaler,
    gen_synthetic,
    inverse_target,
    invert_scaler,
    load_csv,
    read_feature_frame,
    split,
    split_indices,
)
from cadres.errors import DataError


def write_csv(tmp_path, text, name='data.csv'):
    fn = tmp_path / name
    fn.write_text(text)
    return str(fn)


class TestLoadCsv:

    def test_target_extracted(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, 'a,y,b\n1,10,2\n3,20,4\n'), 'y')
        assert ds.feature_names == ('a', 'b')
        assert ds.target_name == 'y'
        np.testing.assert_array_equal(ds.features, [[1, 2], [3, 4]])
        np.testing.assert_array_equal(ds.target, [10, 20])
        np.testing.assert_array_equal(ds.row_ids, [0, 1])

    def test_id_column(self, tmp_path):
        ds = load_csv(write_csv(tmp_path, 'id,a,y\nr1,1,2\nr2,3,4\n'), 'y', id_column='id')
        assert ds.feature_names == ('a',)
        assert list(ds.row_ids) == ['r1', 'r2']

    def test_missing_target(self, tmp_path):
        with pytest.raises(DataError, match='Target column "z"'):
            load_csv(write_csv(tmp_path, 'a,y\n1,2\n'), 'z')

    def test_non_numeric_cell_named(self, tmp_path):
        with pytest.raises(DataError, match='row 2, column "b"'):
            load_csv(write_csv(tmp_path, 'a,b,y\n1,2,3\n4,oops,6\n'), 'y')

    def test_empty_cell(self, tmp_path):
        with pytest.raises(DataError, match='column "a"'):
            load_csv(write_csv(tmp_path, 'a,y\n1,2\n,3\n'), 'y')

    def test_duplicate_header(self, tmp_path):
        with pytest.raises(DataError, match='duplicate'):
            load_csv(write_csv(tmp_path, 'a,a,y\n1,2,3\n'), 'y')

    def test_malformed_row(self, tmp_path):
        with pytest.raises(DataError, match='Cannot parse'):
            load_csv(write_csv(tmp_path, 'a,b,y\n1,2,3\n1,2,3,4\n'), 'y')

    def test_invalid_utf8(self, tmp_path):
        fn = tmp_path / 'bad.csv'
        fn.write_bytes(b'a,y\n1,\xff\xfe\n')
        with pytest.raises(DataError, match='Cannot parse'):
            load_csv(str(fn), 'y')

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match='not found'):
            load_csv(str(tmp_path / 'nope.csv'), 'y')


class TestReadFeatureFrame:

    def test_reorders_columns(self, tmp_path):
        X, ids = read_feature_frame(write_csv(tmp_path, 'b,y,a\n1,0,2\n3,0,4\n'), ['a', 'b'], target_column='y')
        np.testing.assert_array_equal(X, [[2, 1], [4, 3]])
        np.testing.assert_array_equal(ids, [0, 1])

    def test_mismatch_lists_columns(self, tmp_path):
        with pytest.raises(DataError, match=r"missing \['b'\], extra \['c'\]"):
            read_feature_frame(write_csv(tmp_path, 'a,c\n1,2\n'), ['a', 'b'])


class TestScaler:

    def test_sample_std(self):
        sc = fit_scaler(Dataset([[1.0], [3.0]], [0.0, 1.0], ['a']))
        assert sc.means[0] == pytest.approx(2.0)
        assert sc.stds[0] == pytest.approx(np.sqrt(2.0))

    def test_standardizes(self, rng):
        ds = Dataset(rng.normal(3.0, 2.0, size=(50, 3)), rng.normal(-1.0, 5.0, size=50), ['a', 'b', 'c'])
        scaled = apply_scaler(ds, fit_scaler(ds))
        np.testing.assert_allclose(scaled.features.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(scaled.features.std(axis=0, ddof=1), 1.0)
        np.testing.assert_allclose(scaled.target.std(ddof=1), 1.0)

    def test_invert(self, rng):
        ds = Dataset(rng.normal(size=(20, 2)), rng.normal(size=20), ['a', 'b'])
        sc = fit_scaler(ds)
        back = invert_scaler(apply_scaler(ds, sc), sc)
        np.testing.assert_allclose(back.features, ds.features, atol=1e-12)
        np.testing.assert_allclose(back.target, ds.target, atol=1e-12)
        np.testing.assert_allclose(inverse_target(apply_scaler(ds, sc).target, sc), ds.target, atol=1e-12)

    def test_constant_column(self):
        ds = Dataset([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]], [1.0, 2.0, 4.0], ['a', 'const'])
        sc = fit_scaler(ds)
        assert sc.stds[1] == 1.0
        np.testing.assert_array_equal(apply_scaler(ds, sc).features[:, 1], 0.0)

    def test_identity(self, rng):
        ds = Dataset(rng.normal(size=(10, 3)), rng.normal(size=10), ['a', 'b', 'c'])
        scaled = apply_scaler(ds, Scaler.identity(ds.P))
        np.testing.assert_array_equal(scaled.features, ds.features)
        np.testing.assert_array_equal(scaled.target, ds.target)

    def test_needs_two_rows(self):
        with pytest.raises(DataError):
            fit_scaler(Dataset([[1.0]], [1.0], ['a']))


class TestSplitting:

    def test_split_partitions(self):
        train_idx, test_idx = split_indices(101, SplitSpec(train_fraction=0.75, seed=3))
        assert train_idx.size == 75
        assert np.intersect1d(train_idx, test_idx).size == 0
        np.testing.assert_array_equal(np.sort(np.concatenate([train_idx, test_idx])), np.arange(101))

    def test_split_deterministic(self, rng):
        ds = Dataset(rng.normal(size=(40, 2)), rng.normal(size=40), ['a', 'b'])
        a, _ = split(ds, SplitSpec(seed=5))
        b, _ = split(ds, SplitSpec(seed=5))
        np.testing.assert_array_equal(a.row_ids, b.row_ids)

    def test_degenerate_split(self):
        ds = Dataset([[1.0], [2.0], [3.0]], [1.0, 2.0, 3.0], ['a'])
        with pytest.raises(DataError, match='training rows'):
            split(ds, SplitSpec(train_fraction=0.2))

    def test_bootstrap_sample(self, rng):
        ds = Dataset(rng.normal(size=(30, 2)), rng.normal(size=30), ['a', 'b'])
        sample = bootstrap_sample(ds, seed=1)
        assert sample.N == 30
        assert set(sample.row_ids) <= set(ds.row_ids)
        np.testing.assert_array_equal(sample.features, ds.features[sample.row_ids])
        np.testing.assert_array_equal(sample.row_ids, bootstrap_sample(ds, seed=1).row_ids)

    def test_bootstrap_distinct_fraction(self, rng):
        ds = Dataset(rng.normal(size=(1000, 1)), rng.normal(size=1000), ['a'])
        fractions = [np.unique(bootstrap_sample(ds, seed=s).row_ids).size / ds.N for s in range(50)]
        assert np.mean(fractions) == pytest.approx(1 - (1 - 1 / 1000) ** 1000, abs=0.03)


class TestSynthetic:

    def test_shape(self):
        ds, labels = gen_synthetic(25, seed=0)
        assert ds.N == 75
        assert ds.feature_names == ('connectivity', 'polarizability')
        assert np.bincount(labels).tolist() == [25, 25, 25]

    def test_labels_follow_connectivity(self):
        ds, labels = gen_synthetic(40, seed=1)
        conn = ds.features[:, ds.feature_index(['connectivity'])[0]]
        np.testing.assert_array_equal(labels, np.digitize(conn, SYNTH_THRESHOLDS))

    def test_deterministic(self):
        a, la = gen_synthetic(20, seed=4)
        b, lb = gen_synthetic(20, seed=4)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.target, b.target)
        np.testing.assert_array_equal(la, lb)

    def test_too_small(self):
        with pytest.raises(DataError):
            gen_synthetic(3, seed=0)

    def test_group_correlation_signs(self):
        ds, labels = gen_synthetic(100, seed=0)
        pol = ds.features[:, ds.feature_index(['polarizability'])[0]]
        corrs = [np.corrcoef(pol[labels == g], ds.target[labels == g])[0, 1] for g in range(3)]
        assert np.sign(corrs).tolist() == [1.0, -1.0, -1.0]
        assert min(abs(c) for c in corrs) > 0.8
