import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rentfs import (DataError, Dataset, ScalingParams, Task, apply_standardizer,
                    derive_seed, draw_subsample, fit_standardizer, invert_standardizer,
                    load_csv, make_synthetic, stratified_split)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_structure(self, tmp_path):
        p = write(tmp_path, "a,b,y\n1,2,0.5\n3,4,1.5\n5,6,2.5\n")
        d = load_csv(p, "y", "regression")
        assert (d.n_objects, d.n_features) == (3, 2)
        assert d.feature_names == ("a", "b")
        np.testing.assert_array_equal(d.y, [0.5, 1.5, 2.5])
        np.testing.assert_array_equal(d.x[:, 1], [2, 4, 6])

    def test_target_by_index_keeps_feature_order(self, tmp_path):
        p = write(tmp_path, "y,a,b\n0,1,2\n1,3,4\n")
        d = load_csv(p, 0, Task.CLASSIFICATION)
        assert d.feature_names == ("a", "b")

    def test_binary_target_accepted(self, tmp_path):
        p = write(tmp_path, "a,y\n1,0\n2,1\n3,1\n")
        assert load_csv(p, "y", "classification").y.tolist() == [0, 1, 1]

    @pytest.mark.parametrize("text,target,message", [
        ("a,y\n1,0\n2,2\n", "y", "invalid class label"),
        ("a,y\n1,0\n2,1\n", "z", "missing target column"),
        ("a,y\n1,0\nfoo,1\n", "y", "non-numeric cell"),
        ("a,y\n1,0\nnan,1\n", "y", "non-finite cell"),
        ("a,y\ninf,0\n2,1\n", "y", "non-finite cell"),
    ])
    def test_diagnostics(self, tmp_path, text, target, message):
        with pytest.raises(DataError, match=message):
            load_csv(write(tmp_path, text), target, "classification")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="file not found"):
            load_csv(tmp_path / "nope.csv", "y", "regression")


class TestStandardizer:
    def test_mean_and_sample_std(self):
        d = Dataset(np.array([[1.0, 0], [2, 0], [3, 4], [2, 4]]), np.zeros(4), ["a", "b"],
                    "regression")
        p = fit_standardizer(d)
        np.testing.assert_allclose(p.means, [2, 2])
        # (0,0,4,4): sqrt(16/3)
        assert p.stddevs[1] == pytest.approx(2.309401, abs=1e-6)

    def test_unit_column(self):
        d = Dataset(np.array([[1.0], [2], [3]]), np.zeros(3), ["a"], "regression")
        p = fit_standardizer(d)
        assert (p.means[0], p.stddevs[0]) == (2.0, 1.0)
        np.testing.assert_allclose(apply_standardizer(d, p).x[:, 0], [-1, 0, 1])

    def test_constant_feature_policies(self):
        d = Dataset(np.array([[5.0, 1], [5, 2], [5, 3]]), np.zeros(3), ["c", "v"],
                    "regression")
        with pytest.raises(DataError, match="constant feature"):
            fit_standardizer(d, policy="reject")
        with pytest.warns(UserWarning, match="constant"):
            p = fit_standardizer(d)
        assert p.stddevs[0] == 1.0 and p.constant.tolist() == [True, False]

    def test_identity_and_test_transform(self):
        d = Dataset(np.array([[4.0], [1.0]]), np.zeros(2), ["a"], "regression")
        ident = ScalingParams(np.zeros(1), np.ones(1))
        np.testing.assert_array_equal(apply_standardizer(d, ident).x, d.x)
        assert apply_standardizer(d, ScalingParams([2.0], [1.0])).x[0, 0] == 2.0

    def test_dimension_mismatch(self):
        d = Dataset(np.ones((2, 2)), np.zeros(2), ["a", "b"], "regression")
        with pytest.raises(DataError, match="dimension mismatch"):
            apply_standardizer(d, ScalingParams([0.0], [1.0]))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 30), st.integers(1, 6))
    def test_round_trip(self, seed, n, p):
        r = np.random.default_rng(seed)
        x = r.normal(r.uniform(-100, 100, p), r.uniform(0.1, 50, p), (n, p))
        d = Dataset(x, np.zeros(n), [f"f{j}" for j in range(p)], "regression")
        with np.errstate(all="ignore"):
            params = fit_standardizer(d) if n > 1 else None
        back = invert_standardizer(apply_standardizer(d, params), params)
        np.testing.assert_allclose(back.x, x, rtol=0, atol=1e-10 * max(1, np.abs(x).max()))


class TestStratifiedSplit:
    def data(self, n0=62, n1=38):
        y = np.r_[np.zeros(n0), np.ones(n1)]
        return Dataset(np.arange(len(y), dtype=float)[:, None], y, ["i"], "classification")

    def test_class_counts(self):
        sp = stratified_split(self.data(), 0.3, 7)
        assert sp.test.n_objects == 30
        assert 18 <= np.sum(sp.test.y == 0) <= 19

    def test_deterministic(self):
        a = stratified_split(self.data(), 0.3, 99)
        b = stratified_split(self.data(), 0.3, 99)
        np.testing.assert_array_equal(a.test_index, b.test_index)

    @pytest.mark.parametrize("frac", [0.0, 1.0, -0.2])
    def test_bad_fraction(self, frac):
        with pytest.raises(DataError):
            stratified_split(self.data(), frac, 0)

    def test_tiny_class(self):
        with pytest.raises(DataError, match="fewer than 2"):
            stratified_split(self.data(20, 1), 0.3, 0)

    def test_regression_split(self):
        d = Dataset(np.ones((10, 1)), np.arange(10.0), ["a"], "regression")
        sp = stratified_split(d, 0.3, 1)
        assert sp.test.n_objects == 3
        assert sorted(np.r_[sp.train_index, sp.test_index]) == list(range(10))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.integers(2, 60),
           st.floats(0.1, 0.6))
    def test_partition_and_proportionality(self, seed, n0, n1, frac):
        d = self.data(n0, n1)
        n_test = round((n0 + n1) * frac)
        if n_test < 2 or n_test > n0 + n1 - 2:
            return
        sp = stratified_split(d, frac, seed)
        assert set(sp.train_index).isdisjoint(sp.test_index)
        assert sorted(np.r_[sp.train_index, sp.test_index]) == list(range(n0 + n1))
        for c, n_c in ((0, n0), (1, n1)):
            exact = n_c * sp.test.n_objects / (n0 + n1)
            assert abs(np.sum(sp.test.y == c) - exact) <= 1


class TestSubsample:
    def test_half(self):
        s = draw_subsample(100, (0.5, 0.5), 3)
        assert len(s.train_k) == 50 and len(s.val_k) == 50

    def test_size_range(self):
        sizes = {len(draw_subsample(100, (0.4, 0.6), k).train_k) for k in range(200)}
        assert min(sizes) >= 40 and max(sizes) <= 60 and len(sizes) > 5

    def test_distinct_seeds_differ(self):
        a = draw_subsample(1000, (0.5, 0.5), derive_seed(0, 2, 0))
        b = draw_subsample(1000, (0.5, 0.5), derive_seed(0, 2, 1))
        assert not np.array_equal(a.train_k, b.train_k)

    @pytest.mark.parametrize("rng_", [(0.001, 0.001), (1.0, 1.0), (0.6, 0.4), (0.0, 0.5)])
    def test_degenerate(self, rng_):
        with pytest.raises(DataError):
            draw_subsample(10, rng_, 0)

    def test_partition_many_seeds(self):
        for seed in range(500):
            s = draw_subsample(37, (0.3, 0.8), seed)
            assert len(s.train_k) and len(s.val_k)
            assert set(s.train_k).isdisjoint(s.val_k)
            assert sorted(np.r_[s.train_k, s.val_k]) == list(range(37))

    def test_deterministic(self):
        a, b = draw_subsample(50, (0.3, 0.7), 11), draw_subsample(50, (0.3, 0.7), 11)
        np.testing.assert_array_equal(a.train_k, b.train_k)


class TestSynthetic:
    def test_noiseless_regression_is_linear(self):
        d, inf = make_synthetic("regression", 60, 20, 3, noise=0.0, seed=5)
        a = np.column_stack([np.ones(60), d.x[:, inf]])
        coef = np.linalg.lstsq(a, d.y, rcond=None)[0]
        resid = d.y - a @ coef
        r2 = 1 - resid @ resid / np.sum((d.y - d.y.mean()) ** 2)
        assert r2 == pytest.approx(1.0, abs=1e-12)

    def test_null_signal(self):
        d, inf = make_synthetic("regression", 400, 5, 0, noise=1.0, seed=2)
        assert inf.size == 0
        half = 200
        a = np.column_stack([np.ones(half), d.x[:half]])
        coef = np.linalg.lstsq(a, d.y[:half], rcond=None)[0]
        pred = np.column_stack([np.ones(half), d.x[half:]]) @ coef
        yt = d.y[half:]
        assert 1 - np.sum((yt - pred) ** 2) / np.sum((yt - yt.mean()) ** 2) < 0.05

    def test_c0_scale(self):
        d, inf = make_synthetic("classification", 250, 1000, 10, 1.0, seed=1)
        sp = stratified_split(d, 0.3, 0)
        assert (sp.train.n_objects, sp.test.n_objects, d.n_features) == (175, 75, 1000)
        assert set(np.unique(d.y)) == {0.0, 1.0} and len(inf) == 10

    def test_too_many_informative(self):
        with pytest.raises(DataError):
            make_synthetic("regression", 10, 3, 4)

    def test_deterministic(self):
        a, _ = make_synthetic("classification", 30, 4, 2, 0.5, seed=9)
        b, _ = make_synthetic("classification", 30, 4, 2, 0.5, seed=9)
        np.testing.assert_array_equal(a.x, b.x)
        np.testing.assert_array_equal(a.y, b.y)


def test_dataset_invariants():
    with pytest.raises(DataError):
        Dataset(np.ones((3, 2)), np.ones(2), ["a", "b"], "regression")
    with pytest.raises(DataError, match="invalid class label"):
        Dataset(np.ones((2, 1)), [0, 2], ["a"], "classification")
    with pytest.raises(DataError, match="non-finite"):
        Dataset(np.array([[math.nan], [1]]), [0, 1], ["a"], "regression")
    d = Dataset(np.ones((2, 1)), [0, 1], ["a"], "classification")
    with pytest.raises(ValueError):
        d.x[0, 0] = 3.0
