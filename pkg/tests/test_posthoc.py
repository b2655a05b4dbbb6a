import csv
import math
import warnings
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rentfs import (ElasticNetConfig, RentError, correlation_loadings, export_plot_data,
                    make_synthetic, pca_fit, summarize_objects, train_ensemble)
from rentfs.data import Task


def fake_ensemble(records, task=Task.CLASSIFICATION):
    return SimpleNamespace(object_records=tuple(tuple(r) for r in records), task=task)


class TestSummaries:
    def test_table_counts(self):
        # 24 appearances, 13 on the wrong side of 0.5
        rec = [(k, 0.8) for k in range(13)] + [(k, 0.2) for k in range(13, 24)]
        s = summarize_objects(fake_ensemble([rec]), [0.0])[0]
        assert (s.n_val_appearances, s.n_incorrect) == (24, 13)
        assert round(s.pct_incorrect, 1) == 54.2

    def test_always_correct(self):
        rec = [(k, 0.1) for k in range(23)]
        s = summarize_objects(fake_ensemble([rec]), [0.0])[0]
        assert s.n_incorrect == 0 and s.pct_incorrect == 0.0

    def test_single_appearance(self):
        s = summarize_objects(fake_ensemble([[(0, 0.7)]]), [1.0])[0]
        assert s.n_incorrect == 0 and s.mean_probc1 == 0.7 and s.values == (0.7,)

    def test_threshold_boundary(self):
        s = summarize_objects(fake_ensemble([[(0, 0.5)]]), [1.0])[0]
        assert s.n_incorrect == 0

    def test_never_validated(self):
        with pytest.warns(RuntimeWarning, match="never appeared"):
            out = summarize_objects(fake_ensemble([[], [(0, 0.3)]]), [0.0, 1.0])
        assert out[0].never_validated and math.isnan(out[0].pct_incorrect)

    def test_regression(self):
        out = summarize_objects(fake_ensemble([[(0, 1.5), (1, 0.0)]], Task.REGRESSION),
                                [1.0])
        assert out[0].mean_abs_error == 0.75 and out[0].n_incorrect is None

    def test_length_mismatch(self):
        with pytest.raises(RentError):
            summarize_objects(fake_ensemble([[]]), [0.0, 1.0])

    def test_conservation(self):
        d, _ = make_synthetic("classification", 60, 5, 2, 0.5, seed=1)
        e = train_ensemble(d, 7, ElasticNetConfig(0.1, 0.5), master_seed=0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            out = summarize_objects(e, d.y)
        assert sum(s.n_val_appearances for s in out) == sum(len(s.val_k)
                                                             for s in e.subsample_log)
        for s in out:
            assert len(s.values) == s.n_val_appearances
            if s.n_val_appearances:
                assert s.pct_incorrect == pytest.approx(100 * s.n_incorrect
                                                        / s.n_val_appearances)


def random_matrix(seed, n=30, p=5):
    r = np.random.default_rng(seed)
    return r.normal(size=(n, p)) @ r.normal(size=(p, p))


class TestPca:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31), st.integers(6, 40), st.integers(1, 5), st.booleans())
    def test_invariants(self, seed, n, p, standardize):
        x = random_matrix(seed, n, p)
        c = min(n - 1, p)
        m = pca_fit(x, c, standardize=standardize)
        assert np.all(np.abs(m.scores.mean(axis=0)) < 1e-10)
        cov = m.scores.T @ m.scores
        off = cov - np.diag(np.diag(cov))
        assert np.all(np.abs(off) < 1e-8 * max(1.0, np.abs(cov).max()))
        np.testing.assert_allclose(m.loadings.T @ m.loadings, np.eye(c), atol=1e-10)
        xc = (x - x.mean(0)) / m.column_scales
        np.testing.assert_allclose(m.scores @ m.loadings.T, xc, atol=1e-8)
        assert np.all(np.diff(m.explained_variance_ratio) <= 1e-12)
        assert m.explained_variance_ratio.sum() == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(np.sum(m.correlation_loadings ** 2, axis=1), 1.0, atol=1e-8)
        assert np.all(np.abs(m.correlation_loadings) <= 1)
        pivot = np.argmax(np.abs(m.loadings), axis=0)
        assert np.all(m.loadings[pivot, np.arange(c)] > 0)

    def test_diag_covariance(self):
        r = np.random.default_rng(0)
        z = r.normal(size=(500, 2))
        # exactly orthogonal, centred columns with variances 4 and 1
        q, _ = np.linalg.qr(np.column_stack([np.ones(500), z]))
        x = q[:, 1:] * np.sqrt(499) * np.array([2.0, 1.0])
        m = pca_fit(x, 2)
        np.testing.assert_allclose(m.explained_variance_ratio, [0.8, 0.2], atol=1e-6)

    def test_rank_one(self):
        a = np.random.default_rng(1).normal(size=20)
        x = np.column_stack([a, a])
        m = pca_fit(x, 1)
        assert m.explained_variance_ratio[0] == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(np.abs(m.correlation_loadings[:, 0]), 1.0, atol=1e-12)

    def test_row_permutation(self):
        x = random_matrix(3)
        perm = np.random.default_rng(3).permutation(len(x))
        a, b = pca_fit(x, 3), pca_fit(x[perm], 3)
        np.testing.assert_allclose(a.loadings, b.loadings, atol=1e-10)
        np.testing.assert_allclose(a.scores[perm], b.scores, atol=1e-10)

    def test_orthogonal_feature_zero_row(self):
        r = np.random.default_rng(2)
        q, _ = np.linalg.qr(np.column_stack([np.ones(40), r.normal(size=(40, 2))]))
        x = np.column_stack([10 * q[:, 1], q[:, 2]])
        m = pca_fit(x, 1)
        np.testing.assert_allclose(correlation_loadings(m, x)[1], 0.0, atol=1e-10)

    def test_zero_variance_feature(self):
        x = np.column_stack([np.arange(5.0), np.ones(5)])
        with pytest.warns(RuntimeWarning, match="zero-variance"):
            m = pca_fit(x, 1)
        assert m.correlation_loadings[1, 0] == 0.0

    @pytest.mark.parametrize("c", [0, 4])
    def test_bad_components(self, c):
        with pytest.raises(RentError):
            pca_fit(random_matrix(0, 10, 3), c)

    def test_mismatch(self):
        m = pca_fit(random_matrix(0, 10, 3), 2)
        with pytest.raises(RentError):
            correlation_loadings(m, random_matrix(0, 9, 3))


def read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_export(tmp_path):
    rec = [[(0, 0.2), (1, 0.9)], [(0, 0.6)], [(1, 0.4)]]
    sums = summarize_objects(fake_ensemble(rec), [0.0, 1.0, 0.0])
    x = random_matrix(5, 3, 2)
    pca = pca_fit(x, 2)
    files = export_plot_data(tmp_path, sums, pca, ["a", "b"])
    assert len(files) == 4
    assert len(read(tmp_path / "scores.csv")) == 1 + 3
    assert len(read(tmp_path / "probc1.csv")) == 1 + 4
    rows = read(tmp_path / "corr_loadings.csv")
    assert len(rows) == 1 + 2 and rows[1][0] == "a"
    assert float(rows[1][-2]) == pytest.approx(math.sqrt(0.5))
    assert read(tmp_path / "objects.csv")[0][:3] == ["object_index", "n_val", "true_target"]


def test_export_empty(tmp_path):
    export_plot_data(tmp_path, [])
    assert read(tmp_path / "objects.csv") == [["object_index", "n_val", "true_target",
                                               "n_incorrect", "pct_incorrect",
                                               "mean_probc1", "mean_abs_error"]]
    assert len(read(tmp_path / "probc1.csv")) == 1


def test_export_unwritable(tmp_path):
    target = tmp_path / "file"
    target.write_text("x")
    with pytest.raises(RentError):
        export_plot_data(target / "sub", [])
