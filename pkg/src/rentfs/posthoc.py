"""Object-level ensemble diagnostics and PCA of the selected features.

The ensemble predicts every training object each time it falls in a
validation set. :func:`summarize_objects` condenses those predictions per
object (how often it was misclassified, its mean class-1 probability or its
mean absolute error). :func:`pca_fit` and :func:`correlation_loadings`
describe the training matrix restricted to the selected features, and
:func:`export_plot_data` writes both as CSV for external plotting.
"""

from __future__ import annotations

import csv
import math
import os
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Task
from .exceptions import RentError

__all__ = [
    "ObjectSummary",
    "PcaModel",
    "summarize_objects",
    "pca_fit",
    "correlation_loadings",
    "export_plot_data",
]


@dataclass(frozen=True)
class ObjectSummary:
    object_index: int
    n_val_appearances: int
    true_target: float
    n_incorrect: int | None
    pct_incorrect: float
    mean_probc1: float
    mean_abs_error: float
    values: tuple
    never_validated: bool = False


def summarize_objects(ensemble, y_train, decision_threshold=0.5):
    """Per-object summary of the ensemble's validation-set predictions.

    For classification ``values`` holds the class-1 probabilities and an
    appearance counts as incorrect when thresholding at
    ``decision_threshold`` (probability >= threshold means class 1) gives the
    wrong class. For regression ``values`` holds absolute errors. Objects
    that never appeared in a validation set get NaN statistics and
    ``never_validated=True``.
    """
    y_train = np.asarray(y_train, dtype=float)
    if len(y_train) != len(ensemble.object_records):
        raise RentError("y_train length does not match the ensemble's training set")
    classification = ensemble.task is Task.CLASSIFICATION
    out = []
    for i, rec in enumerate(ensemble.object_records):
        preds = np.array([p for _, p in rec], dtype=float)
        n = len(preds)
        y = float(y_train[i])
        if n == 0:
            out.append(ObjectSummary(i, 0, y, 0 if classification else None, math.nan,
                                     math.nan, math.nan, (), True))
            continue
        if classification:
            wrong = int(np.sum((preds >= decision_threshold).astype(float) != y))
            out.append(ObjectSummary(i, n, y, wrong, 100.0 * wrong / n,
                                     float(preds.mean()), math.nan, tuple(preds.tolist())))
        else:
            err = np.abs(preds - y)
            out.append(ObjectSummary(i, n, y, None, math.nan, math.nan,
                                     float(err.mean()), tuple(err.tolist())))
    never = sum(s.never_validated for s in out)
    if never:
        warnings.warn(f"{never} object(s) never appeared in a validation set",
                      RuntimeWarning, stacklevel=2)
    return out


@dataclass(frozen=True)
class PcaModel:
    component_count: int
    scores: np.ndarray
    loadings: np.ndarray
    correlation_loadings: np.ndarray
    explained_variance_ratio: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray
    singular_values: np.ndarray


def _svd_basis(x, standardize):
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] < 2 or x.shape[1] < 1:
        raise RentError("PCA needs a matrix with at least 2 rows and 1 column")
    means = x.mean(axis=0)
    xc = x - means
    scales = np.ones(x.shape[1])
    if standardize:
        sd = xc.std(axis=0, ddof=1)
        scales = np.where(sd > 0, sd, 1.0)
        xc = xc / scales
    u, s, vt = np.linalg.svd(xc, full_matrices=False)
    # sign convention: largest-magnitude loading entry of each component > 0
    pivot = np.argmax(np.abs(vt), axis=1)
    signs = np.sign(vt[np.arange(vt.shape[0]), pivot])
    signs[signs == 0] = 1.0
    return xc, means, scales, u * signs, s, vt * signs[:, None]


def pca_fit(x_selected, n_components=2, standardize=False):
    """Principal component analysis by singular value decomposition.

    Columns are centred (and scaled to unit variance when ``standardize``).
    Scores are the centred data projected on the principal axes, loadings
    are the unit-norm axes, and explained-variance ratios are squared
    singular values over their total.
    """
    x = np.asarray(x_selected, dtype=float)
    n_max = min(x.shape[0] - 1, x.shape[1]) if x.ndim == 2 else 0
    if not 1 <= n_components <= n_max:
        raise RentError(f"n_components must lie in [1, {n_max}], got {n_components}")
    xc, means, scales, u, s, vt = _svd_basis(x, standardize)
    c = n_components
    total = float(np.sum(s ** 2))
    ratio = (s[:c] ** 2 / total) if total > 0 else np.zeros(c)
    scores = u[:, :c] * s[:c]
    loadings = vt[:c].T
    corr = _corr(x, scores)
    return PcaModel(c, scores, loadings, corr, ratio, means, scales, s)


def _corr(x, scores):
    xc = x - x.mean(axis=0)
    sc = scores - scores.mean(axis=0)
    xn = np.sqrt(np.sum(xc ** 2, axis=0))
    sn = np.sqrt(np.sum(sc ** 2, axis=0))
    # relative cutoff: numerically zero columns carry no correlation
    xz = xn <= 1e-12 * max(1.0, xn.max(initial=0.0))
    sz = sn <= 1e-12 * max(1.0, sn.max(initial=0.0))
    if xz.any() or sz.any():
        warnings.warn("zero-variance feature or score column: correlation set to 0",
                      RuntimeWarning, stacklevel=3)
    num = xc.T @ sc
    den = np.outer(np.where(xz, 1.0, xn), np.where(sz, 1.0, sn))
    out = num / den
    out[xz, :] = 0.0
    out[:, sz] = 0.0
    return np.clip(out, -1.0, 1.0)


def correlation_loadings(model, x_selected):
    """Pearson correlation between each feature column and each score column."""
    x = np.asarray(x_selected, dtype=float)
    if x.shape[0] != model.scores.shape[0] or x.shape[1] != model.loadings.shape[0]:
        raise RentError("matrix does not match the fitted PCA model")
    return _corr(x, model.scores)


def _write(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v)
                        for v in r])


def export_plot_data(out_dir, summaries=None, pca=None, feature_names=None):
    """Write histogram, score and correlation-loading tables as CSV.

    Files written (each only when its input is given):

    ``objects.csv``
        object_index, n_val, true_target, n_incorrect, pct_incorrect,
        mean_probc1, mean_abs_error
    ``probc1.csv``
        object_index, value -- one row per validation appearance (class-1
        probability, or absolute error for regression)
    ``scores.csv``
        object_index, comp1..compC, true_target, pct_incorrect, mean_probc1
    ``corr_loadings.csv``
        feature, comp1..compC, r2_sum, inner_circle (radius sqrt(0.5), half the variance),
        outer_circle (radius 1)

    Returns the list of written paths.
    """
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise RentError(f"cannot create output directory {out_dir}: {exc}") from exc
    if not os.access(out_dir, os.W_OK):
        raise RentError(f"output directory is not writable: {out_dir}")
    written = []
    by_index = {}
    if summaries is not None:
        by_index = {s.object_index: s for s in summaries}
        path = os.path.join(out_dir, "objects.csv")
        _write(path, ["object_index", "n_val", "true_target", "n_incorrect",
                      "pct_incorrect", "mean_probc1", "mean_abs_error"],
               [(s.object_index, s.n_val_appearances, s.true_target, s.n_incorrect,
                 s.pct_incorrect, s.mean_probc1, s.mean_abs_error) for s in summaries])
        written.append(path)
        path = os.path.join(out_dir, "probc1.csv")
        _write(path, ["object_index", "value"],
               [(s.object_index, v) for s in summaries for v in s.values])
        written.append(path)
    if pca is not None:
        comps = [f"comp{c + 1}" for c in range(pca.component_count)]
        path = os.path.join(out_dir, "scores.csv")
        rows = []
        for i, row in enumerate(pca.scores):
            s = by_index.get(i)
            rows.append((i, *map(float, row),
                         None if s is None else s.true_target,
                         None if s is None else s.pct_incorrect,
                         None if s is None else s.mean_probc1))
        _write(path, ["object_index", *comps, "true_target", "pct_incorrect", "mean_probc1"],
               rows)
        written.append(path)
        path = os.path.join(out_dir, "corr_loadings.csv")
        names = feature_names or [str(j) for j in range(pca.loadings.shape[0])]
        cl = pca.correlation_loadings
        _write(path, ["feature", *comps, "r2_sum", "inner_circle", "outer_circle"],
               [(names[j], *map(float, cl[j]), float(np.sum(cl[j] ** 2)),
                 math.sqrt(0.5), 1.0) for j in range(cl.shape[0])])
        written.append(path)
    return written
