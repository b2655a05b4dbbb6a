"""Classification and regression metrics, and the Nogueira stability measure."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .data import Task
from .exceptions import RentError

__all__ = [
    "ConfusionMatrix",
    "confusion",
    "precision",
    "recall",
    "f1",
    "mcc",
    "rmsep",
    "r2",
    "nogueira_stability",
    "metric_rows",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn_: int
    tn: int

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn_, self.tn) < 0:
            raise RentError("confusion counts must be non-negative")

    @property
    def total(self):
        return self.tp + self.fp + self.fn_ + self.tn


def confusion(y_true, y_pred, positive_class=1):
    """Confusion counts with respect to ``positive_class`` (0 or 1)."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise RentError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    for v in (y_true, y_pred):
        if not np.all((v == 0) | (v == 1)):
            raise RentError("labels must be 0 or 1")
    if positive_class not in (0, 1):
        raise RentError("positive_class must be 0 or 1")
    t = y_true == positive_class
    p = y_pred == positive_class
    return ConfusionMatrix(int(np.sum(t & p)), int(np.sum(~t & p)),
                           int(np.sum(t & ~p)), int(np.sum(~t & ~p)))


def precision(cm):
    d = cm.tp + cm.fp
    return cm.tp / d if d else 0.0


def recall(cm):
    d = cm.tp + cm.fn_
    return cm.tp / d if d else 0.0


def f1(cm):
    pr, rc = precision(cm), recall(cm)
    return 2 * pr * rc / (pr + rc) if pr + rc else 0.0


def mcc(cm):
    """Matthews correlation coefficient; 0 when any marginal count is zero."""
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn_, cm.tn
    radicand = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if radicand == 0:
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(radicand)


def _pair(y_true, y_pred):
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise RentError(f"length mismatch: {y_true.shape} vs {y_pred.shape}")
    return y_true, y_pred


def rmsep(y_true, y_pred):
    y_true, y_pred = _pair(y_true, y_pred)
    return math.sqrt(np.mean((y_true - y_pred) ** 2))


def r2(y_true, y_pred):
    y_true, y_pred = _pair(y_true, y_pred)
    if y_true.size < 2:
        raise RentError("R^2 needs at least two values")
    sst = np.sum((y_true - y_true.mean()) ** 2)
    if sst == 0:
        raise RentError("R^2 is undefined for a constant target")
    return float(1.0 - np.sum((y_true - y_pred) ** 2) / sst)


def nogueira_stability(z):
    """Stability of M feature-selection runs given as an M x N 0/1 matrix.

    ``1 - mean_n(s_n^2) / (kbar/N * (1 - kbar/N))`` with ``s_n^2`` the
    unbiased variance of column ``n`` and ``kbar`` the mean number of
    selected features per run. Returns NaN (with a warning) when every run
    selects nothing or everything.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim != 2 or z.shape[0] < 2:
        raise RentError("stability needs at least two selection runs (M x N matrix)")
    if not np.all((z == 0) | (z == 1)):
        raise RentError("selection matrix must be binary")
    n = z.shape[1]
    kbar = z.sum(axis=1).mean()
    if kbar == 0 or kbar == n:
        warnings.warn("stability undefined: runs select no feature or every feature",
                      RuntimeWarning, stacklevel=2)
        return math.nan
    s2 = z.var(axis=0, ddof=1)
    # same formula with N factored out, exact on small integer cases
    return float(1.0 - s2.sum() * n / (kbar * (n - kbar)))


def metric_rows(y_true, y_hat, task):
    """Test metrics as ``{metric, class, value}`` rows.

    Classification expects class-1 probabilities in ``y_hat`` and reports
    per-class precision, recall and F1 plus MCC; regression reports RMSEP
    and R^2.
    """
    if Task.parse(task) is Task.REGRESSION:
        return [{"metric": "RMSEP", "class": None, "value": rmsep(y_true, y_hat)},
                {"metric": "R2", "class": None, "value": r2(y_true, y_hat)}]
    labels = (np.asarray(y_hat) >= 0.5).astype(float)
    rows = []
    for c in (0, 1):
        cm = confusion(y_true, labels, positive_class=c)
        rows += [{"metric": "PR", "class": c, "value": precision(cm)},
                 {"metric": "RC", "class": c, "value": recall(cm)},
                 {"metric": "F1", "class": c, "value": f1(cm)}]
    rows.append({"metric": "MCC", "class": None,
                 "value": mcc(confusion(y_true, labels, positive_class=1))})
    return rows
