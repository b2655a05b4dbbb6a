"""Ensemble training, the weight matrix B and the three selection criteria.

Each of the K elementary models is an elastic-net GLM fitted on a random
subsample of the (standardised) training set. Column ``n`` of the resulting
K x N weight matrix summarises how feature ``n`` behaved across the
ensemble:

* ``tau1`` -- fraction of models with a nonzero weight,
* ``tau2`` -- ``|sum sign(beta)| / K``, how consistent the sign is,
* ``tau3`` -- Student-t CDF (K-1 dof) of ``|mean| / sqrt(var / K)``.

A feature is selected when all three reach their cutoffs.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import STREAM_SUBSAMPLE, Dataset, Subsample, Task, derive_seed, draw_subsample
from .exceptions import DataError, RentError, SelectionError
from .glm import ElasticNetConfig, fit_enet, predict
from .study import t_cdf

__all__ = [
    "WeightMatrix",
    "CriteriaScores",
    "Cutoffs",
    "EnsembleOutput",
    "SelectionResult",
    "train_ensemble",
    "tau1",
    "tau2",
    "tau3",
    "score_features",
    "select",
    "apply_selection",
]

MAX_SUBSAMPLE_RETRIES = 25


@dataclass(frozen=True)
class WeightMatrix:
    b: np.ndarray

    def __post_init__(self):
        b = np.array(self.b, dtype=float, copy=True)
        if b.ndim != 2:
            raise RentError("weight matrix must be 2-d (K x N)")
        if b.shape[0] < 2:
            raise RentError("weight matrix needs K >= 2 rows")
        if not np.all(np.isfinite(b)):
            raise RentError("weight matrix has non-finite entries")
        b.setflags(write=False)
        object.__setattr__(self, "b", b)

    @property
    def K(self):
        return self.b.shape[0]

    @property
    def N(self):
        return self.b.shape[1]


@dataclass(frozen=True)
class CriteriaScores:
    tau1: np.ndarray
    tau2: np.ndarray
    tau3: np.ndarray
    mean_mu: np.ndarray
    var_sigma2: np.ndarray

    def to_dict(self):
        return {k: getattr(self, k).tolist()
                for k in ("tau1", "tau2", "tau3", "mean_mu", "var_sigma2")}


@dataclass(frozen=True)
class Cutoffs:
    t1: float
    t2: float
    t3: float

    def __post_init__(self):
        for name in ("t1", "t2", "t3"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise RentError(f"cutoff {name} must lie in [0, 1], got {v}")

    def as_tuple(self):
        return (self.t1, self.t2, self.t3)


@dataclass(frozen=True)
class SelectionResult:
    scores: CriteriaScores
    cutoffs: Cutoffs
    selected: tuple

    @property
    def delta(self):
        return len(self.selected)

    def to_dict(self):
        return {"cutoffs": dict(zip(("t1", "t2", "t3"), self.cutoffs.as_tuple())),
                "selected": list(self.selected), "delta": self.delta,
                "scores": self.scores.to_dict()}


@dataclass(frozen=True)
class EnsembleOutput:
    """Result of :func:`train_ensemble`.

    ``object_records[i]`` lists ``(k, prediction)`` for every model ``k``
    whose validation set contained training object ``i``; predictions are
    class-1 probabilities for classification and point predictions for
    regression.
    """

    weight_matrix: WeightMatrix
    intercepts: np.ndarray
    object_records: tuple
    subsample_log: tuple
    task: Task
    config: ElasticNetConfig
    converged: np.ndarray

    def to_dict(self):
        return {
            "task": self.task.value,
            "config": self.config.to_dict(),
            "B": self.weight_matrix.b.tolist(),
            "intercepts": self.intercepts.tolist(),
            "converged": self.converged.tolist(),
            "subsamples": [{"train_k": s.train_k.tolist(), "val_k": s.val_k.tolist()}
                           for s in self.subsample_log],
            "object_records": [[[k, p] for k, p in rec] for rec in self.object_records],
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        subs = tuple(Subsample(np.asarray(s["train_k"], int), np.asarray(s["val_k"], int))
                     for s in d["subsamples"])
        recs = tuple(tuple((int(k), float(p)) for k, p in rec) for rec in d["object_records"])
        return cls(WeightMatrix(np.asarray(d["B"], float)), np.asarray(d["intercepts"], float),
                   recs, subs, Task.parse(d["task"]), ElasticNetConfig(**d["config"]),
                   np.asarray(d["converged"], bool))


def _fit_member(train, cfg, fraction_range, master_seed, k):
    for attempt in range(MAX_SUBSAMPLE_RETRIES + 1):
        sub = draw_subsample(train.n_objects, fraction_range,
                             derive_seed(master_seed, STREAM_SUBSAMPLE, k, attempt))
        y_k = train.y[sub.train_k]
        if train.task is Task.REGRESSION or 0 < y_k.sum() < len(y_k):
            break
    else:
        raise DataError(f"model {k}: no two-class subsample after "
                        f"{MAX_SUBSAMPLE_RETRIES} retries")
    model = fit_enet(train.x[sub.train_k], y_k, cfg, train.task)
    pred = predict(model, train.x[sub.val_k])
    return sub, model, pred


def train_ensemble(train, k_models=100, enet=None, fraction_range=(0.5, 0.5),
                   master_seed=0, n_jobs=1):
    """Fit K elastic-net GLMs on random subsamples of ``train``.

    Subsample ``k`` is drawn with seed ``derive_seed(master_seed,
    STREAM_SUBSAMPLE, k, attempt)``; for classification a subsample missing a
    class is redrawn with the next ``attempt`` (at most 25 retries). Models
    are independent, so ``n_jobs > 1`` fits them in threads; the result does
    not depend on ``n_jobs``.
    """
    if k_models < 2:
        raise RentError("k_models must be >= 2")
    if enet is None:
        raise RentError("an ElasticNetConfig is required")

    def work(k):
        return _fit_member(train, enet, fraction_range, master_seed, k)

    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            results = list(pool.map(work, range(k_models)))
    else:
        results = [work(k) for k in range(k_models)]

    b = np.empty((k_models, train.n_features))
    intercepts = np.empty(k_models)
    converged = np.empty(k_models, bool)
    records = [[] for _ in range(train.n_objects)]
    for k, (sub, model, pred) in enumerate(results):
        b[k] = model.weights
        intercepts[k] = model.intercept
        converged[k] = model.converged
        for i, p in zip(sub.val_k, pred):
            records[i].append((k, float(p)))
    if not converged.all():
        warnings.warn(f"{int((~converged).sum())} of {k_models} ensemble models did not "
                      "converge", RuntimeWarning, stacklevel=2)
    return EnsembleOutput(WeightMatrix(b), intercepts,
                          tuple(tuple(r) for r in records),
                          tuple(r[0] for r in results), train.task, enet, converged)


# ----------------------------------------------------------- criteria

def tau1(column, eps=0.0):
    """Fraction of entries with ``|beta| > eps`` (exact nonzero by default)."""
    column = np.asarray(column, float)
    return float(np.mean(np.abs(column) > eps))


def tau2(column):
    column = np.asarray(column, float)
    return float(abs(np.sign(column).sum()) / column.shape[0])


def tau3(column):
    """t-CDF of the standardised mean weight, K-1 degrees of freedom.

    A zero-variance column scores 1 when its mean is nonzero and 0.5 when it
    is identically zero.
    """
    column = np.asarray(column, float)
    k = column.shape[0]
    if k < 2:
        raise RentError("tau3 needs at least two weights")
    mu = column.mean()
    var = column.var(ddof=1)
    if var == 0.0:
        return 1.0 if mu != 0.0 else 0.5
    return t_cdf(abs(mu) / np.sqrt(var / k), k - 1)


def score_features(wm, eps=0.0):
    if not isinstance(wm, WeightMatrix):
        wm = WeightMatrix(wm)
    b = wm.b
    k = wm.K
    t1 = np.mean(np.abs(b) > eps, axis=0)
    t2 = np.abs(np.sign(b).sum(axis=0)) / k
    mu = b.mean(axis=0)
    var = b.var(axis=0, ddof=1)
    t3 = np.empty(wm.N)
    flat = var == 0.0
    t3[flat] = np.where(mu[flat] != 0.0, 1.0, 0.5)
    live = ~flat
    t3[live] = t_cdf(np.abs(mu[live]) / np.sqrt(var[live] / k), k - 1)
    return CriteriaScores(t1, t2, t3, mu, var)


def select(scores, cutoffs):
    if not isinstance(cutoffs, Cutoffs):
        cutoffs = Cutoffs(*cutoffs)
    keep = ((scores.tau1 >= cutoffs.t1) & (scores.tau2 >= cutoffs.t2)
            & (scores.tau3 >= cutoffs.t3))
    return SelectionResult(scores, cutoffs, tuple(int(i) for i in np.flatnonzero(keep)))


def apply_selection(data, selected):
    """Project a dataset onto the selected feature columns."""
    idx = np.asarray(list(selected), dtype=int)
    if idx.size == 0:
        raise SelectionError("no features selected")
    if idx.min() < 0 or idx.max() >= data.n_features:
        raise DataError(f"selected index out of range for {data.n_features} features")
    return Dataset(data.x[:, idx], data.y, [data.feature_names[i] for i in idx], data.task)
