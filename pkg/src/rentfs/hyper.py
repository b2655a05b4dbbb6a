"""Two-step BIC hyperparameter search.

Step 1 fits one elastic-net GLM per ``(gamma, alpha)`` on the full training
set. Step 2, after the ensemble is trained, scans cutoff triples
``(t1, t2, t3)``: each triple defines a feature set F*, an unpenalised GLM is
refitted on F* and scored by BIC with ``rho = |F*| + 1``. Both steps return
the grid point with the smallest BIC and a record for every grid point.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SearchError
from .glm import ElasticNetConfig, bic, fit_enet, fit_unpenalized
from .rent import Cutoffs, score_features, select

__all__ = [
    "EnetGrid",
    "CutoffGrid",
    "SearchRecord",
    "search_enet",
    "search_cutoffs",
    "write_records_csv",
]


def _default_t12():
    return tuple(float(v) for v in np.round(np.arange(0.20, 1.0 + 1e-9, 0.05), 2))


@dataclass(frozen=True)
class EnetGrid:
    gammas: tuple = (0.01, 0.1, 1.0)
    alphas: tuple = (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        if not self.gammas or not self.alphas:
            raise SearchError("elastic-net grid must be non-empty")
        if any(not 0 <= a <= 1 for a in self.alphas):
            raise SearchError("alpha values must lie in [0, 1]")
        if any(g < 0 for g in self.gammas):
            raise SearchError("gamma values must be >= 0")

    def points(self):
        return [(g, a) for g in self.gammas for a in self.alphas]


@dataclass(frozen=True)
class CutoffGrid:
    t1_values: tuple = field(default_factory=_default_t12)
    t2_values: tuple = field(default_factory=_default_t12)
    t3_values: tuple = (0.9, 0.95, 0.975, 0.99)

    def __post_init__(self):
        for name in ("t1_values", "t2_values", "t3_values"):
            vals = tuple(float(v) for v in getattr(self, name))
            if not vals:
                raise SearchError(f"{name} must be non-empty")
            if any(not 0 <= v <= 1 for v in vals):
                raise SearchError(f"{name} must lie in [0, 1]")
            object.__setattr__(self, name, vals)

    def points(self):
        return [(a, b, c) for a in self.t1_values for b in self.t2_values
                for c in self.t3_values]


@dataclass(frozen=True)
class SearchRecord:
    """One evaluated grid point.

    ``status`` is ``"ok"`` for admissible points; step-2 points are
    ``"empty"`` (F* is empty) or ``"too_many"`` (|F*| >= I_train) otherwise,
    and carry ``bic = nan``.
    """

    params: dict
    bic: float
    n_selected: int
    converged: bool
    status: str = "ok"
    separable: bool = False

    def row(self):
        return {**self.params, "bic": self.bic, "n_selected": self.n_selected,
                "converged": self.converged, "status": self.status,
                "separable": self.separable}


def _pmap(fn, items, n_jobs):
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def search_enet(train, grid=None, tol=1e-5, n_jobs=1):
    """Step 1: choose ``(gamma, alpha)`` by BIC on the full training set.

    Fits with no nonzero weight are inadmissible (status ``"empty"``): an
    ensemble trained with them cannot select anything. Ties are broken by
    fewer nonzero weights, then larger gamma, then larger alpha. Returns
    ``(gamma, alpha, records)``.
    """
    grid = grid or EnetGrid()

    def evaluate(point):
        g, a = point
        model = fit_enet(train.x, train.y, ElasticNetConfig(g, a, tol=tol), train.task)
        return SearchRecord({"gamma": g, "alpha": a}, bic(model, train.x, train.y),
                            model.n_nonzero, model.converged,
                            "ok" if model.n_nonzero else "empty")

    records = _pmap(evaluate, grid.points(), n_jobs)
    usable = [r for r in records if r.converged and r.status == "ok"]
    if not usable:
        raise SearchError("no converged elastic-net grid point with nonzero weights:\n"
                          + "\n".join(str(r.row()) for r in records))
    best = min(usable, key=lambda r: (r.bic, r.n_selected,
                                      -r.params["gamma"], -r.params["alpha"]))
    return best.params["gamma"], best.params["alpha"], records


def _refit_bic(train, selected):
    cols = np.asarray(selected, dtype=int)
    model = fit_unpenalized(train.x[:, cols], train.y, train.task)
    return bic(model, train.x[:, cols], train.y, rho=len(cols) + 1), model


def search_cutoffs(ensemble, train, grid=None, memoize=True, n_jobs=1):
    """Step 2: choose cutoffs ``(t1, t2, t3)`` by BIC of the refitted model.

    Grid points whose F* is empty or has at least ``I_train`` features are
    inadmissible. Ties in BIC go to the smaller F*, then to the
    lexicographically larger cutoff triple. With ``memoize`` each distinct
    F* is refitted once. Returns ``(Cutoffs, records)``.
    """
    grid = grid or CutoffGrid()
    scores = score_features(ensemble.weight_matrix)
    points = grid.points()
    sets = [select(scores, Cutoffs(*p)).selected for p in points]
    n_obj = train.n_objects

    def evaluate(fset):
        if not fset:
            return math.nan, True, False, "empty"
        if len(fset) >= n_obj:
            return math.nan, True, False, "too_many"
        value, model = _refit_bic(train, fset)
        return value, model.converged or model.separable, model.separable, "ok"

    if memoize:
        unique = list(dict.fromkeys(sets))
        table = dict(zip(unique, _pmap(evaluate, unique, n_jobs)))
        results = [table[s] for s in sets]
    else:
        results = _pmap(evaluate, sets, n_jobs)

    records = []
    for p, fset, (value, conv, sep, status) in zip(points, sets, results):
        records.append(SearchRecord({"t1": p[0], "t2": p[1], "t3": p[2]}, value,
                                    len(fset), conv, status, sep))
    admissible = [(r, p) for r, p in zip(records, points) if r.status == "ok"]
    if not admissible:
        raise SearchError("no admissible cutoff configuration")
    best, point = min(admissible, key=lambda rp: (rp[0].bic, rp[0].n_selected,
                                                  tuple(-v for v in rp[1])))
    return Cutoffs(*point), records


def write_records_csv(records, path):
    """Write search records as CSV (one row per grid point)."""
    rows = [r.row() for r in records]
    fields = list(rows[0]) if rows else ["bic", "n_selected", "converged", "status",
                                         "separable"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields)
        w.writeheader()
        for row in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
