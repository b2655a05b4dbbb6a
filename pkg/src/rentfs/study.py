"""Student-t kernels and the two randomisation validation studies.

VS1 compares the downstream model built on the selected features with
models built on ``ell`` random feature subsets of the same size. VS2 scores
the selected-feature model against ``ell`` random permutations of the test
labels. Each compares the observed score with the null scores through a
one-sided t-test that treats the observed score as a fixed constant.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import betainc

from .data import STREAM_VS1, STREAM_VS2, Task, derive_seed, make_rng
from .exceptions import RentError, SolverError
from .glm import fit_unpenalized, predict
from .metrics import confusion, mcc, r2

__all__ = [
    "StudyKind",
    "StudyReport",
    "t_cdf",
    "t_sf",
    "one_sided_t_test",
    "downstream_score",
    "vs1",
    "vs2",
]


def _check_df(df):
    df = np.asarray(df, dtype=float)
    if np.any(df < 1) or np.any(~np.isfinite(df)):
        raise RentError("degrees of freedom must be >= 1")
    return df


def t_sf(x, df):
    """Upper tail ``P(T > x)`` of Student's t, accurate far into the tail."""
    df = _check_df(df)
    x = np.asarray(x, dtype=float)
    # P(|T| > |x|) = I_{df/(df+x^2)}(df/2, 1/2)
    half = 0.5 * betainc(df / 2.0, 0.5, df / (df + x * x))
    out = np.where(x >= 0, half, 0.5 + 0.5 * betainc(0.5, df / 2.0, x * x / (df + x * x)))
    return out.item() if out.ndim == 0 else out


def t_cdf(x, df):
    """Student's t cumulative distribution via the regularised incomplete beta.

    Uses ``0.5 +- 0.5 * I_{x^2/(df+x^2)}(1/2, df/2)``, which is accurate in
    absolute terms and free of cancellation near ``x = 0``. Use
    :func:`t_sf` for small upper-tail probabilities.
    """
    df = _check_df(df)
    x = np.asarray(x, dtype=float)
    half = 0.5 * betainc(0.5, df / 2.0, x * x / (df + x * x))
    out = np.where(x >= 0, 0.5 + half, 0.5 - half)
    return out.item() if out.ndim == 0 else out


def one_sided_t_test(null_sample, observed):
    """p-value for H0: the observed score is not above the null mean.

    ``T = (observed - mean) / sqrt(var / ell)`` with the unbiased variance
    and ``p = P(T_{ell-1} > T)``. A constant null sample gives ``p = 0`` when
    the observed score exceeds the constant and 1 otherwise.
    """
    s = np.asarray(null_sample, dtype=float)
    if s.ndim != 1 or s.shape[0] < 2:
        raise RentError("the null sample needs at least two values")
    var = s.var(ddof=1)
    if var == 0.0:
        return 0.0 if observed > s[0] else 1.0
    stat = (observed - s.mean()) / math.sqrt(var / s.shape[0])
    return float(t_sf(stat, s.shape[0] - 1))


class StudyKind(str, enum.Enum):
    VS1 = "VS1"
    VS2 = "VS2"


@dataclass(frozen=True)
class StudyReport:
    study_kind: StudyKind
    metric: str
    observed_score: float
    null_scores: np.ndarray = field(repr=False)
    p_value: float
    n_excluded: int = 0

    @property
    def null_mean(self):
        return float(np.mean(self.null_scores))

    def to_dict(self):
        return {"study_kind": StudyKind(self.study_kind).value, "metric": self.metric,
                "observed_score": self.observed_score, "null_mean": self.null_mean,
                "p_value": self.p_value, "n_excluded": self.n_excluded,
                "ell": int(len(self.null_scores) + self.n_excluded),
                "null_scores": self.null_scores.tolist()}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), **kwargs)


def _metric_name(task):
    return "MCC" if task is Task.CLASSIFICATION else "R2"


def _score(task, y_true, y_hat):
    if task is Task.CLASSIFICATION:
        return mcc(confusion(y_true, (y_hat >= 0.5).astype(float), positive_class=1))
    return r2(y_true, y_hat)


def downstream_score(train, test, columns):
    """Test MCC (classification) or R^2 (regression) of the unpenalised GLM
    refit on ``columns`` of the training data."""
    columns = np.asarray(columns, dtype=int)
    model = fit_unpenalized(train.x[:, columns], train.y, train.task)
    return _score(train.task, test.y, predict(model, test.x[:, columns]))


def vs1(train, test, delta, ell=100, seed=0, *, observed):
    """Random-feature-subset study.

    Draws ``ell`` subsets of ``delta`` distinct features (subsets may repeat
    across draws), refits the downstream model on each and scores it on the
    test set. Draws whose refit fails are excluded and counted.
    """
    n = train.n_features
    if not 1 <= delta <= n:
        raise RentError(f"delta must lie in [1, {n}], got {delta}")
    if ell < 2:
        raise RentError("ell must be >= 2")
    rng = make_rng(derive_seed(seed, STREAM_VS1))
    scores = np.empty(ell)
    for d in range(ell):
        cols = np.sort(rng.choice(n, size=delta, replace=False))
        try:
            scores[d] = downstream_score(train, test, cols)
        except (SolverError, np.linalg.LinAlgError):
            scores[d] = np.nan
    ok = np.isfinite(scores)
    kept = scores[ok]
    if kept.shape[0] < 2:
        raise RentError("fewer than two VS1 refits succeeded")
    return StudyReport(StudyKind.VS1, _metric_name(train.task), float(observed), kept,
                       one_sided_t_test(kept, observed), int((~ok).sum()))


def vs2(train, test, selected, ell=100, seed=0):
    """Permuted-test-label study for the model on the selected features."""
    if ell < 2:
        raise RentError("ell must be >= 2")
    cols = np.asarray(list(selected), dtype=int)
    model = fit_unpenalized(train.x[:, cols], train.y, train.task)
    y_hat = predict(model, test.x[:, cols])
    observed = _score(train.task, test.y, y_hat)
    rng = make_rng(derive_seed(seed, STREAM_VS2))
    scores = np.array([_score(train.task, rng.permutation(test.y), y_hat)
                       for _ in range(ell)])
    return StudyReport(StudyKind.VS2, _metric_name(train.task), float(observed), scores,
                       one_sided_t_test(scores, observed))
