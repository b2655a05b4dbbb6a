"""Elastic-net linear and logistic regression, prediction and BIC.

The penalised objectives are

* linear:   1/(2I) * sum (y - b0 - x.beta)^2 + penalty
* logistic: 1/I * sum -[y log p + (1-y) log(1-p)] + penalty

with ``penalty = gamma * (alpha*|beta|_1 + (1-alpha)/2 * |beta|_2^2)`` and an
unpenalised intercept. Both are solved by cyclic coordinate descent with
soft-thresholding, starting from zero weights, so fits are deterministic.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from . import _cd
from .data import Task
from .exceptions import SolverError

__all__ = [
    "ElasticNetConfig",
    "GlmModel",
    "fit_linear_enet",
    "fit_logistic_enet",
    "fit_enet",
    "fit_unpenalized",
    "predict",
    "predict_labels",
    "log_likelihood",
    "bic",
    "penalized_objective",
]


@dataclass(frozen=True)
class ElasticNetConfig:
    """Elastic-net hyperparameters and solver controls.

    ``max_iter`` counts coordinate sweeps for linear fits and reweighting
    steps for logistic fits; ``None`` selects 1000 and 100 respectively.
    ``max_inner`` caps the sweeps per logistic reweighting step.
    """

    gamma: float
    alpha: float
    tol: float = 1e-5
    max_iter: int | None = None
    max_inner: int = 100

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise SolverError(f"gamma must be finite and >= 0, got {self.gamma}")
        if not 0 <= self.alpha <= 1:
            raise SolverError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.tol > 0:
            raise SolverError(f"tol must be > 0, got {self.tol}")
        if self.max_iter is not None and self.max_iter < 1:
            raise SolverError("max_iter must be >= 1")
        if self.max_inner < 1:
            raise SolverError("max_inner must be >= 1")

    def to_dict(self):
        return {"gamma": self.gamma, "alpha": self.alpha, "tol": self.tol,
                "max_iter": self.max_iter, "max_inner": self.max_inner}


@dataclass(frozen=True)
class GlmModel:
    intercept: float
    weights: np.ndarray
    task: Task
    converged: bool = True
    n_iterations: int = 0
    config: ElasticNetConfig | None = None
    separable: bool = False
    objective_trace: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "task", Task.parse(self.task))
        object.__setattr__(self, "intercept", float(self.intercept))

    @property
    def n_nonzero(self):
        return int(np.count_nonzero(self.weights))

    def to_dict(self):
        return {
            "task": self.task.value,
            "intercept": self.intercept,
            "weights": self.weights.tolist(),
            "config": None if self.config is None else self.config.to_dict(),
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "separable": self.separable,
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        cfg = d.get("config")
        return cls(d["intercept"], np.asarray(d["weights"], float), d["task"],
                   converged=d.get("converged", True),
                   n_iterations=d.get("n_iterations", 0),
                   config=None if cfg is None else ElasticNetConfig(**cfg),
                   separable=d.get("separable", False))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _check_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or y.ndim != 1 or x.shape[0] != y.shape[0]:
        raise SolverError(f"shape mismatch: x {x.shape}, y {y.shape}")
    if x.shape[0] < 2:
        raise SolverError("at least two objects are required")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise SolverError("non-finite input")
    return np.asfortranarray(x), np.ascontiguousarray(y)


def fit_linear_enet(x, y, cfg):
    """Elastic-net linear regression by cyclic coordinate descent.

    Converges when the largest absolute coordinate change in a full sweep
    (intercept included) falls below ``cfg.tol``. The penalised objective
    after every sweep is kept in ``objective_trace``.
    """
    x, y = _check_xy(x, y)
    n_obj, n_feat = x.shape
    max_iter = cfg.max_iter or 1000
    beta = np.zeros(n_feat)
    v = np.full(n_obj, 1.0 / n_obj)
    trace = np.full(max_iter, np.nan)
    b0, n_it, conv = _cd.weighted_enet(x, y, v, beta, 0.0, float(cfg.gamma),
                                       float(cfg.alpha), float(cfg.tol), max_iter, trace)
    return GlmModel(b0, beta, Task.REGRESSION, bool(conv), int(n_it), cfg,
                    objective_trace=trace[:n_it])


def fit_logistic_enet(x, y, cfg):
    """Elastic-net logistic regression by iteratively reweighted least squares.

    The quadratic approximation at each outer step is minimised by the same
    coordinate descent as the linear case, with IRLS weights clipped below at
    1e-6. Outer steps are halved until the penalised objective decreases.
    """
    x, y = _check_xy(x, y)
    if not np.all((y == 0) | (y == 1)):
        raise SolverError("logistic targets must be 0 or 1")
    if y.min() == y.max():
        raise SolverError("single-class target: both classes must be present")
    n_feat = x.shape[1]
    max_iter = cfg.max_iter or 100
    beta = np.zeros(n_feat)
    ybar = y.mean()
    b0 = math.log(ybar / (1 - ybar))
    trace = np.full(max_iter, np.nan)
    b0, n_it, conv = _cd.logistic_enet(x, y, beta, b0, float(cfg.gamma), float(cfg.alpha),
                                       float(cfg.tol), max_iter, int(cfg.max_inner), trace)
    return GlmModel(b0, beta, Task.CLASSIFICATION, bool(conv), int(n_it), cfg,
                    objective_trace=trace[:n_it])


def fit_enet(x, y, cfg, task):
    if Task.parse(task) is Task.CLASSIFICATION:
        return fit_logistic_enet(x, y, cfg)
    return fit_linear_enet(x, y, cfg)


def penalized_objective(model, x, y):
    """Value of the penalised objective the model was fitted under."""
    cfg = model.config or ElasticNetConfig(0.0, 1.0)
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    w = model.weights
    pen = cfg.gamma * (cfg.alpha * np.abs(w).sum() + 0.5 * (1 - cfg.alpha) * (w @ w))
    eta = model.intercept + x @ w
    if model.task is Task.REGRESSION:
        return 0.5 * np.mean((y - eta) ** 2) + pen
    return np.mean(np.logaddexp(0.0, eta) - y * eta) + pen


def _newton_logistic(x, y, max_iter, tol):
    """Unpenalised logistic regression by Newton's method with step halving."""
    n_obj = x.shape[0]
    a = np.column_stack([np.ones(n_obj), x])
    coef = np.zeros(a.shape[1])
    ybar = y.mean()
    coef[0] = math.log(ybar / (1 - ybar))

    def nll(c):
        eta = a @ c
        return np.sum(np.logaddexp(0.0, eta) - y * eta)

    cur = nll(coef)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(a @ coef)
        grad = a.T @ (y - p)
        hess = (a * (p * (1 - p))[:, None]).T @ a
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(hess, grad, rcond=None)[0]
        t = 1.0
        new = nll(coef + step)
        while new > cur and t > 1e-10:
            t *= 0.5
            new = nll(coef + t * step)
        if new > cur:
            converged = True
            break
        coef = coef + t * step
        done = cur - new < tol * (1 + abs(new)) and np.max(np.abs(t * step)) < 1e3 * tol
        cur = new
        if done:
            converged = True
            break
    return coef, it, converged


def fit_unpenalized(x, y, task, max_iter=25, tol=1e-10):
    """Ordinary least squares or maximum-likelihood logistic regression.

    This is the downstream model refit on selected features. For logistic
    regression Newton's method runs for at most ``max_iter`` steps; on
    linearly separable data the likelihood has no maximiser, so the capped
    iterate is returned with ``separable=True``.
    """
    task = Task.parse(task)
    x, y = _check_xy(x, y)
    n_obj = x.shape[0]
    if task is Task.REGRESSION:
        a = np.column_stack([np.ones(n_obj), x])
        coef = np.linalg.lstsq(a, y, rcond=None)[0]
        return GlmModel(coef[0], coef[1:], task, True, 1)
    if y.min() == y.max():
        raise SolverError("single-class target: both classes must be present")
    coef, n_it, conv = _newton_logistic(x, y, max_iter, tol)
    eta = coef[0] + x @ coef[1:]
    separable = bool(np.all((eta > 0) == (y == 1)))
    return GlmModel(coef[0], coef[1:], task, conv and not separable, n_it,
                    separable=separable)


def predict(model, x):
    """Point predictions (regression) or class-1 probabilities (classification)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.weights.shape[0]:
        raise SolverError(f"dimension mismatch: x has shape {x.shape}, model has "
                          f"{model.weights.shape[0]} weights")
    eta = model.intercept + x @ model.weights
    if model.task is Task.REGRESSION:
        return eta
    return expit(eta)


def predict_labels(model, x, threshold=0.5):
    """Hard class labels: 1 where the class-1 probability is >= threshold."""
    if model.task is not Task.CLASSIFICATION:
        raise SolverError("class labels are only defined for classification models")
    return (predict(model, x) >= threshold).astype(float)


def log_likelihood(model, x, y):
    """Maximised log-likelihood up to model-independent constants.

    Regression uses the profile Gaussian likelihood, ``-I/2 * log(SSE/I)``;
    classification the Bernoulli likelihood.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    eta = model.intercept + x @ model.weights
    if model.task is Task.REGRESSION:
        sse = float(np.sum((y - eta) ** 2))
        if sse == 0.0:
            return math.inf
        return -0.5 * len(y) * math.log(sse / len(y))
    return -float(np.sum(np.logaddexp(0.0, eta) - y * eta))


def bic(model, x, y, rho=None):
    """Bayesian information criterion ``-2 log L + rho * log(I)``.

    ``rho`` defaults to the number of nonzero weights plus one for the
    intercept. A regression model with zero residual returns ``-inf`` and
    warns.
    """
    y = np.asarray(y, float)
    ll = log_likelihood(model, x, y)
    if ll == math.inf:
        warnings.warn("perfect fit (SSE = 0): BIC is -inf", RuntimeWarning, stacklevel=2)
        return -math.inf
    if rho is None:
        rho = model.n_nonzero + 1
    return -2.0 * ll + rho * math.log(len(y))
