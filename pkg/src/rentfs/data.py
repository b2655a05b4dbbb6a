"""Datasets, CSV ingestion, standardization, splitting and subsampling.

Every random draw in the package goes through a ``numpy.random.PCG64``
generator. Derived seeds are produced by :func:`derive_seed`, which hashes
``(master_seed, stream_id, *keys)`` with ``numpy.random.SeedSequence`` so
that the same master seed reproduces the same draws on every platform.
"""

from __future__ import annotations

import csv
import enum
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import DataError

__all__ = [
    "Task",
    "Dataset",
    "ScalingParams",
    "SplitPair",
    "Subsample",
    "derive_seed",
    "make_rng",
    "load_csv",
    "save_csv",
    "fit_standardizer",
    "apply_standardizer",
    "invert_standardizer",
    "stratified_split",
    "draw_subsample",
    "make_synthetic",
]

# Stream ids for derive_seed. Changing any value changes every seeded result.
STREAM_SPLIT = 1
STREAM_SUBSAMPLE = 2
STREAM_VS1 = 3
STREAM_VS2 = 4
STREAM_REPEAT = 5
STREAM_SYNTHETIC = 6


class Task(str, enum.Enum):
    CLASSIFICATION = "classification"
    REGRESSION = "regression"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise DataError(f"unknown task {value!r}; expected "
                            "'classification' or 'regression'") from None


def derive_seed(master_seed, stream_id, *keys):
    """Return a 64-bit seed derived from ``(master_seed, stream_id, *keys)``."""
    entropy = [int(master_seed), int(stream_id), *(int(k) for k in keys)]
    if any(e < 0 for e in entropy):
        raise DataError("seeds and stream keys must be non-negative integers")
    state = np.random.SeedSequence(entropy).generate_state(1, dtype=np.uint64)
    return int(state[0])


def make_rng(seed):
    """PCG64 generator seeded with an unsigned integer."""
    if int(seed) < 0:
        raise DataError("seed must be a non-negative integer")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Object-by-feature matrix with its target vector.

    ``x`` has one row per object and one column per feature. Arrays are
    copied and made read-only on construction.
    """

    x: np.ndarray
    y: np.ndarray
    feature_names: tuple
    task: Task

    def __post_init__(self):
        x = _frozen(self.x)
        y = _frozen(self.y)
        if x.ndim != 2:
            raise DataError("x must be a 2-d matrix")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise DataError(f"target length {y.shape[0] if y.ndim == 1 else y.shape} "
                            f"does not match row count {x.shape[0]}")
        if x.shape[1] < 1:
            raise DataError("dataset needs at least one feature")
        if x.shape[0] < 2:
            raise DataError("dataset needs at least two objects")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite values")
        names = tuple(str(n) for n in self.feature_names)
        if len(names) != x.shape[1]:
            raise DataError("feature_names length does not match column count")
        task = Task.parse(self.task)
        if task is Task.CLASSIFICATION and not np.all((y == 0) | (y == 1)):
            raise DataError("invalid class label: classification targets must be 0 or 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "task", task)

    @property
    def n_objects(self):
        return self.x.shape[0]

    @property
    def n_features(self):
        return self.x.shape[1]

    def take(self, rows):
        """Dataset restricted to the given object indices."""
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.x[rows], self.y[rows], self.feature_names, self.task)

    def with_x(self, x, feature_names=None):
        names = self.feature_names if feature_names is None else feature_names
        return Dataset(x, self.y, names, self.task)


@dataclass(frozen=True)
class ScalingParams:
    means: np.ndarray
    stddevs: np.ndarray
    constant: np.ndarray = field(default=None)

    def __post_init__(self):
        means = _frozen(self.means)
        stds = _frozen(self.stddevs)
        if means.shape != stds.shape or means.ndim != 1:
            raise DataError("means and stddevs must be vectors of equal length")
        if np.any(stds <= 0):
            raise DataError("standard deviations must be strictly positive")
        const = (np.zeros(means.shape, bool) if self.constant is None
                 else _frozen(self.constant, bool))
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stddevs", stds)
        object.__setattr__(self, "constant", const)


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    train_index: np.ndarray
    test_index: np.ndarray


@dataclass(frozen=True)
class Subsample:
    train_k: np.ndarray
    val_k: np.ndarray


# ---------------------------------------------------------------- CSV I/O

def load_csv(path, target_column, task):
    """Read a comma-separated file with a header row into a :class:`Dataset`.

    Parameters
    ----------
    path : str or os.PathLike
        UTF-8 CSV file; ``.`` decimal point, ``,`` delimiter.
    target_column : str or int
        Column name, or zero-based column index.
    task : Task or str

    Raises
    ------
    DataError
        With a distinct message for a missing file, missing target column,
        non-numeric cell, non-finite cell or invalid class label.
    """
    task = Task.parse(task)
    if not os.path.isfile(path):
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"empty file (header row required): {path}")
    header = [h.strip() for h in rows[0]]
    if isinstance(target_column, int) and not isinstance(target_column, bool):
        if not 0 <= target_column < len(header):
            raise DataError(f"missing target column: index {target_column}")
        t_idx = target_column
    else:
        if str(target_column) not in header:
            raise DataError(f"missing target column: {target_column!r}")
        t_idx = header.index(str(target_column))

    values = np.empty((len(rows) - 1, len(header)))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataError(f"line {r}: expected {len(header)} cells, got {len(row)}")
        for c, cell in enumerate(row):
            try:
                v = float(cell)
            except ValueError:
                raise DataError(f"non-numeric cell at line {r}, column "
                                f"{header[c]!r}: {cell!r}") from None
            if not math.isfinite(v):
                raise DataError(f"non-finite cell at line {r}, column {header[c]!r}: {cell!r}")
            values[r - 2, c] = v

    y = values[:, t_idx]
    if task is Task.CLASSIFICATION and not np.all((y == 0) | (y == 1)):
        bad = y[(y != 0) & (y != 1)][0]
        raise DataError(f"invalid class label {bad:g}: classification targets must be 0 or 1")
    keep = [c for c in range(len(header)) if c != t_idx]
    return Dataset(values[:, keep], y, [header[c] for c in keep], task)


def save_csv(data, path, target_column="target"):
    """Write a dataset as CSV with the target as the last column."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([*data.feature_names, target_column])
        for xi, yi in zip(data.x, data.y):
            w.writerow([repr(float(v)) for v in xi] + [repr(float(yi))])


# -------------------------------------------------------- standardization

def fit_standardizer(train, policy="keep"):
    """Per-feature mean and sample standard deviation (divisor I-1).

    ``policy`` controls constant features: ``"keep"`` forces their stddev to
    1, flags them and warns; ``"reject"`` raises :class:`DataError`.
    """
    if policy not in ("keep", "reject"):
        raise DataError(f"unknown constant-feature policy {policy!r}")
    means = train.x.mean(axis=0)
    stds = train.x.std(axis=0, ddof=1)
    constant = stds == 0
    if np.any(constant):
        names = [train.feature_names[j] for j in np.flatnonzero(constant)]
        if policy == "reject":
            raise DataError(f"constant feature(s): {names}")
        warnings.warn(f"constant feature(s) kept with stddev 1: {names}", stacklevel=2)
        stds = np.where(constant, 1.0, stds)
    return ScalingParams(means, stds, constant)


def apply_standardizer(data, params):
    if data.n_features != params.means.shape[0]:
        raise DataError(f"dimension mismatch: data has {data.n_features} columns, "
                        f"scaling params have {params.means.shape[0]}")
    return data.with_x((data.x - params.means) / params.stddevs)


def invert_standardizer(data, params):
    if data.n_features != params.means.shape[0]:
        raise DataError("dimension mismatch")
    return data.with_x(data.x * params.stddevs + params.means)


# ------------------------------------------------------------- splitting

def _largest_remainder(counts, total):
    """Integer allocation of ``total`` proportional to ``counts``."""
    counts = np.asarray(counts, dtype=float)
    exact = counts / counts.sum() * total
    alloc = np.floor(exact).astype(int)
    rest = total - alloc.sum()
    order = np.argsort(-(exact - alloc), kind="stable")
    alloc[order[:rest]] += 1
    return alloc


def stratified_split(data, test_fraction, seed):
    """Random train/test split, stratified by class for classification.

    Per-class test counts follow a largest-remainder allocation of
    ``round(I * test_fraction)`` objects, so every class deviates from exact
    proportionality by less than one object.
    """
    if not 0 < test_fraction < 1:
        raise DataError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = data.n_objects
    n_test = int(round(n * test_fraction))
    if n_test < 1 or n_test >= n:
        raise DataError(f"test_fraction {test_fraction} leaves an empty part for {n} objects")
    rng = make_rng(seed)

    if data.task is Task.CLASSIFICATION:
        classes = [np.flatnonzero(data.y == c) for c in (0, 1)]
        sizes = [len(c) for c in classes]
        if min(sizes) < 2:
            raise DataError(f"class with fewer than 2 objects (class sizes {sizes})")
        alloc = _largest_remainder(sizes, n_test)
        test = []
        for members, k in zip(classes, alloc):
            test.append(rng.permutation(members)[:k])
        test_idx = np.sort(np.concatenate(test))
    else:
        test_idx = np.sort(rng.permutation(n)[:n_test])

    mask = np.zeros(n, bool)
    mask[test_idx] = True
    train_idx = np.flatnonzero(~mask)
    return SplitPair(data.take(train_idx), data.take(test_idx), train_idx, test_idx)


def draw_subsample(train_size, fraction_range=(0.5, 0.5), seed_k=0):
    """Draw one ensemble subsample X_train^(k) and its validation complement.

    The subset size is uniform on ``[floor(lo*n), floor(hi*n)]``; indices are
    drawn without replacement. Both index arrays are returned sorted.
    """
    lo, hi = fraction_range
    if not (0 < lo <= hi < 1):
        raise DataError(f"fraction_range must satisfy 0 < lo <= hi < 1, got {fraction_range}")
    n = int(train_size)
    lo_n, hi_n = math.floor(lo * n), math.floor(hi * n)
    if lo_n < 1 or hi_n > n - 1:
        raise DataError(f"fraction_range {fraction_range} gives an empty training or "
                        f"validation part for {n} objects")
    rng = make_rng(seed_k)
    size = int(rng.integers(lo_n, hi_n + 1))
    perm = rng.permutation(n)
    return Subsample(np.sort(perm[:size]), np.sort(perm[size:]))


# -------------------------------------------------------------- synthetic

def make_synthetic(task, n_objects, n_features, n_informative, noise=1.0, seed=0):
    """Gaussian design with a sparse linear signal.

    Features are i.i.d. standard normal. The informative weights have
    magnitude uniform on [1, 2] and random sign. For regression the target is
    ``x @ w + noise * eps``; for classification it is 1 where the logistic
    transform of that score is at least 0.5 (i.e. score >= 0).

    Returns
    -------
    data : Dataset
    informative : ndarray of int
        Sorted indices of the informative features.
    """
    task = Task.parse(task)
    if n_informative > n_features:
        raise DataError(f"n_informative ({n_informative}) exceeds n_features ({n_features})")
    if noise < 0:
        raise DataError("noise must be non-negative")
    rng = make_rng(seed)
    x = rng.standard_normal((n_objects, n_features))
    informative = np.sort(rng.choice(n_features, size=n_informative, replace=False))
    w = np.zeros(n_features)
    w[informative] = rng.uniform(1.0, 2.0, n_informative) * rng.choice([-1.0, 1.0], n_informative)
    score = x @ w + noise * rng.standard_normal(n_objects)
    if task is Task.REGRESSION:
        y = score
    else:
        y = (score >= 0).astype(float)
    width = len(str(n_features - 1))
    names = [f"f{j:0{width}d}" for j in range(n_features)]
    return Dataset(x, y, names, task), informative
