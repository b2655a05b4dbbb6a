"""Command-line pipeline: ``rentfs {select,stability,validate,posthoc,synth}``.

A run is described by a TOML file of flat ``key = value`` pairs whose keys
are the fields of :class:`RunConfig`; every key can be overridden on the
command line with ``--key value`` (lists take several values, booleans take
``true``/``false``). ``master_seed`` is mandatory. Every random draw is
derived from it through :func:`rentfs.data.derive_seed` with the stream ids
defined in :mod:`rentfs.data`:

=====================  ======================================
stream                 keys
=====================  ======================================
STREAM_SPLIT (1)       train/test split
STREAM_SUBSAMPLE (2)   model ``k``, retry ``attempt``
STREAM_VS1 (3)         random feature subsets
STREAM_VS2 (4)         test-label permutations
STREAM_REPEAT (5)      repeat ``r`` of a stability study
=====================  ======================================

The subsample stream is seeded with the run seed (``master_seed``, or the
derived repeat seed in stability studies).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .data import (STREAM_REPEAT, STREAM_SPLIT, Task, apply_standardizer, derive_seed,
                   fit_standardizer, load_csv, make_synthetic, save_csv, stratified_split)
from .exceptions import RentError
from .glm import ElasticNetConfig, fit_unpenalized, predict
from .hyper import CutoffGrid, EnetGrid, search_cutoffs, search_enet, write_records_csv
from .metrics import metric_rows, nogueira_stability
from .posthoc import export_plot_data, pca_fit, summarize_objects
from .rent import (Cutoffs, EnsembleOutput, apply_selection, score_features, select,
                   train_ensemble)
from .study import vs1, vs2

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

__all__ = ["RunConfig", "load_config", "cmd_select", "cmd_stability", "cmd_validate",
           "cmd_posthoc", "cmd_synth", "main"]

log = logging.getLogger("rentfs")

SCHEMA_VERSION = 1
_T12 = tuple(CutoffGrid().t1_values)


@dataclass
class RunConfig:
    master_seed: int | None = None
    out_dir: str = "rent_out"
    # data
    train_csv: str | None = None
    test_csv: str | None = None
    target_column: str = "target"
    task: str = "classification"
    test_fraction: float | None = None
    constant_policy: str = "keep"
    synth_n_objects: int | None = None
    synth_n_features: int = 1000
    synth_n_informative: int = 10
    synth_noise: float = 1.0
    synth_seed: int = 0
    # ensemble
    k_models: int = 100
    fraction_range: tuple = (0.5, 0.5)
    tol: float = 1e-5
    # step 1: grid, or fixed values when both gamma and alpha are set
    gammas: tuple = (0.01, 0.1, 1.0)
    alphas: tuple = (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)
    gamma: float | None = None
    alpha: float | None = None
    # step 2: grid, or fixed values when t1, t2 and t3 are set
    t1_values: tuple = _T12
    t2_values: tuple = _T12
    t3_values: tuple = (0.9, 0.95, 0.975, 0.99)
    t1: float | None = None
    t2: float | None = None
    t3: float | None = None
    # studies and post-hoc
    ell: int = 100
    run_vs1: bool = True
    run_vs2: bool = True
    run_posthoc: bool = True
    standardize_pca: bool = False
    n_components: int = 2
    # stability
    n_repeats: int = 30
    vary_seed: bool = True
    threads: int = 1

    def validate(self):
        if self.master_seed is None:
            raise RentError("master_seed is mandatory")
        if int(self.master_seed) < 0:
            raise RentError("master_seed must be a non-negative integer")
        Task.parse(self.task)
        self.fraction_range = tuple(float(v) for v in self.fraction_range)
        if len(self.fraction_range) != 2:
            raise RentError("fraction_range takes two values (lo, hi)")
        for name in ("gammas", "alphas", "t1_values", "t2_values", "t3_values"):
            setattr(self, name, tuple(float(v) for v in getattr(self, name)))
        return self


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_bool(text):
    if isinstance(text, bool):
        return text
    v = str(text).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def _scalar_parser(type_str):
    if "bool" in type_str:
        return _parse_bool
    if "int" in type_str:
        return int
    if "float" in type_str:
        return float
    return str


def load_config(path=None, overrides=None):
    """Build a :class:`RunConfig` from an optional TOML file plus overrides."""
    values = {}
    if path is not None:
        if not os.path.isfile(path):
            raise RentError(f"config file not found: {path}")
        with open(path, "rb") as fh:
            try:
                values = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise RentError(f"invalid config file {path}: {exc}") from exc
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(values) - set(_FIELD_TYPES))
    if unknown:
        raise RentError(f"unknown config key(s): {', '.join(unknown)}")
    return RunConfig(**values).validate()


# ------------------------------------------------------------------ helpers

class _Stage:
    """Context manager that prefixes errors with the pipeline stage name."""

    def __init__(self, name, timing):
        self.name = name
        self.timing = timing

    def __enter__(self):
        log.info("stage %s", self.name)
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timing[self.name] = self.timing.get(self.name, 0.0) + time.perf_counter() - self.t0
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


class StageError(RentError):
    def __init__(self, stage, exc):
        super().__init__(f"[{stage}] {exc}")
        self.stage = stage


def _load_data(cfg):
    task = Task.parse(cfg.task)
    split_seed = derive_seed(cfg.master_seed, STREAM_SPLIT)
    if cfg.train_csv:
        train = load_csv(cfg.train_csv, cfg.target_column, task)
        if cfg.test_csv:
            return train, load_csv(cfg.test_csv, cfg.target_column, task)
        if cfg.test_fraction:
            sp = stratified_split(train, cfg.test_fraction, split_seed)
            return sp.train, sp.test
        raise RentError("no evaluation data: set test_csv or test_fraction")
    if cfg.synth_n_objects:
        data, _ = make_synthetic(task, cfg.synth_n_objects, cfg.synth_n_features,
                                 cfg.synth_n_informative, cfg.synth_noise, cfg.synth_seed)
        if not cfg.test_fraction:
            raise RentError("no evaluation data: synthetic input needs test_fraction")
        sp = stratified_split(data, cfg.test_fraction, split_seed)
        return sp.train, sp.test
    raise RentError("no input data: set train_csv or synth_n_objects")


def _prepare(cfg, timing):
    with _Stage("load", timing):
        train, test = _load_data(cfg)
        if test.n_features != train.n_features:
            raise RentError("train and test have different feature counts")
    with _Stage("standardize", timing):
        params = fit_standardizer(train, cfg.constant_policy)
        return train, apply_standardizer(train, params), apply_standardizer(test, params)


def _step1(cfg, train, timing):
    with _Stage("search_enet", timing):
        if cfg.gamma is not None and cfg.alpha is not None:
            return cfg.gamma, cfg.alpha, []
        return search_enet(train, EnetGrid(cfg.gammas, cfg.alphas), tol=cfg.tol,
                           n_jobs=cfg.threads)


def _rent_run(cfg, train, enet, seed, timing):
    with _Stage("ensemble", timing):
        ens = train_ensemble(train, cfg.k_models, enet, cfg.fraction_range, seed,
                             n_jobs=cfg.threads)
    with _Stage("search_cutoffs", timing):
        if None not in (cfg.t1, cfg.t2, cfg.t3):
            cutoffs, records = Cutoffs(cfg.t1, cfg.t2, cfg.t3), []
        else:
            cutoffs, records = search_cutoffs(
                ens, train, CutoffGrid(cfg.t1_values, cfg.t2_values, cfg.t3_values),
                n_jobs=cfg.threads)
    with _Stage("select", timing):
        result = select(score_features(ens.weight_matrix), cutoffs)
        if not result.selected:
            raise RentError("no features selected")
    return ens, cutoffs, records, result


def _downstream(train, test, selected):
    cols = list(selected)
    model = fit_unpenalized(train.x[:, cols], train.y, train.task)
    y_hat = predict(model, test.x[:, cols])
    return model, y_hat, metric_rows(test.y, y_hat, train.task)


def _headline(rows, task):
    want = "MCC" if Task.parse(task) is Task.CLASSIFICATION else "R2"
    return next(r["value"] for r in rows if r["metric"] == want)


def _dump(obj, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
        fh.write("\n")


def _write_matrix(b, path, names):
    np.savetxt(path, b, delimiter=",", header=",".join(names), comments="", fmt="%.17g")


def _read_json(path, what):
    if not os.path.isfile(path):
        raise RentError(f"no {what} found: {path}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _posthoc(cfg, train, ens, selected, out_dir):
    x_sel = apply_selection(train, selected).x
    summaries = summarize_objects(ens, train.y)
    n_max = min(x_sel.shape[0] - 1, x_sel.shape[1])
    pca = pca_fit(x_sel, min(cfg.n_components, n_max), standardize=cfg.standardize_pca)
    names = [train.feature_names[j] for j in selected]
    export_plot_data(out_dir, summaries, pca, names)
    return {"n_components": pca.component_count,
            "explained_variance_ratio": pca.explained_variance_ratio.tolist(),
            "n_never_validated": sum(s.never_validated for s in summaries)}


def _studies(cfg, train, test, selected, observed, out_dir, timing):
    out = {}
    if cfg.run_vs1:
        with _Stage("vs1", timing):
            rep = vs1(train, test, len(selected), cfg.ell, cfg.master_seed, observed=observed)
            _dump(rep.to_dict(), os.path.join(out_dir, "vs1.json"))
            out["vs1"] = {k: v for k, v in rep.to_dict().items() if k != "null_scores"}
    if cfg.run_vs2:
        with _Stage("vs2", timing):
            rep = vs2(train, test, selected, cfg.ell, cfg.master_seed)
            _dump(rep.to_dict(), os.path.join(out_dir, "vs2.json"))
            out["vs2"] = {k: v for k, v in rep.to_dict().items() if k != "null_scores"}
    return out


# ----------------------------------------------------------------- commands

def cmd_select(cfg):
    """Full pipeline; writes artifacts to ``cfg.out_dir`` and returns the report.

    Order: standardise on train, step-1 grid, ensemble, step-2 grid,
    selection, unpenalised refit on the selected training columns, test
    evaluation, then the validation studies and post-hoc exports per flags.
    """
    cfg.validate()
    timing = {}
    t_start = time.perf_counter()
    os.makedirs(cfg.out_dir, exist_ok=True)
    raw_train, train, test = _prepare(cfg, timing)
    gamma, alpha, enet_records = _step1(cfg, train, timing)
    enet = ElasticNetConfig(gamma, alpha, tol=cfg.tol)
    ens, cutoffs, cut_records, result = _rent_run(cfg, train, enet, cfg.master_seed, timing)
    selected = list(result.selected)
    with _Stage("evaluate", timing):
        model, _, rows = _downstream(train, test, selected)
        observed = _headline(rows, train.task)

    studies = _studies(cfg, train, test, selected, observed, cfg.out_dir, timing)
    posthoc = None
    if cfg.run_posthoc:
        with _Stage("posthoc", timing):
            posthoc = _posthoc(cfg, train, ens, selected, cfg.out_dir)

    with _Stage("write", timing):
        scores = result.scores
        names = train.feature_names
        report = {
            "schema_version": SCHEMA_VERSION,
            "rentfs_version": __version__,
            "command": "select",
            "config": dataclasses.asdict(cfg),
            "data": {"task": train.task.value, "n_train": train.n_objects,
                     "n_test": test.n_objects, "n_features": train.n_features},
            "hyperparameters": {
                "gamma": gamma, "alpha": alpha, **dict(zip(("t1", "t2", "t3"),
                                                           cutoffs.as_tuple())),
                "enet_search": [r.row() for r in enet_records],
                "cutoff_search": [r.row() for r in cut_records],
            },
            "ensemble": {"k_models": cfg.k_models,
                         "n_not_converged": int((~ens.converged).sum())},
            "selection": {
                "delta": result.delta,
                "selected": selected,
                "selected_names": [names[j] for j in selected],
                "features": {names[j]: {"index": j, "tau1": float(scores.tau1[j]),
                                        "tau2": float(scores.tau2[j]),
                                        "tau3": float(scores.tau3[j]),
                                        "mean": float(scores.mean_mu[j]),
                                        "variance": float(scores.var_sigma2[j])}
                             for j in selected},
            },
            "downstream_model": {"intercept": model.intercept,
                                 "weights": model.weights.tolist(),
                                 "separable": model.separable},
            "test_metrics": rows,
            "studies": studies,
            "posthoc": posthoc,
        }
        out = cfg.out_dir
        _write_matrix(ens.weight_matrix.b, os.path.join(out, "B.csv"), names)
        write_records_csv(enet_records, os.path.join(out, "search_enet.csv"))
        write_records_csv(cut_records, os.path.join(out, "search_cutoffs.csv"))
        with open(os.path.join(out, "ensemble.json"), "w", encoding="utf-8") as fh:
            fh.write(ens.to_json())
        report["timing"] = {**timing, "total": time.perf_counter() - t_start}
        _dump(report, os.path.join(out, "report.json"))
    return report


def _band(v):
    return {"mean": float(np.mean(v)), "q2.5": float(np.quantile(v, 0.025)),
            "q97.5": float(np.quantile(v, 0.975))}


def cmd_stability(cfg, n_repeats=None):
    """Repeat RENT on fixed training data and measure selection stability.

    Step 1 is deterministic on fixed data and runs once. Repeat ``r`` uses
    the run seed ``derive_seed(master_seed, STREAM_REPEAT, r)``, or
    ``master_seed`` itself when ``vary_seed`` is false.
    """
    cfg.validate()
    n_repeats = cfg.n_repeats if n_repeats is None else n_repeats
    if n_repeats < 2:
        raise RentError("n_repeats must be >= 2")
    timing = {}
    t_start = time.perf_counter()
    os.makedirs(cfg.out_dir, exist_ok=True)
    _, train, test = _prepare(cfg, timing)
    gamma, alpha, _ = _step1(cfg, train, timing)
    enet = ElasticNetConfig(gamma, alpha, tol=cfg.tol)

    z = np.zeros((n_repeats, train.n_features))
    runs = []
    for r in range(n_repeats):
        seed = derive_seed(cfg.master_seed, STREAM_REPEAT, r) if cfg.vary_seed \
            else cfg.master_seed
        try:
            _, cutoffs, _, result = _rent_run(cfg, train, enet, seed, timing)
            with _Stage("evaluate", timing):
                _, _, rows = _downstream(train, test, result.selected)
        except RentError:
            _dump({"completed_runs": runs, "failed_run": r},
                  os.path.join(cfg.out_dir, "stability_partial.json"))
            raise
        z[r, list(result.selected)] = 1
        runs.append({"run": r, "seed": seed, "cutoffs": list(cutoffs.as_tuple()),
                     "selected": list(result.selected),
                     "score": _headline(rows, train.task)})
        log.info("repeat %d: delta=%d score=%.4f", r, result.delta, runs[-1]["score"])

    scores = np.array([run["score"] for run in runs])
    counts = z.sum(axis=1)
    report = {
        "schema_version": SCHEMA_VERSION,
        "rentfs_version": __version__,
        "command": "stability",
        "config": dataclasses.asdict(cfg),
        "n_repeats": n_repeats,
        "k_models": cfg.k_models,
        "gamma": gamma,
        "alpha": alpha,
        "stability": nogueira_stability(z),
        "metric": "MCC" if train.task is Task.CLASSIFICATION else "R2",
        "score": _band(scores),
        "delta": _band(counts),
        "selection_frequency": {train.feature_names[j]: int(z[:, j].sum())
                                for j in np.flatnonzero(z.sum(axis=0))},
        "runs": runs,
    }
    report["timing"] = {**timing, "total": time.perf_counter() - t_start}
    _dump(report, os.path.join(cfg.out_dir, "stability.json"))
    return report


def cmd_validate(cfg):
    """VS1 and VS2 for the features of a previous ``select`` run in ``out_dir``."""
    cfg.validate()
    prior = _read_json(os.path.join(cfg.out_dir, "report.json"), "selection report")
    timing = {}
    _, train, test = _prepare(cfg, timing)
    selected = prior["selection"]["selected"]
    with _Stage("evaluate", timing):
        _, _, rows = _downstream(train, test, selected)
    run = dataclasses.replace(cfg, run_vs1=True, run_vs2=True)
    studies = _studies(run, train, test, selected, _headline(rows, train.task),
                       cfg.out_dir, timing)
    return {"schema_version": SCHEMA_VERSION, "command": "validate",
            "selected": selected,
            "p_values": {k: v["p_value"] for k, v in studies.items()}, **studies}


def cmd_posthoc(cfg):
    """Post-hoc exports from the ensemble artifact of a previous ``select`` run."""
    cfg.validate()
    path = os.path.join(cfg.out_dir, "ensemble.json")
    if not os.path.isfile(path):
        raise RentError(f"no ensemble artifact found in {cfg.out_dir}")
    ens = EnsembleOutput.from_dict(_read_json(path, "ensemble artifact"))
    prior = _read_json(os.path.join(cfg.out_dir, "report.json"), "selection report")
    timing = {}
    _, train, _ = _prepare(cfg, timing)
    if len(ens.object_records) != train.n_objects:
        raise RentError("ensemble artifact does not match the configured training data")
    with _Stage("posthoc", timing):
        return _posthoc(cfg, train, ens, prior["selection"]["selected"], cfg.out_dir)


def cmd_synth(cfg):
    """Write a synthetic dataset as ``train.csv`` and ``test.csv`` in ``out_dir``."""
    cfg.validate()
    if not cfg.synth_n_objects:
        raise RentError("synth_n_objects must be set")
    if not cfg.test_fraction:
        raise RentError("test_fraction must be set")
    data, informative = make_synthetic(cfg.task, cfg.synth_n_objects, cfg.synth_n_features,
                                       cfg.synth_n_informative, cfg.synth_noise,
                                       cfg.synth_seed)
    sp = stratified_split(data, cfg.test_fraction, derive_seed(cfg.master_seed, STREAM_SPLIT))
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {"train": os.path.join(cfg.out_dir, "train.csv"),
             "test": os.path.join(cfg.out_dir, "test.csv")}
    save_csv(sp.train, paths["train"], cfg.target_column)
    save_csv(sp.test, paths["test"], cfg.target_column)
    _dump({"informative": informative.tolist(),
           "informative_names": [data.feature_names[j] for j in informative]},
          os.path.join(cfg.out_dir, "synth_truth.json"))
    return {"command": "synth", "paths": paths, "n_train": sp.train.n_objects,
            "n_test": sp.test.n_objects, "informative": informative.tolist()}


# --------------------------------------------------------------------- main

_COMMANDS = {"select": cmd_select, "stability": cmd_stability, "validate": cmd_validate,
             "posthoc": cmd_posthoc, "synth": cmd_synth}


def _build_parser():
    parser = argparse.ArgumentParser(prog="rentfs", description=__doc__.split("\n")[0])
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="TOML run configuration")
    parser.add_argument("--seed", type=int, help="alias for --master_seed")
    parser.add_argument("--out", help="alias for --out_dir")
    parser.add_argument("--threads", type=int, help="worker threads for model fits")
    parser.add_argument("--verbose", action="store_true")
    keys = parser.add_argument_group("config keys")
    for f in fields(RunConfig):
        if f.name == "threads":
            continue
        t = str(f.type)
        if "tuple" in t:
            keys.add_argument(f"--{f.name}", nargs="+", type=float, metavar="V")
        else:
            keys.add_argument(f"--{f.name}", type=_scalar_parser(t), metavar="V")
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {f.name: getattr(args, f.name, None) for f in fields(RunConfig)}
    overrides["master_seed"] = args.seed if args.seed is not None else overrides["master_seed"]
    overrides["out_dir"] = args.out or overrides["out_dir"]
    overrides["threads"] = args.threads
    try:
        cfg = load_config(args.config, overrides)
        result = _COMMANDS[args.command](cfg)
    except RentError as exc:
        print(f"rentfs {args.command}: error: {exc}", file=sys.stderr)
        return 1
    summary = {k: result[k] for k in ("delta", "stability", "p_values", "paths")
               if isinstance(result, dict) and k in result}
    if args.command == "select":
        summary = {"delta": result["selection"]["delta"],
                   "selected": result["selection"]["selected_names"],
                   "test_metrics": result["test_metrics"]}
    print(json.dumps(summary or result, indent=1))
    return 0


if __name__ == "__main__":
    sys.exit(main())
