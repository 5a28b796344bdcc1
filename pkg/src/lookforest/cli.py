"""Command-line entry point: synth | train | predict | importance | backtest | heatmap.

Configuration comes from an INI file (key-value with sections, validated
against a fixed schema; unknown sections or keys are rejected) and can be
overridden by flags.  All randomness flows from one master seed; every
subcommand is bit-reproducible across runs and worker counts.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import backtest as backtest_mod
from . import finance, forest as forest_mod, synthgen
from .backtest import StrategyParams, WindowPlan, DEFAULT_STRATEGIES
from .dataset import LabeledDataset, load_feature_csv
from .forest import ForestParams
from .tree import TreeParams, GREEDY, LOOKAHEAD, SQRT, LOG2, ALL
from .tuning import ParamGrid


class ConfigError(ValueError):
    pass


_SCHEMA = {
    "run": {"seed"},
    "synth": {
        "rho_values",
        "n_samples",
        "n_noise",
        "n_linear",
        "beta",
        "n_repeats",
        "classifiers",
        "n_folds",
        "train_fraction",
    },
    "grid.lrf": {"max_depth", "min_samples_leaf", "feature_subset_rule", "n_buckets", "n_trees"},
    "grid.grf": {"max_depth", "min_samples_leaf", "feature_subset_rule", "n_buckets", "n_trees"},
    "grid.gdt": {"max_depth", "min_samples_leaf", "feature_subset_rule", "n_buckets", "n_trees"},
    "strategy.lookahead": {
        "theta_grid",
        "max_depth",
        "min_samples_leaf",
        "feature_subset_rule",
        "n_buckets",
        "n_trees",
    },
    "strategy.greedy": {
        "theta_grid",
        "max_depth",
        "min_samples_leaf",
        "feature_subset_rule",
        "n_buckets",
        "n_trees",
    },
    "window": {"is_len", "cv_len", "os_len", "step"},
}


def _ints(text):
    return tuple(int(v) for v in text.replace(",", " ").split())


def _floats(text):
    return tuple(float(v) for v in text.replace(",", " ").split())


def _words(text):
    return tuple(text.replace(",", " ").split())


@dataclass
class RunConfig:
    seed: int = 0
    rho_values: tuple = (0.5, 0.65, 1.0)
    n_samples: int = 2000
    n_noise: int = 6
    n_linear: int = 0
    beta: float = 0.05
    n_repeats: int = 20
    classifiers: tuple = synthgen.CLASSIFIERS
    n_folds: int = 5
    train_fraction: float = 0.75
    grids: dict = field(default_factory=dict)
    window: WindowPlan = field(default_factory=WindowPlan)
    strategies: dict = field(default_factory=lambda: dict(DEFAULT_STRATEGIES))


def _grid_from_section(section) -> ParamGrid:
    kwargs = {}
    for key, parse in (
        ("max_depth", _ints),
        ("min_samples_leaf", _ints),
        ("feature_subset_rule", _words),
        ("n_buckets", _ints),
        ("n_trees", _ints),
    ):
        if key in section:
            kwargs[key] = parse(section[key])
    return ParamGrid(**kwargs)


def load_config(path) -> RunConfig:
    """Parse and validate an INI run configuration."""
    cfg = RunConfig()
    if path is None:
        return cfg
    if not os.path.exists(path):
        raise ConfigError(f"no such config file: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    try:
        if parser.has_section("run"):
            cfg.seed = parser.getint("run", "seed", fallback=cfg.seed)
        if parser.has_section("synth"):
            s = parser["synth"]
            if "rho_values" in s:
                cfg.rho_values = _floats(s["rho_values"])
            cfg.n_samples = s.getint("n_samples", cfg.n_samples)
            cfg.n_noise = s.getint("n_noise", cfg.n_noise)
            cfg.n_linear = s.getint("n_linear", cfg.n_linear)
            cfg.beta = s.getfloat("beta", cfg.beta)
            cfg.n_repeats = s.getint("n_repeats", cfg.n_repeats)
            if "classifiers" in s:
                cfg.classifiers = _words(s["classifiers"])
            cfg.n_folds = s.getint("n_folds", cfg.n_folds)
            cfg.train_fraction = s.getfloat("train_fraction", cfg.train_fraction)
        for name in synthgen.CLASSIFIERS:
            section = f"grid.{name}"
            if parser.has_section(section):
                cfg.grids[name] = _grid_from_section(parser[section])
        if parser.has_section("window"):
            w = parser["window"]
            cfg.window = WindowPlan(
                is_len=w.getint("is_len", WindowPlan.is_len),
                cv_len=w.getint("cv_len", WindowPlan.cv_len),
                os_len=w.getint("os_len", WindowPlan.os_len),
                step=w.getint("step", WindowPlan.step),
            )
        for mode in (LOOKAHEAD, GREEDY):
            section = f"strategy.{mode}"
            if parser.has_section(section):
                s = parser[section]
                theta = (
                    _floats(s["theta_grid"])
                    if "theta_grid" in s
                    else DEFAULT_STRATEGIES[mode].theta_grid
                )
                grid_keys = {k: v for k, v in s.items() if k != "theta_grid"}
                grid = (
                    _grid_from_section(grid_keys)
                    if grid_keys
                    else DEFAULT_STRATEGIES[mode].forest_grid
                )
                cfg.strategies[mode] = StrategyParams(
                    theta_grid=theta, forest_grid=grid
                )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config value: {exc}") from None
    bad = [c for c in cfg.classifiers if c not in synthgen.CLASSIFIERS]
    if bad:
        raise ConfigError(f"unknown classifier {bad[0]!r}")
    for rho in cfg.rho_values:
        if not 0.5 <= rho <= 1.0:
            raise ConfigError(f"rho {rho} outside [0.5, 1]")
    return cfg


def _write_json(path, doc):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    template = synthgen.SynthConfig(
        n_samples=cfg.n_samples,
        n_noise=cfg.n_noise,
        n_linear=cfg.n_linear,
        beta=cfg.beta,
        seed=cfg.seed,
    )
    result = synthgen.run_sweep(
        cfg.rho_values,
        template,
        classifiers=cfg.classifiers,
        n_repeats=cfg.n_repeats,
        grids=cfg.grids,
        n_folds=cfg.n_folds,
        train_fraction=cfg.train_fraction,
        n_jobs=args.jobs,
    )
    synthgen.sweep_to_csv(result, os.path.join(args.out_dir, "sweep.csv"))
    _write_json(
        os.path.join(args.out_dir, "sweep_summary.json"),
        synthgen.sweep_summary(result),
    )
    print(f"wrote sweep.csv and sweep_summary.json to {args.out_dir}")
    return 0


def _tree_params_from_args(args) -> TreeParams:
    return TreeParams(
        max_depth=args.max_depth,
        min_samples_leaf=args.min_samples_leaf,
        feature_subset_rule=args.rule,
        n_buckets=args.buckets,
        mode=args.mode,
    )


def cmd_train(args) -> int:
    data = load_feature_csv(args.data, args.label_column)
    params = ForestParams(
        n_trees=args.trees,
        tree=_tree_params_from_args(args),
        bootstrap=not args.no_bootstrap,
        seed=args.seed if args.seed is not None else 0,
    )
    model = forest_mod.fit(data, params, n_jobs=args.jobs)
    path = os.path.join(args.out_dir, "model.json")
    forest_mod.save_forest(model, path)
    print(f"trained {params.n_trees} {params.tree.mode} trees -> {path}")
    return 0


def cmd_predict(args) -> int:
    model = forest_mod.load_forest(args.model)
    data = load_feature_csv(args.data, args.label_column)
    if tuple(data.feature_names) != model.feature_names:
        raise forest_mod.ForestError(
            f"feature schema mismatch: model expects {list(model.feature_names)}"
        )
    p = forest_mod.predict_proba(model, data.features)
    labels = forest_mod.classify(model, data.features)
    path = os.path.join(args.out_dir, "predictions.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "p_plus", "label"])
        for i, (pi, li) in enumerate(zip(p, labels)):
            writer.writerow([i, repr(float(pi)), int(li)])
    print(f"wrote {len(p)} predictions -> {path}")
    return 0


def cmd_importance(args) -> int:
    model = forest_mod.load_forest(args.model)
    report = forest_mod.feature_importance(model)
    path = os.path.join(args.out_dir, "importance.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "importance"])
        for name, freq in zip(report.feature_names, report.frequencies):
            writer.writerow([name, repr(float(freq))])
    print(f"wrote importance -> {path}")
    return 0


def _write_equity_csv(path, dates, curve):
    eq = curve.equity()[1:]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "position", "daily_return", "equity"])
        for date, pos, ret, e in zip(dates, curve.positions, curve.returns, eq):
            writer.writerow([date.isoformat(), int(pos), repr(float(ret)), repr(float(e))])


def cmd_backtest(args) -> int:
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    bars = finance.load_ohlcv(args.ohlcv)
    curves = {}
    dates = None
    for mode in (LOOKAHEAD, GREEDY):
        curve, dates = backtest_mod.run_walkforward_bars(
            bars, cfg.window, cfg.strategies[mode], mode, seed, n_jobs=args.jobs
        )
        curves[mode] = curve
    closes = np.array([b.close for b in bars])
    first = finance.WARMUP_BARS
    fwd = closes[first + 1 :] / closes[first:-1] - 1.0
    curves["buyhold"] = backtest_mod.buy_and_hold(fwd, curves[LOOKAHEAD].days)
    report = {}
    for name, curve in curves.items():
        fname = f"equity_{name}.csv"
        _write_equity_csv(os.path.join(args.out_dir, fname), dates, curve)
        report[name] = backtest_mod.perf_report(curve).as_dict()
    _write_json(os.path.join(args.out_dir, "backtest_report.json"), report)
    print(f"wrote equity curves and backtest_report.json to {args.out_dir}")
    return 0


def cmd_heatmap(args) -> int:
    model = forest_mod.load_forest(args.model)
    data = load_feature_csv(args.data, args.label_column)
    names = list(model.feature_names)
    fi, fj = (part.strip() for part in args.features.split(","))
    if fi not in names or fj not in names:
        raise backtest_mod.BacktestError(f"unknown feature in pair {args.features!r}")
    if fi == fj:
        raise backtest_mod.BacktestError("feature paired with itself")
    pairs = forest_mod.feature_pair_frequency(model)
    if pairs:
        print("top feature pairs by joint split frequency:")
        for (a, b), freq in pairs[:5]:
            print(f"  {names[a]},{names[b]}: {freq:.3f}")
    xs, ys, grid = backtest_mod.heatmap_grid(
        model, data, names.index(fi), names.index(fj), args.resolution
    )
    path = os.path.join(args.out_dir, "heatmap.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([fi, fj, "p_plus"])
        for yi, yv in enumerate(ys):
            for xi, xv in enumerate(xs):
                writer.writerow([repr(float(xv)), repr(float(yv)), repr(float(grid[yi, xi]))])
    print(f"wrote {len(xs) * len(ys)} heatmap cells -> {path}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(p):
    p.add_argument("--config", default=None, help="INI configuration file")
    p.add_argument("--seed", type=int, default=None, help="master seed override")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers")
    p.add_argument("--out-dir", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lookforest",
        description="Greedy vs stepwise-lookahead decision forests: "
        "synthetic XOR experiments and a walk-forward trading backtest.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="run the accuracy-vs-rho sweep")
    _add_common(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="fit a forest on a feature CSV")
    _add_common(p)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--mode", choices=[GREEDY, LOOKAHEAD], default=GREEDY)
    p.add_argument("--trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=2)
    p.add_argument("--min-samples-leaf", type=int, default=1)
    p.add_argument("--rule", choices=[SQRT, LOG2, ALL], default=SQRT)
    p.add_argument("--buckets", type=int, default=30)
    p.add_argument("--no-bootstrap", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score a feature CSV with a saved model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("importance", help="relative split counts of a saved model")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_importance)

    p = sub.add_parser("backtest", help="walk-forward long/short backtest on OHLCV")
    _add_common(p)
    p.add_argument("--ohlcv", required=True)
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("heatmap", help="P+ heatmap over a feature pair")
    _add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--label-column", default="label")
    p.add_argument("--features", required=True, help="comma-separated feature pair")
    p.add_argument("--resolution", type=int, default=50)
    p.set_defaults(func=cmd_heatmap)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    os.makedirs(args.out_dir, exist_ok=True)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
