"""Walk-forward training, the threshold long/short strategy, and metrics.

The series is tiled chronologically into rolling windows of in-sample (IS),
cross-validation (CV) and out-of-sample (OS) segments, stepped forward by
``step`` days.  Per window: candidate forests fit on IS, the (forest,
threshold) pair with the best Sharpe over the simulated CV segment is
selected, the winner is refit on IS+CV and emits positions for the OS days.
A position at day t is a function of data dated <= t only.

Daily strategy return = position * next-day close-to-close return; long +1,
short -1, flat 0; execution at the close, no transaction costs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset, POS, NEG
from . import forest as forest_mod
from .forest import Forest, ForestParams
from .tree import TreeParams, GREEDY, LOOKAHEAD, SQRT, ALL
from .tuning import ParamGrid

LONG = 1
SHORT = -1
FLAT = 0

TRADING_DAYS_PER_YEAR = 252


class BacktestError(ValueError):
    pass


@dataclass(frozen=True)
class WindowPlan:
    is_len: int = 1000
    cv_len: int = 250
    os_len: int = 75
    step: int = 75

    def __post_init__(self):
        if min(self.is_len, self.cv_len, self.os_len, self.step) < 1:
            raise BacktestError("all window lengths must be positive")

    @property
    def train_len(self) -> int:
        return self.is_len + self.cv_len

    def windows(self, n_days: int):
        """(is_start, cv_start, os_start, os_end) tuples tiling the series.

        The final OS segment may be truncated so OS days cover the series end.
        """
        out = []
        for start in range(0, n_days - self.train_len, self.step):
            os_start = start + self.train_len
            os_end = min(os_start + self.os_len, n_days)
            out.append((start, start + self.is_len, os_start, os_end))
            if os_end == n_days:
                break
        if not out:
            raise BacktestError(
                f"insufficient history: need > {self.train_len} days, got {n_days}"
            )
        return out


@dataclass(frozen=True)
class StrategyParams:
    theta_grid: tuple = (0.0, 0.05, 0.1)
    forest_grid: ParamGrid = field(
        default_factory=lambda: ParamGrid(
            max_depth=(2,),
            min_samples_leaf=(5,),
            feature_subset_rule=(ALL,),
            n_buckets=(30,),
            n_trees=(200,),
        )
    )

    def __post_init__(self):
        for theta in self.theta_grid:
            if not 0.0 <= theta < 0.5:
                raise BacktestError(f"theta {theta} outside [0, 0.5)")


# Reconstructed defaults for the two induction modes.
DEFAULT_STRATEGIES = {
    LOOKAHEAD: StrategyParams(),
    GREEDY: StrategyParams(
        forest_grid=ParamGrid(
            max_depth=(2, 4),
            min_samples_leaf=(5,),
            feature_subset_rule=(SQRT,),
            n_buckets=(30,),
            n_trees=(200,),
        )
    ),
}


@dataclass(frozen=True)
class EquityCurve:
    """Per out-of-sample day: position, realized strategy return, signal."""

    days: np.ndarray
    positions: np.ndarray
    returns: np.ndarray
    p_plus: np.ndarray

    def equity(self) -> np.ndarray:
        """Compound equity, starting at 1.0 before the first OS day."""
        return np.concatenate([[1.0], np.cumprod(1.0 + self.returns)])


@dataclass(frozen=True)
class PerfReport:
    cagr: float
    sharpe: float
    success_rate: float
    mdd: float
    frac_long: float
    frac_short: float

    def as_dict(self) -> dict:
        return {
            "cagr": self.cagr,
            "sharpe": self.sharpe,
            "success_rate": self.success_rate,
            "mdd": self.mdd,
            "frac_long": self.frac_long,
            "frac_short": self.frac_short,
        }


def signal_to_position(p_plus: float, theta: float) -> int:
    """LONG iff P+ >= 0.5+theta, SHORT iff P+ <= 0.5-theta, else FLAT."""
    if not 0.0 <= p_plus <= 1.0:
        raise BacktestError(f"signal {p_plus} outside [0, 1]")
    if not 0.0 <= theta < 0.5:
        raise BacktestError(f"theta {theta} outside [0, 0.5)")
    if p_plus >= 0.5 + theta:
        return LONG
    if p_plus <= 0.5 - theta:
        return SHORT
    return FLAT


def positions_from_signals(p_plus: np.ndarray, theta: float) -> np.ndarray:
    p_plus = np.asarray(p_plus, dtype=float)
    return np.where(
        p_plus >= 0.5 + theta, LONG, np.where(p_plus <= 0.5 - theta, SHORT, FLAT)
    ).astype(np.int64)


# ---------------------------------------------------------------------------
# metrics


def sharpe(daily_returns) -> float:
    """sqrt(252) * mean / sample std of daily returns; NaN when undefined."""
    r = np.asarray(daily_returns, dtype=float)
    if r.size < 2:
        raise BacktestError("sharpe needs at least two observations")
    std = r.std(ddof=1)
    if std == 0.0:
        return math.nan
    return float(math.sqrt(TRADING_DAYS_PER_YEAR) * r.mean() / std)


def max_drawdown(equity) -> float:
    """Largest peak-to-trough loss 1 - equity/running_peak, in [0, 1]."""
    eq = np.asarray(equity, dtype=float)
    if np.any(eq <= 0):
        raise BacktestError("equity values must be positive")
    peaks = np.maximum.accumulate(eq)
    return float(np.max(1.0 - eq / peaks))


def cagr(equity, trading_days_per_year: int = TRADING_DAYS_PER_YEAR) -> float:
    """(final/initial)^(252/n_days) - 1 over an equity curve incl. start value."""
    eq = np.asarray(equity, dtype=float)
    if np.any(eq <= 0):
        raise BacktestError("equity values must be positive")
    n_days = eq.size - 1
    if n_days < 1:
        raise BacktestError("cagr needs at least one day")
    return float((eq[-1] / eq[0]) ** (trading_days_per_year / n_days) - 1.0)


def success_rate(positions, returns) -> float:
    """Fraction of positioned (non-FLAT) days with strictly positive return."""
    positions = np.asarray(positions)
    returns = np.asarray(returns, dtype=float)
    held = positions != FLAT
    if not held.any():
        raise BacktestError("no positioned days")
    return float((returns[held] > 0).mean())


def perf_report(curve: EquityCurve) -> PerfReport:
    eq = curve.equity()
    n = curve.positions.size
    held = curve.positions != FLAT
    return PerfReport(
        cagr=cagr(eq),
        sharpe=sharpe(curve.returns) if n >= 2 else math.nan,
        success_rate=success_rate(curve.positions, curve.returns)
        if held.any()
        else math.nan,
        mdd=max_drawdown(eq),
        frac_long=float((curve.positions == LONG).mean()),
        frac_short=float((curve.positions == SHORT).mean()),
    )


# ---------------------------------------------------------------------------
# walk-forward engine


def _labels_from_returns(returns: np.ndarray) -> np.ndarray:
    return np.where(np.asarray(returns) > 0, POS, NEG).astype(np.int64)


def _window_seed(master: int, *key) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(key))
    return int(ss.generate_state(1)[0])


def _cv_sharpe(p_plus: np.ndarray, theta: float, returns: np.ndarray) -> float:
    strat = positions_from_signals(p_plus, theta) * returns
    if strat.size < 2 or strat.std(ddof=1) == 0.0:
        return -math.inf
    return sharpe(strat)


def run_walkforward(
    features: np.ndarray,
    feature_names,
    forward_returns: np.ndarray,
    plan: WindowPlan,
    strategy: StrategyParams,
    mode: str,
    seed: int,
    n_jobs: int = 1,
) -> EquityCurve:
    """Walk the series and emit one position per out-of-sample day.

    ``forward_returns[t]`` is the close-to-close return realized by a
    position entered at day t's close.  Selection inside each window
    maximizes CV-segment Sharpe over (forest candidate, theta); ties prefer
    the earlier grid candidate and the larger theta.
    """
    X = np.asarray(features, dtype=float)
    r = np.asarray(forward_returns, dtype=float)
    if X.shape[0] != r.size:
        raise BacktestError("features and forward_returns length mismatch")
    n_days = X.shape[0]
    names = list(feature_names)
    y = _labels_from_returns(r)

    days, positions, returns, signals = [], [], [], []
    thetas = sorted(strategy.theta_grid, reverse=True)
    for wi, (is_start, cv_start, os_start, os_end) in enumerate(plan.windows(n_days)):
        is_data = LabeledDataset(X[is_start:cv_start], names, y[is_start:cv_start])
        cv_X = X[cv_start:os_start]
        cv_r = r[cv_start:os_start]
        best = None  # (score, candidate index, -theta rank) maximized
        for ci, (tree_params, n_trees) in enumerate(
            strategy.forest_grid.candidates(mode)
        ):
            params = ForestParams(
                n_trees=n_trees,
                tree=tree_params,
                seed=_window_seed(seed, wi, 0, ci),
            )
            model = forest_mod.fit(is_data, params, n_jobs=n_jobs)
            cv_p = forest_mod.predict_proba(model, cv_X)
            for ti, theta in enumerate(thetas):
                score = _cv_sharpe(cv_p, theta, cv_r)
                key = (score, -ci, -ti)
                if best is None or key > best[0]:
                    best = (key, ci, theta, tree_params, n_trees)
        _, ci, theta, tree_params, n_trees = best
        train = LabeledDataset(X[is_start:os_start], names, y[is_start:os_start])
        final = forest_mod.fit(
            train,
            ForestParams(
                n_trees=n_trees, tree=tree_params, seed=_window_seed(seed, wi, 1, ci)
            ),
            n_jobs=n_jobs,
        )
        os_p = forest_mod.predict_proba(final, X[os_start:os_end])
        os_pos = positions_from_signals(os_p, theta)
        days.append(np.arange(os_start, os_end))
        positions.append(os_pos)
        returns.append(os_pos * r[os_start:os_end])
        signals.append(os_p)
    return EquityCurve(
        days=np.concatenate(days),
        positions=np.concatenate(positions),
        returns=np.concatenate(returns),
        p_plus=np.concatenate(signals),
    )


def run_walkforward_bars(
    bars,
    plan: WindowPlan,
    strategy: StrategyParams,
    mode: str,
    seed: int,
    n_jobs: int = 1,
):
    """Walk-forward over an OHLCV bar series using the 8 indicator features.

    Returns (curve, dates) where dates align with the curve's OS days.
    """
    from . import finance

    data = finance.build_dataset(bars)
    closes = np.array([b.close for b in bars])
    # row t of the dataset is bar index t + WARMUP_BARS; its forward return
    # is the close-to-close move into the next bar
    first = finance.WARMUP_BARS
    fwd = closes[first + 1 : len(bars)] / closes[first : len(bars) - 1] - 1.0
    curve = run_walkforward(
        data.features, data.feature_names, fwd, plan, strategy, mode, seed, n_jobs
    )
    dates = [bars[first + d].date for d in curve.days]
    return curve, dates


def buy_and_hold(forward_returns, days) -> EquityCurve:
    """Always-long benchmark over the same out-of-sample days."""
    r = np.asarray(forward_returns, dtype=float)[days]
    return EquityCurve(
        days=np.asarray(days),
        positions=np.full(r.size, LONG, dtype=np.int64),
        returns=r,
        p_plus=np.ones(r.size),
    )


def audit_no_lookahead(
    features,
    feature_names,
    forward_returns,
    plan: WindowPlan,
    strategy: StrategyParams,
    mode: str,
    seed: int,
    perturb_from_day: int,
    rng=None,
    n_jobs: int = 1,
) -> bool:
    """Perturb all data from ``perturb_from_day`` on and check that every
    position dated before that day is unchanged."""
    rng = rng or np.random.default_rng(0)
    X = np.asarray(features, dtype=float).copy()
    r = np.asarray(forward_returns, dtype=float).copy()
    base = run_walkforward(X, feature_names, r, plan, strategy, mode, seed, n_jobs)
    tail = slice(perturb_from_day, None)
    X[tail] = rng.random(X[tail].shape)
    r[tail] = rng.normal(0.0, 0.01, r[tail].shape)
    perturbed = run_walkforward(X, feature_names, r, plan, strategy, mode, seed, n_jobs)
    keep = base.days < perturb_from_day
    keep_p = perturbed.days < perturb_from_day
    return bool(
        np.array_equal(base.days[keep], perturbed.days[keep_p])
        and np.array_equal(base.positions[keep], perturbed.positions[keep_p])
    )


# ---------------------------------------------------------------------------
# heatmaps


def heatmap_grid(
    forest: Forest,
    dataset: LabeledDataset,
    feature_i: int,
    feature_j: int,
    resolution: int,
    fixed_values=None,
):
    """Forest P+ over a resolution x resolution grid of two features.

    Grid cells span the two features' observed ranges in ``dataset``
    (cell-center convention); remaining features are pinned to
    ``fixed_values`` (training medians by default).  Returns (x_centers,
    y_centers, grid) with grid[row, col] = P+ at (x_centers[col],
    y_centers[row]).
    """
    k = forest.n_features
    if not (0 <= feature_i < k and 0 <= feature_j < k) or feature_i == feature_j:
        raise BacktestError(f"invalid feature pair ({feature_i}, {feature_j})")
    if resolution < 1:
        raise BacktestError("resolution must be >= 1")
    if fixed_values is None:
        fixed_values = np.median(dataset.features, axis=0)
    fixed_values = np.asarray(fixed_values, dtype=float)

    def centers(f):
        lo = dataset.features[:, f].min()
        hi = dataset.features[:, f].max()
        edges = np.linspace(lo, hi, resolution + 1)
        return (edges[:-1] + edges[1:]) / 2.0

    xs = centers(feature_i)
    ys = centers(feature_j)
    gx, gy = np.meshgrid(xs, ys)
    samples = np.tile(fixed_values, (resolution * resolution, 1))
    samples[:, feature_i] = gx.ravel()
    samples[:, feature_j] = gy.ravel()
    p = forest_mod.predict_proba(forest, samples)
    return xs, ys, p.reshape(resolution, resolution)
