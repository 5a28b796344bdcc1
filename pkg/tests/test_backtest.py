import math

import numpy as np
import pytest

from lookforest import backtest as bt
from lookforest import forest as forest_mod
from lookforest.backtest import (
    BacktestError,
    EquityCurve,
    LONG,
    SHORT,
    FLAT,
    StrategyParams,
    WindowPlan,
    audit_no_lookahead,
    buy_and_hold,
    cagr,
    heatmap_grid,
    max_drawdown,
    perf_report,
    positions_from_signals,
    run_walkforward,
    run_walkforward_bars,
    sharpe,
    signal_to_position,
    success_rate,
)
from lookforest.dataset import LabeledDataset
from lookforest.forest import ForestParams
from lookforest.tree import TreeParams, GREEDY, LOOKAHEAD
from lookforest.tuning import ParamGrid

from test_finance import make_bars


class TestWindowPlan:
    def test_default_tiling(self):
        plan = WindowPlan()
        wins = plan.windows(1400)
        assert wins == [(0, 1000, 1250, 1325), (75, 1075, 1325, 1400)]

    def test_truncated_final_window(self):
        wins = WindowPlan().windows(1300)
        assert wins == [(0, 1000, 1250, 1300)]

    def test_insufficient_history(self):
        with pytest.raises(BacktestError, match="insufficient"):
            WindowPlan().windows(1250)

    def test_os_days_cover_tail_exactly_once(self):
        plan = WindowPlan(is_len=100, cv_len=50, os_len=20, step=20)
        wins = plan.windows(400)
        covered = [d for _, _, s, e in wins for d in range(s, e)]
        assert covered == list(range(150, 400))

    def test_bad_lengths(self):
        with pytest.raises(BacktestError):
            WindowPlan(os_len=0)


@pytest.mark.parametrize(
    "p,theta,expected",
    [
        (0.60, 0.05, LONG),
        (0.55, 0.05, LONG),  # boundary is inclusive
        (0.54, 0.05, FLAT),
        (0.45, 0.05, SHORT),
        (0.46, 0.05, FLAT),
        (0.50, 0.0, LONG),  # theta 0: 0.5 satisfies the long branch first
        (0.49, 0.0, SHORT),
    ],
)
def test_signal_to_position(p, theta, expected):
    assert signal_to_position(p, theta) == expected
    assert positions_from_signals(np.array([p]), theta)[0] == expected


def test_signal_validation():
    with pytest.raises(BacktestError):
        signal_to_position(1.2, 0.0)
    with pytest.raises(BacktestError):
        signal_to_position(0.6, 0.5)
    with pytest.raises(BacktestError):
        StrategyParams(theta_grid=(0.6,))


class TestMetrics:
    def test_sharpe_by_hand(self):
        # mean 1/150, sample std sqrt(7/30000): annualized ratio is 4*sqrt(3)
        assert sharpe([0.01, -0.01, 0.02]) == pytest.approx(4.0 * math.sqrt(3.0))

    def test_sharpe_constant_is_nan(self):
        assert math.isnan(sharpe([0.01, 0.01, 0.01]))

    def test_sharpe_needs_two(self):
        with pytest.raises(BacktestError):
            sharpe([0.01])

    def test_mdd_by_hand(self):
        assert max_drawdown([1.0, 1.2, 0.9, 1.1, 0.8]) == pytest.approx(1.0 / 3.0)

    def test_mdd_monotone_curve_is_zero(self):
        assert max_drawdown([1.0, 1.1, 1.2]) == 0.0

    def test_cagr_full_year(self):
        eq = np.ones(253)
        eq[-1] = 1.2
        assert cagr(eq) == pytest.approx(0.2)

    def test_cagr_one_day(self):
        assert cagr([1.0, 1.1]) == pytest.approx(1.1**252 - 1.0)

    def test_success_rate_ignores_flat_days(self):
        positions = [LONG, FLAT, SHORT, LONG]
        returns = [0.01, 0.05, -0.01, 0.02]
        # flat day excluded; short day's realized return is -0.01
        assert success_rate(positions, returns) == pytest.approx(2.0 / 3.0)

    def test_success_rate_all_flat(self):
        with pytest.raises(BacktestError):
            success_rate([FLAT, FLAT], [0.01, 0.02])

    def test_perf_report_fields(self):
        curve = EquityCurve(
            days=np.arange(4),
            positions=np.array([LONG, SHORT, FLAT, LONG]),
            returns=np.array([0.01, 0.02, 0.0, -0.01]),
            p_plus=np.array([0.6, 0.4, 0.5, 0.6]),
        )
        rep = perf_report(curve)
        assert rep.frac_long == 0.5
        assert rep.frac_short == 0.25
        assert rep.success_rate == pytest.approx(2.0 / 3.0)
        eq = curve.equity()
        assert eq[0] == 1.0
        assert eq[-1] == pytest.approx(1.01 * 1.02 * 1.0 * 0.99)
        assert rep.mdd == pytest.approx(0.01)


def xor_market(n_days, rho=0.9, n_noise=2, seed=0):
    """Features with a 2-feature junction signal driving next-day returns."""
    rng = np.random.default_rng(seed)
    X = rng.random((n_days, 2 + n_noise))
    oracle = (X[:, 0] >= 0.5) != (X[:, 1] >= 0.5)
    up = np.where(rng.random(n_days) < rho, oracle, ~oracle)
    magnitude = rng.uniform(0.001, 0.01, n_days)
    returns = np.where(up, magnitude, -magnitude)
    names = ["f0", "f1"] + [f"noise{i}" for i in range(n_noise)]
    return X, names, returns


def tiny_strategy(mode_depths=(2,), rule="all", n_trees=20):
    return StrategyParams(
        theta_grid=(0.0, 0.05),
        forest_grid=ParamGrid(
            max_depth=mode_depths,
            min_samples_leaf=(5,),
            feature_subset_rule=(rule,),
            n_buckets=(20,),
            n_trees=(n_trees,),
        ),
    )


SMALL_PLAN = WindowPlan(is_len=120, cv_len=60, os_len=30, step=30)


class TestWalkforward:
    def test_curve_shape_and_days(self):
        X, names, r = xor_market(300)
        curve = run_walkforward(X, names, r, SMALL_PLAN, tiny_strategy(), LOOKAHEAD, seed=1)
        np.testing.assert_array_equal(curve.days, np.arange(180, 300))
        assert curve.positions.shape == curve.returns.shape == curve.p_plus.shape
        assert set(np.unique(curve.positions)) <= {LONG, SHORT, FLAT}

    def test_returns_are_position_times_forward(self):
        X, names, r = xor_market(300, seed=3)
        curve = run_walkforward(X, names, r, SMALL_PLAN, tiny_strategy(), LOOKAHEAD, seed=2)
        np.testing.assert_allclose(curve.returns, curve.positions * r[curve.days])

    def test_deterministic_and_jobs_invariant(self):
        X, names, r = xor_market(300, seed=5)
        a = run_walkforward(X, names, r, SMALL_PLAN, tiny_strategy(), GREEDY, seed=7)
        b = run_walkforward(X, names, r, SMALL_PLAN, tiny_strategy(), GREEDY, seed=7, n_jobs=2)
        np.testing.assert_array_equal(a.positions, b.positions)
        np.testing.assert_array_equal(a.p_plus, b.p_plus)

    def test_learns_strong_junction_signal(self):
        X, names, r = xor_market(480, rho=0.95, seed=11)
        curve = run_walkforward(X, names, r, SMALL_PLAN, tiny_strategy(n_trees=40), LOOKAHEAD, seed=3)
        held = curve.positions != FLAT
        assert held.mean() > 0.5
        assert (curve.returns[held] > 0).mean() > 0.6

    def test_length_mismatch(self):
        X, names, r = xor_market(300)
        with pytest.raises(BacktestError, match="mismatch"):
            run_walkforward(X, names, r[:-1], SMALL_PLAN, tiny_strategy(), GREEDY, seed=0)

    def test_no_lookahead_audit_passes(self):
        X, names, r = xor_market(330, seed=9)
        ok = audit_no_lookahead(
            X, names, r, SMALL_PLAN, tiny_strategy(), LOOKAHEAD, seed=4,
            perturb_from_day=240,
        )
        assert ok


def test_run_walkforward_bars_alignment():
    bars = make_bars(260, seed=2)
    plan = WindowPlan(is_len=100, cv_len=50, os_len=25, step=25)
    strategy = tiny_strategy(rule="sqrt", n_trees=5)
    curve, dates = run_walkforward_bars(bars, plan, strategy, GREEDY, seed=1)
    assert len(dates) == curve.days.size
    from lookforest.finance import WARMUP_BARS

    assert dates[0] == bars[WARMUP_BARS + curve.days[0]].date
    # every OS day's realized return matches the close-to-close move
    closes = np.array([b.close for b in bars])
    for d, pos, ret in zip(curve.days, curve.positions, curve.returns):
        t = d + WARMUP_BARS
        fwd = closes[t + 1] / closes[t] - 1.0
        assert ret == pytest.approx(pos * fwd)


def test_buy_and_hold():
    r = np.array([0.01, -0.02, 0.03, 0.01])
    curve = buy_and_hold(r, np.array([1, 3]))
    np.testing.assert_array_equal(curve.positions, [LONG, LONG])
    np.testing.assert_allclose(curve.returns, [-0.02, 0.01])


class TestHeatmap:
    def _xor_forest(self):
        rng = np.random.default_rng(21)
        X = rng.random((600, 3))
        y = ((X[:, 0] >= 0.5) != (X[:, 1] >= 0.5)).astype(int)
        data = LabeledDataset(X, ["f0", "f1", "z"], y)
        params = ForestParams(
            n_trees=20,
            tree=TreeParams(
                max_depth=2, mode=LOOKAHEAD, feature_subset_rule="all", n_buckets=50
            ),
            seed=5,
        )
        return forest_mod.fit(data, params), data

    def test_centers_and_shape(self):
        model, data = self._xor_forest()
        xs, ys, grid = heatmap_grid(model, data, 0, 1, 4)
        assert grid.shape == (4, 4)
        lo, hi = data.features[:, 0].min(), data.features[:, 0].max()
        step = (hi - lo) / 4
        np.testing.assert_allclose(xs, lo + step * (np.arange(4) + 0.5))

    def test_checkerboard_pattern(self):
        model, data = self._xor_forest()
        xs, ys, grid = heatmap_grid(model, data, 0, 1, 10)
        left = xs < 0.5
        below = ys < 0.5
        off_diag = (grid[np.ix_(~below, left)].mean() + grid[np.ix_(below, ~left)].mean()) / 2
        on_diag = (grid[np.ix_(below, left)].mean() + grid[np.ix_(~below, ~left)].mean()) / 2
        assert off_diag - on_diag > 0.5

    def test_validation(self):
        model, data = self._xor_forest()
        with pytest.raises(BacktestError):
            heatmap_grid(model, data, 0, 0, 4)
        with pytest.raises(BacktestError):
            heatmap_grid(model, data, 0, 3, 4)
        with pytest.raises(BacktestError):
            heatmap_grid(model, data, 0, 1, 0)
