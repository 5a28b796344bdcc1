"""Greedy and stepwise two-depth-lookahead decision forests for binary
classification, with a tunable-noise XOR data lab, cross-validated tuning,
technical-indicator features for daily OHLCV data, and a walk-forward
long/short backtest engine."""

from .dataset import (
    POS,
    NEG,
    LabeledDataset,
    FoldPlan,
    QuantileThresholds,
    load_feature_csv,
    save_feature_csv,
    quantile_thresholds,
    make_folds,
    holdout_split,
)
from .tree import (
    GREEDY,
    LOOKAHEAD,
    SQRT,
    LOG2,
    ALL,
    ClassCounts,
    SplitSpec,
    BlockSpec,
    Leaf,
    Internal,
    TreeParams,
    gini,
    weighted_gini,
    cumulative_gini,
    greedy_best_split,
    lookahead_best_block,
    grow,
)
from .forest import (
    Forest,
    ForestParams,
    ImportanceReport,
    fit,
    predict_proba,
    classify,
    accuracy,
    feature_importance,
    feature_pair_frequency,
    save_forest,
    load_forest,
)
from .tuning import ParamGrid, CVResult, cross_validate
from .synthgen import SynthConfig, generate, bayes_accuracy, run_sweep
from .backtest import (
    LONG,
    SHORT,
    FLAT,
    WindowPlan,
    StrategyParams,
    EquityCurve,
    PerfReport,
    signal_to_position,
    run_walkforward,
    run_walkforward_bars,
    buy_and_hold,
    perf_report,
    sharpe,
    max_drawdown,
    cagr,
    success_rate,
    heatmap_grid,
)

__version__ = "0.1.0"
