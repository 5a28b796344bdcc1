"""OHLCV ingestion, the eight technical indicators, and next-day labeling.

The indicator formulas are common textbook definitions (the source
experiments do not publish theirs); they are isolated here so alternates
can be swapped without touching the learners:

* rsi_5 / rsi_20          -- Cutler's RSI (simple n-day averages of up/down moves)
* vol_z_5 / vol_z_20      -- volume Z-score over the trailing n days incl. today
* sign_corr_5 / sign_corr_20 -- Pearson correlation of return signs with their lag
* overnight_gap           -- open / previous close - 1
* clv                     -- close location value within the day's range

All indicators at date t use only bars dated <= t; the label is the sign of
the next day's close-to-close return (zero counts as negative).
"""

from __future__ import annotations

import csv
import datetime as dt
import os
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dataset import LabeledDataset, POS, NEG

INDICATOR_NAMES = (
    "rsi_5",
    "rsi_20",
    "vol_z_5",
    "vol_z_20",
    "sign_corr_5",
    "sign_corr_20",
    "overnight_gap",
    "clv",
)

# rows needed before every 20-day indicator is defined (sign_corr_20 is the
# binding one: 20 return pairs reach back 21 bars)
WARMUP_BARS = 21


class FinanceError(ValueError):
    pass


@dataclass(frozen=True)
class OhlcvBar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float
    volume: float

    def __post_init__(self):
        if min(self.open, self.high, self.low, self.close) <= 0:
            raise FinanceError(f"{self.date}: non-positive price")
        if self.volume < 0:
            raise FinanceError(f"{self.date}: negative volume")
        if not (
            self.low <= min(self.open, self.close)
            and max(self.open, self.close) <= self.high
        ):
            raise FinanceError(f"{self.date}: OHLC range violation")


def load_ohlcv(path) -> list[OhlcvBar]:
    """Read a date,open,high,low,close,volume CSV into a sorted bar series."""
    if not os.path.exists(path):
        raise FinanceError(f"no such file: {path}")
    required = ["date", "open", "high", "low", "close", "volume"]
    bars = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            raise FinanceError(f"missing columns: {', '.join(missing)}")
        for line_no, row in enumerate(reader, start=2):
            try:
                date = dt.date.fromisoformat(row["date"])
                values = [float(row[c]) for c in required[1:]]
            except ValueError as exc:
                raise FinanceError(f"row {line_no}: {exc}") from None
            bars.append(OhlcvBar(date, *values))
    if not bars:
        raise FinanceError("empty OHLCV file")
    bars.sort(key=lambda b: b.date)
    for prev, cur in zip(bars, bars[1:]):
        if cur.date == prev.date:
            raise FinanceError(f"duplicate date {cur.date}")
    return bars


def _trailing_windows(values: np.ndarray, n: int) -> np.ndarray:
    """(len-n+1, n) view of trailing windows ending at each index >= n-1."""
    return np.lib.stride_tricks.sliding_window_view(values, n)


def rsi(closes, n: int) -> np.ndarray:
    """Cutler's RSI over n close-to-close moves; NaN during warm-up.

    All-gain windows read 100, all-loss 0, zero-change 50.
    """
    closes = np.asarray(closes, dtype=float)
    out = np.full(closes.size, np.nan)
    if closes.size <= n:
        return out
    diff = np.diff(closes)
    gains = _trailing_windows(np.maximum(diff, 0.0), n).mean(axis=1)
    losses = _trailing_windows(np.maximum(-diff, 0.0), n).mean(axis=1)
    denom = gains + losses
    with np.errstate(invalid="ignore", divide="ignore"):
        value = 100.0 * gains / denom
    out[n:] = np.where(denom > 0, value, 50.0)
    return out


def volume_zscore(volumes, n: int) -> np.ndarray:
    """(v_t - mean) / sample std over the last n volumes including t;
    a constant window reads 0.  NaN during warm-up."""
    volumes = np.asarray(volumes, dtype=float)
    out = np.full(volumes.size, np.nan)
    if volumes.size < n:
        return out
    win = _trailing_windows(volumes, n)
    mean = win.mean(axis=1)
    std = win.std(axis=1, ddof=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        z = (volumes[n - 1 :] - mean) / std
    out[n - 1 :] = np.where(std > 0, z, 0.0)
    return out


def sign_correlation(closes, n: int) -> np.ndarray:
    """Pearson correlation of return signs with their own lag over the
    trailing n pairs; degenerate (zero-variance) windows read 0."""
    closes = np.asarray(closes, dtype=float)
    out = np.full(closes.size, np.nan)
    if closes.size <= n + 1:
        return out
    signs = np.sign(np.diff(closes))
    cur = _trailing_windows(signs[1:], n)
    lag = _trailing_windows(signs[:-1], n)
    cur_c = cur - cur.mean(axis=1, keepdims=True)
    lag_c = lag - lag.mean(axis=1, keepdims=True)
    cov = (cur_c * lag_c).sum(axis=1)
    denom = np.sqrt((cur_c**2).sum(axis=1) * (lag_c**2).sum(axis=1))
    with np.errstate(invalid="ignore", divide="ignore"):
        corr = cov / denom
    out[n + 1 :] = np.where(denom > 0, corr, 0.0)
    return out


def overnight_gap(bars) -> np.ndarray:
    """open_t / close_{t-1} - 1; NaN for the first bar."""
    opens = np.array([b.open for b in bars])
    closes = np.array([b.close for b in bars])
    out = np.full(len(bars), np.nan)
    out[1:] = opens[1:] / closes[:-1] - 1.0
    return out


def clv(bar: OhlcvBar) -> float:
    """Close location value ((C-L)-(H-C))/(H-L) in [-1, 1]; 0 on a flat bar."""
    span = bar.high - bar.low
    if span == 0:
        return 0.0
    return ((bar.close - bar.low) - (bar.high - bar.close)) / span


def indicator_matrix(bars) -> np.ndarray:
    """Full-length (n_bars, 8) matrix with NaN in warm-up rows."""
    closes = np.array([b.close for b in bars])
    volumes = np.array([b.volume for b in bars])
    return np.column_stack(
        [
            rsi(closes, 5),
            rsi(closes, 20),
            volume_zscore(volumes, 5),
            volume_zscore(volumes, 20),
            sign_correlation(closes, 5),
            sign_correlation(closes, 20),
            overnight_gap(bars),
            np.array([clv(b) for b in bars]),
        ]
    )


def next_day_labels(closes) -> np.ndarray:
    """Label for day t: POS iff close_{t+1} > close_t, else NEG; last day -1."""
    closes = np.asarray(closes, dtype=float)
    out = np.full(closes.size, -1, dtype=np.int64)
    out[:-1] = np.where(closes[1:] > closes[:-1], POS, NEG)
    return out


def build_dataset(bars) -> LabeledDataset:
    """Indicator features at date t, labeled by the sign of the next day's
    return.  Warm-up rows and the final (unlabeled) bar are dropped."""
    if len(bars) < WARMUP_BARS + 2:
        raise FinanceError(
            f"insufficient history: need >= {WARMUP_BARS + 2} bars, got {len(bars)}"
        )
    feats = indicator_matrix(bars)
    closes = np.array([b.close for b in bars])
    labels = next_day_labels(closes)
    rows = slice(WARMUP_BARS, len(bars) - 1)
    return LabeledDataset(feats[rows], list(INDICATOR_NAMES), labels[rows])


def binomial_test(correct: int, total: int, baseline_p: float) -> float:
    """One-sided exact binomial tail P[X >= correct], X ~ Bin(total, p0)."""
    if not 0 <= correct <= total:
        raise FinanceError("correct must lie in [0, total]")
    if not 0.0 < baseline_p < 1.0:
        raise FinanceError("baseline_p must lie in (0, 1)")
    return float(stats.binom.sf(correct - 1, total, baseline_p))


def majority_baseline(labels) -> tuple[float, int]:
    """(fraction, class) of the more frequent label; ties go to NEG at 0.5."""
    labels = np.asarray(labels)
    if labels.size == 0:
        raise FinanceError("empty label vector")
    n_pos = int((labels == POS).sum())
    n_neg = labels.size - n_pos
    if n_pos > n_neg:
        return n_pos / labels.size, POS
    return n_neg / labels.size, NEG
