import datetime as dt
import math

import numpy as np
import pytest

from lookforest import finance
from lookforest.dataset import POS, NEG
from lookforest.finance import (
    FinanceError,
    OhlcvBar,
    WARMUP_BARS,
    binomial_test,
    build_dataset,
    clv,
    load_ohlcv,
    majority_baseline,
    next_day_labels,
    overnight_gap,
    rsi,
    sign_correlation,
    volume_zscore,
)


def make_bars(n, seed=0, start_price=100.0):
    rng = np.random.default_rng(seed)
    bars = []
    close = start_price
    date = dt.date(2020, 1, 1)
    for i in range(n):
        opn = close * (1.0 + rng.normal(0, 0.002))
        close = opn * (1.0 + rng.normal(0, 0.01))
        hi = max(opn, close) * (1.0 + abs(rng.normal(0, 0.003)))
        lo = min(opn, close) * (1.0 - abs(rng.normal(0, 0.003)))
        vol = float(rng.integers(1000, 5000))
        bars.append(OhlcvBar(date + dt.timedelta(days=i), opn, hi, lo, close, vol))
    return bars


class TestBarValidation:
    def test_ok(self):
        OhlcvBar(dt.date(2020, 1, 1), 10, 12, 9, 11, 100)

    def test_close_above_high(self):
        with pytest.raises(FinanceError, match="range"):
            OhlcvBar(dt.date(2020, 1, 1), 10, 10.5, 9, 11, 100)

    def test_negative_price(self):
        with pytest.raises(FinanceError):
            OhlcvBar(dt.date(2020, 1, 1), -1, 12, 9, 11, 100)

    def test_negative_volume(self):
        with pytest.raises(FinanceError):
            OhlcvBar(dt.date(2020, 1, 1), 10, 12, 9, 11, -5)


class TestLoadOhlcv:
    HEADER = "date,open,high,low,close,volume\n"

    def test_roundtrip_sorted(self, tmp_path):
        p = tmp_path / "bars.csv"
        p.write_text(
            self.HEADER
            + "2020-01-03,10,12,9,11,100\n"
            + "2020-01-02,10,12,9,10.5,200\n"
        )
        bars = load_ohlcv(p)
        assert [b.date.day for b in bars] == [2, 3]
        assert bars[1].close == 11

    def test_duplicate_date(self, tmp_path):
        p = tmp_path / "bars.csv"
        p.write_text(
            self.HEADER
            + "2020-01-02,10,12,9,11,100\n"
            + "2020-01-02,10,12,9,10.5,200\n"
        )
        with pytest.raises(FinanceError, match="duplicate"):
            load_ohlcv(p)

    def test_missing_column(self, tmp_path):
        p = tmp_path / "bars.csv"
        p.write_text("date,open,high,low,close\n2020-01-02,10,12,9,11\n")
        with pytest.raises(FinanceError, match="volume"):
            load_ohlcv(p)

    def test_bad_number(self, tmp_path):
        p = tmp_path / "bars.csv"
        p.write_text(self.HEADER + "2020-01-02,10,12,9,abc,100\n")
        with pytest.raises(FinanceError, match="row 2"):
            load_ohlcv(p)

    def test_no_such_file(self, tmp_path):
        with pytest.raises(FinanceError, match="no such file"):
            load_ohlcv(tmp_path / "nope.csv")

    def test_empty(self, tmp_path):
        p = tmp_path / "bars.csv"
        p.write_text(self.HEADER)
        with pytest.raises(FinanceError, match="empty"):
            load_ohlcv(p)


class TestRsi:
    def test_two_day_by_hand(self):
        # moves +1, -0.5, +1; both 2-move windows average gains 0.5 and
        # losses 0.25, so RSI = 100 * 0.5 / 0.75
        out = rsi([10.0, 11.0, 10.5, 11.5], 2)
        assert np.isnan(out[:2]).all()
        assert out[2] == pytest.approx(200.0 / 3.0)
        assert out[3] == pytest.approx(200.0 / 3.0)

    def test_all_gains_is_100(self):
        out = rsi(np.arange(1.0, 10.0), 3)
        assert np.all(out[3:] == 100.0)

    def test_all_losses_is_0(self):
        out = rsi(np.arange(10.0, 1.0, -1.0), 3)
        assert np.all(out[3:] == 0.0)

    def test_flat_is_50(self):
        out = rsi(np.full(8, 7.0), 3)
        assert np.all(out[3:] == 50.0)

    def test_too_short_all_nan(self):
        assert np.isnan(rsi([1.0, 2.0], 5)).all()


class TestVolumeZscore:
    def test_by_hand(self):
        # trailing window [10, 10, 20]: mean 40/3, sample std sqrt(100/3)
        out = volume_zscore([10.0, 10.0, 10.0, 20.0], 3)
        assert np.isnan(out[:2]).all()
        assert out[2] == 0.0  # constant window
        assert out[3] == pytest.approx((20.0 - 40.0 / 3.0) / math.sqrt(100.0 / 3.0))

    def test_includes_current_day(self):
        # a volume spike shows up on its own day, not the next
        out = volume_zscore([10.0, 10.0, 10.0, 10.0, 100.0], 5)
        assert out[4] > 1.5


class TestSignCorrelation:
    def test_alternating_is_minus_one(self):
        closes = [10.0, 11.0, 10.0, 11.0, 10.0, 11.0, 10.0, 11.0]
        out = sign_correlation(closes, 4)
        assert out[-1] == pytest.approx(-1.0)

    def test_monotone_is_degenerate_zero(self):
        out = sign_correlation(np.arange(1.0, 10.0), 4)
        assert out[-1] == 0.0

    def test_warmup_length(self):
        out = sign_correlation(np.random.default_rng(0).random(30) + 1.0, 20)
        assert np.isnan(out[:21]).all()
        assert np.isfinite(out[21:]).all()


def test_overnight_gap_by_hand():
    bars = [
        OhlcvBar(dt.date(2020, 1, 1), 10, 12, 9, 10, 100),
        OhlcvBar(dt.date(2020, 1, 2), 10.5, 12, 9, 11, 100),
    ]
    out = overnight_gap(bars)
    assert np.isnan(out[0])
    assert out[1] == pytest.approx(0.05)


@pytest.mark.parametrize(
    "o,h,l,c,expected",
    [
        (10, 12, 9, 11, 1.0 / 3.0),  # ((11-9)-(12-11))/3
        (10, 12, 9, 12, 1.0),
        (10, 12, 9, 9, -1.0),
        (10, 10, 10, 10, 0.0),  # flat bar
    ],
)
def test_clv(o, h, l, c, expected):
    bar = OhlcvBar(dt.date(2020, 1, 1), o, h, l, c, 100)
    assert clv(bar) == pytest.approx(expected)


def test_next_day_labels():
    out = next_day_labels([10.0, 11.0, 11.0, 10.0])
    np.testing.assert_array_equal(out, [POS, NEG, NEG, -1])


class TestBuildDataset:
    def test_minimum_history(self):
        with pytest.raises(FinanceError, match="insufficient"):
            build_dataset(make_bars(WARMUP_BARS + 1))

    def test_row_count_and_names(self):
        # 25 bars: 21 warm-up rows and the final unlabeled bar drop out
        data = build_dataset(make_bars(25))
        assert data.features.shape == (3, 8)
        assert data.feature_names == list(finance.INDICATOR_NAMES)
        assert np.isfinite(data.features).all()

    def test_labels_align_with_closes(self):
        bars = make_bars(30, seed=4)
        data = build_dataset(bars)
        closes = [b.close for b in bars]
        for row in range(data.labels.size):
            t = row + WARMUP_BARS
            expected = POS if closes[t + 1] > closes[t] else NEG
            assert data.labels[row] == expected

    def test_features_match_full_matrix(self):
        bars = make_bars(40, seed=5)
        data = build_dataset(bars)
        full = finance.indicator_matrix(bars)
        np.testing.assert_array_equal(data.features, full[WARMUP_BARS:-1])


class TestBinomialTest:
    def test_exact_small_cases(self):
        assert binomial_test(2, 2, 0.5) == pytest.approx(0.25)
        assert binomial_test(1, 1, 0.5) == pytest.approx(0.5)
        assert binomial_test(3, 3, 0.5) == pytest.approx(0.125)
        assert binomial_test(0, 5, 0.5) == pytest.approx(1.0)

    def test_monotone_in_correct(self):
        ps = [binomial_test(c, 50, 0.5) for c in range(51)]
        assert all(a >= b for a, b in zip(ps, ps[1:]))

    def test_validation(self):
        with pytest.raises(FinanceError):
            binomial_test(6, 5, 0.5)
        with pytest.raises(FinanceError):
            binomial_test(3, 5, 1.0)


def test_majority_baseline():
    assert majority_baseline([1, 1, 1, 0]) == (0.75, POS)
    assert majority_baseline([0, 0, 1]) == (2.0 / 3.0, NEG)
    assert majority_baseline([0, 1]) == (0.5, NEG)  # tie goes to NEG
    with pytest.raises(FinanceError):
        majority_baseline([])
