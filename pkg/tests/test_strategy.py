import math

import pytest

from quantrange.indicators import IndicatorConfig
from quantrange.strategy import (
    PositionState,
    Side,
    Signal,
    SignalKind,
    StrategyConfig,
    generate_signal,
    positions_from_signals,
)


def grid_signal(rsi, atr, price_below, **kwargs):
    lower_band = 100.0
    price = 95.0 if price_below else 105.0
    return generate_signal(price=price, atr_pct=atr, lower_band=lower_band,
                           rsi=rsi, upper_band=110.0, **kwargs)


class TestDecisionTable:
    def test_full_grid(self):
        kinds = {}
        for rsi in (25.0, 50.0, 75.0):
            for atr in (0.005, 0.02, 0.035):
                for below in (True, False):
                    kinds[(rsi, atr, below)] = grid_signal(rsi, atr, below).kind
        for key, kind in kinds.items():
            rsi, atr, below = key
            if rsi == 25.0 and below and atr == 0.02:
                assert kind is SignalKind.BUY, key
            elif rsi == 75.0 and not below and atr == 0.02:
                assert kind is SignalKind.SELL, key
            else:
                assert kind is SignalKind.NONE, key

    def test_atr_band_half_open(self):
        cfg = IndicatorConfig(atr_low=0.01, atr_high=0.03)
        at_low = grid_signal(25.0, 0.01, True, config=cfg)
        at_high = grid_signal(25.0, 0.03, True, config=cfg)
        assert at_low.kind is SignalKind.BUY
        assert at_high.kind is SignalKind.NONE

    def test_rsi_boundaries_are_exclusive(self):
        assert grid_signal(30.0, 0.02, True).kind is SignalKind.NONE
        assert grid_signal(70.0, 0.02, False).kind is SignalKind.NONE

    def test_threshold_scales_band(self):
        cfg = IndicatorConfig(threshold=0.9)
        # 95 < 0.9 * 100 is false, so the buy branch falls through
        sig = grid_signal(25.0, 0.02, True, config=cfg)
        assert sig.kind is SignalKind.NONE

    def test_sell_vs_upper_band_variant(self):
        # price 105 is above the lower band but below the upper band, so
        # the variant suppresses the sell that the verbatim branch emits
        verbatim = grid_signal(75.0, 0.02, False)
        variant = grid_signal(75.0, 0.02, False, sell_vs_upper_band=True)
        assert verbatim.kind is SignalKind.SELL
        assert variant.kind is SignalKind.NONE

    def test_variant_requires_upper_band(self):
        with pytest.raises(ValueError):
            generate_signal(price=105.0, atr_pct=0.02, lower_band=100.0,
                            rsi=75.0, sell_vs_upper_band=True)

    def test_non_finite_inputs(self):
        sig = generate_signal(price=100.0, atr_pct=math.nan,
                              lower_band=100.0, rsi=25.0)
        assert sig.kind is SignalKind.NONE
        assert sig.reason == "non-finite-input"


def sigs(*kinds):
    return [Signal(k, "test") for k in kinds]


B, S, N = SignalKind.BUY, SignalKind.SELL, SignalKind.NONE


class TestPositionsFromSignals:
    def test_buy_fills_next_bar(self):
        positions, trades = positions_from_signals(
            sigs(B, N, N), [10.0, 11.0, 12.0])
        assert [p.side for p in positions] == [Side.FLAT, Side.LONG, Side.LONG]
        assert positions[1].entry_price == 11.0
        assert len(trades) == 1
        assert trades[0].pnl == pytest.approx(1.0)  # 12 - 11

    def test_no_pyramiding(self):
        positions, trades = positions_from_signals(
            sigs(B, B, B, N), [10.0, 11.0, 12.0, 13.0])
        assert [p.side for p in positions] == \
            [Side.FLAT, Side.LONG, Side.LONG, Side.LONG]
        assert len(trades) == 1
        assert trades[0].entry_price == 11.0

    def test_reversal_closes_then_opens(self):
        positions, trades = positions_from_signals(
            sigs(B, S, N), [10.0, 11.0, 12.0])
        assert [p.side for p in positions] == [Side.FLAT, Side.LONG, Side.SHORT]
        assert len(trades) == 2
        long_trade, short_trade = trades
        assert long_trade.side is Side.LONG
        assert long_trade.pnl == pytest.approx(1.0)   # 11 -> 12
        assert short_trade.side is Side.SHORT
        assert short_trade.entry_price == 12.0

    def test_short_pnl_sign(self):
        _, trades = positions_from_signals(sigs(S, N, N), [10.0, 11.0, 9.0])
        assert trades[0].side is Side.SHORT
        assert trades[0].pnl == pytest.approx(2.0)  # sold 11, covered 9

    def test_all_none_stays_flat(self):
        positions, trades = positions_from_signals(
            sigs(N, N, N), [1.0, 2.0, 3.0])
        assert all(p.side is Side.FLAT for p in positions)
        assert trades == []

    def test_signal_on_final_bar_never_fills(self):
        positions, trades = positions_from_signals(sigs(N, B), [1.0, 2.0])
        assert all(p.side is Side.FLAT for p in positions)
        assert trades == []

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            positions_from_signals(sigs(N), [1.0, 2.0])


class TestPositionState:
    def test_flat_rejects_entry_fields(self):
        with pytest.raises(ValueError):
            PositionState(Side.FLAT, entry_price=1.0, entry_index=0)

    def test_open_requires_entry_fields(self):
        with pytest.raises(ValueError):
            PositionState(Side.LONG)


def test_strategy_config_defaults():
    cfg = StrategyConfig()
    assert cfg.sell_vs_upper_band is False
    assert cfg.transaction_cost == 0.0
