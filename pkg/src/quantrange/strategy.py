"""Signal generation from the printed decision tree, and the fold that
turns a signal sequence into positions and a trade log."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .indicators import IndicatorConfig


class SignalKind(enum.Enum):
    BUY = "Buy"
    SELL = "Sell"
    NONE = "None"


@dataclass(frozen=True)
class Signal:
    kind: SignalKind
    reason: str


class Side(enum.Enum):
    FLAT = "Flat"
    LONG = "Long"
    SHORT = "Short"


@dataclass(frozen=True)
class PositionState:
    side: Side
    entry_price: float | None = None
    entry_index: int | None = None

    def __post_init__(self):
        has_entry = self.entry_price is not None and self.entry_index is not None
        if (self.side is Side.FLAT) == has_entry:
            raise ValueError("entry fields present iff side is not Flat")


@dataclass(frozen=True)
class Trade:
    side: Side
    entry_index: int
    exit_index: int
    entry_price: float
    exit_price: float

    @property
    def pnl(self) -> float:
        direction = 1.0 if self.side is Side.LONG else -1.0
        return direction * (self.exit_price - self.entry_price)


@dataclass(frozen=True)
class StrategyConfig:
    sell_vs_upper_band: bool = False   # compare the sell branch to the upper band
    transaction_cost: float = 0.0      # per unit traded, currency


def generate_signal(
    price: float,
    atr_pct: float,
    lower_band: float,
    rsi: float,
    config: IndicatorConfig = IndicatorConfig(),
    upper_band: float | None = None,
    sell_vs_upper_band: bool = False,
) -> Signal:
    """Over-sold buy / over-bought sell, gated by the ATR volatility band.

    The sell branch compares price against the lower band by default;
    sell_vs_upper_band switches it to the upper band (upper_band required).
    """
    if not all(math.isfinite(v) for v in (price, atr_pct, lower_band, rsi)):
        return Signal(SignalKind.NONE, "non-finite-input")
    atr_in_band = config.atr_low <= atr_pct < config.atr_high
    if rsi < 30.0:
        if price < config.threshold * lower_band:
            if atr_in_band:
                return Signal(SignalKind.BUY, "oversold")
            return Signal(SignalKind.NONE, "atr-out-of-band")
        return Signal(SignalKind.NONE, "price-above-band")
    if rsi > 70.0:
        band = lower_band
        if sell_vs_upper_band:
            if upper_band is None:
                raise ValueError("sell_vs_upper_band requires upper_band")
            band = upper_band
        if price > config.threshold * band:
            if atr_in_band:
                return Signal(SignalKind.SELL, "overbought")
            return Signal(SignalKind.NONE, "atr-out-of-band")
        return Signal(SignalKind.NONE, "price-below-band")
    return Signal(SignalKind.NONE, "rsi-neutral")


def positions_from_signals(
    signals: list[Signal],
    prices: list[float],
    config: StrategyConfig = StrategyConfig(),
) -> tuple[list[PositionState], list[Trade]]:
    """Fold signals into a per-bar position sequence (one unit, no
    pyramiding). A signal at bar i fills at bar i+1's price; an opposite
    signal closes then reverses; the final bar force-closes.

    prices are the fill prices (bar opens); positions[i] is the state held
    during bar i. Returns the position sequence and the trade log.
    """
    n = len(signals)
    if n != len(prices):
        raise ValueError(f"{n} signals vs {len(prices)} prices")
    flat = PositionState(Side.FLAT)
    positions: list[PositionState] = []
    trades: list[Trade] = []
    state = flat
    for i in range(n):
        desired = signals[i - 1].kind if i > 0 else SignalKind.NONE
        if desired is SignalKind.BUY and state.side is not Side.LONG:
            if state.side is Side.SHORT:
                trades.append(Trade(state.side, state.entry_index, i,
                                    state.entry_price, prices[i]))
            state = PositionState(Side.LONG, prices[i], i)
        elif desired is SignalKind.SELL and state.side is not Side.SHORT:
            if state.side is Side.LONG:
                trades.append(Trade(state.side, state.entry_index, i,
                                    state.entry_price, prices[i]))
            state = PositionState(Side.SHORT, prices[i], i)
        positions.append(state)
    if state.side is not Side.FLAT:
        trades.append(Trade(state.side, state.entry_index, n - 1,
                            state.entry_price, prices[n - 1]))
    return positions, trades
