"""Backtest engine: equity accounting, cumulative return, drawdown stats,
horizon summaries, and the fixed-capital scenario test."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AlignmentError, RuinousReturn
from .indicators import IndicatorConfig, atr_percent, rsi
from .market_data import Bar
from .models.forecast import QuantileForecast
from .strategy import (
    PositionState,
    Side,
    Signal,
    SignalKind,
    StrategyConfig,
    Trade,
    generate_signal,
    positions_from_signals,
)

DRAWDOWN_COUNT_THRESHOLD = 0.001


@dataclass
class EquityCurve:
    equity: np.ndarray    # per-bar equity, equity[0] = initial capital
    returns: np.ndarray   # per-bar fractional returns, returns[0] = 0

    @property
    def initial(self) -> float:
        return float(self.equity[0])

    @property
    def final(self) -> float:
        return float(self.equity[-1])


@dataclass
class DrawdownStats:
    drawdown_series: np.ndarray   # positive magnitudes from the running peak
    max_drawdown: float
    count_over_threshold: int


def cumulative_return(returns: Sequence[float]) -> float:
    """Compounded product of (1 + r_i) minus one."""
    returns = np.asarray(returns, dtype=float)
    if np.any(returns <= -1.0):
        raise RuinousReturn("per-period return <= -100%")
    return float(np.prod(1.0 + returns) - 1.0)


def drawdown(equity: Sequence[float]) -> DrawdownStats:
    """Fractional decline from the running peak, its max, and the count of
    bars whose drawdown exceeds 0.001."""
    equity = np.asarray(equity, dtype=float)
    peaks = np.maximum.accumulate(equity)
    series = (peaks - equity) / peaks
    return DrawdownStats(
        drawdown_series=series,
        max_drawdown=float(series.max()) if series.size else 0.0,
        count_over_threshold=int((series > DRAWDOWN_COUNT_THRESHOLD).sum()),
    )


def scenario_test(initial_funds: float, period_return: float) -> float:
    """Account balance after one period at the given return."""
    if initial_funds <= 0:
        raise ValueError("initial funds must be positive")
    return initial_funds * (1.0 + period_return)


def equity_from_positions(
    bars: Sequence[Bar],
    positions: Sequence[PositionState],
    initial_capital: float,
    transaction_cost: float = 0.0,
) -> EquityCurve:
    """Cash/position accounting for a one-unit position sequence.

    Fills happen at the bar open where the position changes; equity is
    marked to market at each close; any open position force-closes at the
    final close. equity[0] is the initial capital, before the first bar.
    """
    n = len(bars)
    if len(positions) != n:
        raise AlignmentError(f"{n} bars vs {len(positions)} positions")
    closes = np.array([b.close for b in bars], dtype=float)
    opens = np.array([b.open for b in bars], dtype=float)
    equity = np.empty(n)
    cash = initial_capital
    held = 0  # units: +1 long, -1 short
    for i in range(n):
        want = {Side.FLAT: 0, Side.LONG: 1, Side.SHORT: -1}[positions[i].side]
        if want != held:
            traded = abs(want - held)
            cash -= (want - held) * opens[i] + traded * transaction_cost
            held = want
        equity[i] = cash + held * closes[i]
    if held != 0:  # force-close on the final bar
        cash += held * closes[-1] - abs(held) * transaction_cost
        equity[-1] = cash

    equity = np.concatenate([[initial_capital], equity])
    returns = np.empty(n + 1)
    returns[0] = 0.0
    returns[1:] = equity[1:] / equity[:-1] - 1.0
    return EquityCurve(equity=equity, returns=returns)


@dataclass
class BacktestResult:
    equity_curve: EquityCurve
    drawdown_stats: DrawdownStats
    trades: list[Trade]
    positions: list[PositionState]
    signals: list[Signal]
    summary: dict[str, float] = field(default_factory=dict)


def run_backtest(
    bars: Sequence[Bar],
    forecast: QuantileForecast,
    indicator_cfg: IndicatorConfig = IndicatorConfig(),
    strategy_cfg: StrategyConfig = StrategyConfig(),
    initial_capital: float = 1_000_000.0,
    horizons: dict[str, int] | None = None,
) -> BacktestResult:
    """Evaluate the signal strategy over bars with one forecast row per bar.

    Forecast rows must be monotone (repair first); a row of NaNs means no
    forecast for that bar, producing no signal. Signals fill at the next
    bar's open; equity is marked to market at each close. One unit traded;
    transaction costs are charged per unit on every fill.
    """
    n = len(bars)
    if forecast.values.shape[0] != n:
        raise AlignmentError(
            f"{n} bars vs {forecast.values.shape[0]} forecast rows"
        )
    closes = np.array([b.close for b in bars], dtype=float)
    opens = np.array([b.open for b in bars], dtype=float)
    rsi_series = rsi(closes, indicator_cfg.rsi_period)
    atr_series = atr_percent(bars, indicator_cfg.atr_period)
    lower_idx = forecast.levels.index_of(0.05)
    upper_idx = forecast.levels.index_of(0.95)

    signals: list[Signal] = []
    for i in range(n):
        lower_band = float(forecast.values[i, lower_idx])
        upper_band = float(forecast.values[i, upper_idx])
        if not math.isfinite(lower_band):
            signals.append(Signal(SignalKind.NONE, "no-forecast"))
            continue
        signals.append(generate_signal(
            price=closes[i],
            atr_pct=atr_series[i],
            lower_band=lower_band,
            rsi=rsi_series[i],
            config=indicator_cfg,
            upper_band=upper_band,
            sell_vs_upper_band=strategy_cfg.sell_vs_upper_band,
        ))

    positions, trades = positions_from_signals(signals, list(opens), strategy_cfg)
    curve = equity_from_positions(bars, positions, initial_capital,
                                  strategy_cfg.transaction_cost)
    dd = drawdown(curve.equity)

    bar_returns = curve.returns[1:]
    summary: dict[str, float] = {
        "cumulative_return": cumulative_return(bar_returns),
        "volatility": float(np.std(bar_returns)),
        "max_drawdown": dd.max_drawdown,
        "num_drawdowns_over_0.001": float(dd.count_over_threshold),
        "num_trades": float(len(trades)),
        "final_equity": curve.final,
    }
    per_bar = summary["cumulative_return"]
    for name, length in (horizons or {}).items():
        # compound the whole-run per-bar return over the horizon length
        mean_bar_return = (1.0 + per_bar) ** (1.0 / max(n, 1)) - 1.0
        summary[f"cumulative_return_{name}"] = \
            (1.0 + mean_bar_return) ** length - 1.0
    return BacktestResult(
        equity_curve=curve,
        drawdown_stats=dd,
        trades=trades,
        positions=positions,
        signals=signals,
        summary=summary,
    )


def summary_text(result: BacktestResult) -> str:
    lines = [f"{key} = {value!r}" for key, value in result.summary.items()]
    return "\n".join(lines) + "\n"
