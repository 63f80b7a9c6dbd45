"""Command-line pipeline: synth -> ingest -> train -> eval -> backtest,
plus a model-comparison command. Every artifact is written atomically and
is a pure function of the config file and seed."""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import backtest as bt
from . import interval_metrics as im
from . import market_data as md
from . import svg
from .config import MODEL_KINDS, RunConfig, load_config
from .errors import MissingArtifact, QuantRangeError
from .io_utils import atomic_write_text
from .models import (
    LinearSpec,
    MLPSpec,
    QuantileForecast,
    forward,
    linear_forward,
    load_checkpoint,
    mlp_forward,
    repair_monotonic,
    save_checkpoint,
    train,
    train_linear,
    train_mlp,
)
from .synthetic import generate, to_tick_text


def _out(cfg: RunConfig, name: str) -> str:
    return os.path.join(cfg.out_dir, name)


def _require(path: str) -> str:
    if not os.path.exists(path):
        raise MissingArtifact(f"required artifact missing: {path} "
                              "(run the earlier pipeline stage first)")
    return path


def cmd_synth(cfg: RunConfig) -> None:
    prices, _ = generate(cfg.synthetic)
    atomic_write_text(_out(cfg, "ticks.csv"), to_tick_text(prices))
    print(f"wrote {_out(cfg, 'ticks.csv')} ({len(prices)} ticks)")


def _load_bars(cfg: RunConfig) -> list[md.Bar]:
    source = cfg.source
    if source == "synthetic":
        source = _require(_out(cfg, "ticks.csv"))
    with open(_require(source), "r", encoding="utf-8") as fh:
        result = md.parse_ticks(fh, delimiter=cfg.delimiter)
    return md.resample(result.records, cfg.bar_interval)


def _split_bars(cfg: RunConfig, bars: list[md.Bar]):
    n = len(bars)
    n_train = int(n * cfg.split_train)
    n_val = int(n * cfg.split_val)
    return bars[:n_train], bars[n_train:n_train + n_val], bars[n_train + n_val:]


def _windows_with_norm(cfg: RunConfig, bars: list[md.Bar],
                       norm: md.NormalizationParams) -> md.WindowedDataset:
    ds = md.make_windows(bars, window_in=cfg.window_in,
                         window_out=cfg.window_out, stride=cfg.stride)
    ds.inputs = md.apply_minmax(ds.inputs, norm)
    ds.targets = md.apply_minmax(ds.targets, norm)
    ds.norm = norm
    return ds


def cmd_ingest(cfg: RunConfig) -> None:
    bars = _load_bars(cfg)
    train_bars, val_bars, test_bars = _split_bars(cfg, bars)
    norm = md.fit_minmax(np.array([b.close for b in train_bars]))
    names = {"train": train_bars, "val": val_bars, "test": test_bars}
    for name, split in names.items():
        ds = _windows_with_norm(cfg, split, norm)
        md.save_dataset(ds, _out(cfg, f"{name}.wds"))
        print(f"wrote {_out(cfg, name + '.wds')} ({ds.num_samples} samples)")
    lines = ["open_time\topen\thigh\tlow\tclose\tvolume_delta\tsplit"]
    for name, split in names.items():
        for b in split:
            lines.append(f"{b.open_time!r}\t{b.open!r}\t{b.high!r}\t"
                         f"{b.low!r}\t{b.close!r}\t{b.volume_delta}\t{name}")
    atomic_write_text(_out(cfg, "bars.tsv"), "\n".join(lines) + "\n")


def _read_bars_tsv(cfg: RunConfig, split: str) -> list[md.Bar]:
    path = _require(_out(cfg, "bars.tsv"))
    bars = []
    with open(path, "r", encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            ot, o, h, lo, c, vd, sp = line.rstrip("\n").split("\t")
            if sp == split:
                bars.append(md.Bar(float(ot), float(o), float(h), float(lo),
                                   float(c), int(vd)))
    return bars


def _train_model(cfg: RunConfig, kind: str, ds: md.WindowedDataset, seed: int):
    num_inputs = ds.inputs.shape[1] * ds.inputs.shape[2]
    if kind == "futurequant":
        spec = cfg.model
        config = replace(cfg.train, seed=seed)
        params, history = train(spec, ds.inputs, ds.targets, config)
    elif kind == "quantile-linear":
        spec = LinearSpec(num_inputs=num_inputs, levels=cfg.model.levels)
        config = replace(cfg.train, seed=seed, learning_rate=0.05,
                         epochs=max(cfg.train.epochs, 500))
        params, history = train_linear(spec, ds.inputs, ds.targets, config)
    elif kind == "quantile-mlp":
        spec = MLPSpec(num_inputs=num_inputs, hidden=cfg.mlp_hidden,
                       levels=cfg.model.levels)
        config = replace(cfg.train, seed=seed)
        params, history = train_mlp(spec, ds.inputs, ds.targets, config)
    else:
        raise MissingArtifact(f"unknown model kind {kind}")
    return spec, params, history


def _predict(kind: str, spec, params, inputs: np.ndarray) -> QuantileForecast:
    if kind == "futurequant":
        return forward(spec, params, inputs)
    if kind == "quantile-linear":
        return linear_forward(spec, params, inputs)
    return mlp_forward(spec, params, inputs)


def _to_price_units(forecast: QuantileForecast,
                    norm: md.NormalizationParams) -> QuantileForecast:
    scale = float(norm.x_max[0] - norm.x_min[0])
    offset = float(norm.x_min[0])
    return QuantileForecast(values=forecast.values * scale + offset,
                            levels=forecast.levels)


def cmd_train(cfg: RunConfig) -> None:
    ds = md.load_dataset(_require(_out(cfg, "train.wds")))
    kind = cfg.model_kind
    spec, params, history = _train_model(cfg, kind, ds, cfg.seed)
    save_checkpoint(_out(cfg, f"model-{kind}.ckpt"), kind, spec, params)
    atomic_write_text(
        _out(cfg, f"loss-{kind}.tsv"),
        "\n".join(f"{i}\t{v!r}" for i, v in enumerate(history)) + "\n",
    )
    print(f"wrote {_out(cfg, f'model-{kind}.ckpt')} "
          f"(final loss {history[-1]:.6g})")


def _eval_forecast(cfg: RunConfig, kind: str, spec, params):
    ds = md.load_dataset(_require(_out(cfg, "test.wds")))
    raw = _predict(kind, spec, params, ds.inputs)
    raw_prices = _to_price_units(raw, ds.norm)
    actuals = md.invert_minmax(ds.targets, ds.norm).reshape(-1)
    report = im.evaluate(actuals, raw_prices, cfg.metrics)
    return ds, raw_prices, actuals, report


def _write_forecast_table(cfg: RunConfig, kind: str, ds, forecast, actuals):
    levels = forecast.levels.levels
    header = "timestamp\tactual\t" + "\t".join(f"q{lv}" for lv in levels)
    lines = [header]
    times = ds.target_times if ds.target_times is not None \
        else np.arange(len(actuals))
    for t, a, row in zip(times, actuals, forecast.values):
        cells = "\t".join(repr(float(v)) for v in row)
        lines.append(f"{t!r}\t{a!r}\t{cells}")
    atomic_write_text(_out(cfg, f"forecast-{kind}.tsv"),
                      "\n".join(lines) + "\n")


def cmd_eval(cfg: RunConfig) -> None:
    kind = cfg.model_kind
    loaded_kind, spec, params = load_checkpoint(
        _require(_out(cfg, f"model-{kind}.ckpt")))
    ds, forecast, actuals, report = _eval_forecast(cfg, loaded_kind, spec, params)
    atomic_write_text(_out(cfg, f"metrics-{kind}.txt"), report.to_text())
    _write_forecast_table(cfg, kind, ds, forecast, actuals)
    print(report.to_text(), end="")


def cmd_backtest(cfg: RunConfig) -> None:
    kind = cfg.model_kind
    loaded_kind, spec, params = load_checkpoint(
        _require(_out(cfg, f"model-{kind}.ckpt")))
    test_bars = _read_bars_tsv(cfg, "test")
    ds = md.load_dataset(_require(_out(cfg, "test.wds")))
    raw = _predict(loaded_kind, spec, params, ds.inputs)
    repaired = repair_monotonic(_to_price_units(raw, ds.norm))

    aligned = np.full((len(test_bars), repaired.values.shape[1]), np.nan)
    for i in range(repaired.values.shape[0]):
        decision_bar = i * cfg.stride + cfg.window_in - 1
        aligned[decision_bar] = repaired.values[i]
    forecast = QuantileForecast(values=aligned, levels=repaired.levels)

    result = bt.run_backtest(
        test_bars, forecast, cfg.indicators, cfg.strategy,
        cfg.initial_capital, cfg.horizons,
    )
    atomic_write_text(_out(cfg, f"backtest-{kind}.txt"), bt.summary_text(result))
    equity = result.equity_curve.equity
    dd = result.drawdown_stats.drawdown_series
    atomic_write_text(
        _out(cfg, f"equity-{kind}.tsv"),
        "\n".join(f"{i}\t{v!r}" for i, v in enumerate(equity)) + "\n",
    )
    atomic_write_text(
        _out(cfg, f"drawdown-{kind}.tsv"),
        "\n".join(f"{i}\t{v!r}" for i, v in enumerate(dd)) + "\n",
    )
    atomic_write_text(
        _out(cfg, f"equity-{kind}.svg"),
        svg.polyline_chart({"equity": equity}, title=f"equity ({kind})"),
    )
    print(bt.summary_text(result), end="")


def cmd_compare(cfg: RunConfig) -> None:
    ds = md.load_dataset(_require(_out(cfg, "train.wds")))
    rows = ["Model\tPICP\tCWC"]
    for index, kind in enumerate(MODEL_KINDS):
        spec, params, _ = _train_model(cfg, kind, ds, cfg.seed + index)
        save_checkpoint(_out(cfg, f"model-{kind}.ckpt"), kind, spec, params)
        _, forecast, actuals, report = _eval_forecast(cfg, kind, spec, params)
        atomic_write_text(_out(cfg, f"metrics-{kind}.txt"), report.to_text())
        rows.append(im.comparison_row(kind, report))
    atomic_write_text(_out(cfg, "compare.tsv"), "\n".join(rows) + "\n")
    print("\n".join(rows))


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "train": cmd_train,
    "eval": cmd_eval,
    "backtest": cmd_backtest,
    "compare": cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="quantrange",
        description="quantile-range forecasting and backtesting pipeline",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="run config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, help="seed (overrides config)")
    parser.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, seed_override=args.seed,
                          out_override=args.out)
        os.makedirs(cfg.out_dir, exist_ok=True)
        COMMANDS[args.command](cfg)
    except QuantRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
