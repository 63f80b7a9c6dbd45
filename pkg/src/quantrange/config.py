"""Typed key-value run configuration with per-module sections.

Unknown sections or keys are hard errors so experiment-config typos fail
fast instead of silently falling back to defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .errors import ConfigError
from .indicators import IndicatorConfig
from .interval_metrics import MetricConfig
from .models.forecast import QuantileLevels
from .models.network import ModelSpec
from .models.training import TrainConfig
from .strategy import StrategyConfig
from .synthetic import SyntheticSpec

_SCHEMA: dict[str, dict[str, str]] = {
    "run": {"out_dir": "str", "seed": "int"},
    "data": {
        "source": "str", "delimiter": "str", "bar_interval": "float",
        "split_train": "float", "split_val": "float", "split_test": "float",
        "window_in": "int", "window_out": "int", "stride": "int",
    },
    "synthetic": {
        "kind": "str", "length": "int", "phi": "float", "sigma0": "float",
        "vol_sensitivity": "float", "regime_shift": "float",
        "base_price": "float",
    },
    "model": {
        "kind": "str", "num_blocks": "int", "num_heads": "int",
        "key_dim": "int", "conv_channels": "int", "conv_kernel": "int",
        "dense_units": "ints", "dropout_rate": "float", "levels": "floats",
        "hidden": "ints",
    },
    "train": {
        "learning_rate": "float", "epochs": "int", "batch_size": "int",
        "optimizer": "str", "momentum": "float", "gradient_clip": "float",
    },
    "metrics": {"beta": "float", "eta": "float", "cwc_variant": "str"},
    "indicators": {
        "rsi_period": "int", "atr_period": "int", "atr_low": "float",
        "atr_high": "float", "threshold": "float",
    },
    "strategy": {"sell_vs_upper_band": "bool", "transaction_cost": "float"},
    "backtest": {"initial_capital": "float", "horizons": "str"},
}

MODEL_KINDS = ("futurequant", "quantile-linear", "quantile-mlp")


def _convert(section: str, key: str, raw: str):
    kind = _SCHEMA[section][key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes", "on"):
                return True
            if raw.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "ints":
            return tuple(int(x) for x in raw.split(","))
        if kind == "floats":
            return tuple(float(x) for x in raw.split(","))
        return raw
    except ValueError:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as {kind}")


@dataclass
class RunConfig:
    out_dir: str = "out"
    seed: int = 0
    source: str = "synthetic"
    delimiter: str = ","
    bar_interval: float = 30.0
    split_train: float = 0.7
    split_val: float = 0.15
    split_test: float = 0.15
    window_in: int = 5
    window_out: int = 1
    stride: int = 1
    model_kind: str = "futurequant"
    synthetic: SyntheticSpec = field(default_factory=SyntheticSpec)
    model: ModelSpec = field(default_factory=ModelSpec)
    mlp_hidden: tuple[int, int] = (32, 16)
    train: TrainConfig = field(default_factory=TrainConfig)
    metrics: MetricConfig = field(default_factory=MetricConfig)
    indicators: IndicatorConfig = field(default_factory=IndicatorConfig)
    strategy: StrategyConfig = field(default_factory=StrategyConfig)
    initial_capital: float = 1_000_000.0
    horizons: dict[str, int] = field(default_factory=dict)


def load_config(path: str, seed_override: int | None = None,
                out_override: str | None = None) -> RunConfig:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")

    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            values[section][key] = _convert(section, key, raw)

    def sec(name: str) -> dict:
        return values.get(name, {})

    cfg = RunConfig()
    run = sec("run")
    cfg.out_dir = out_override or run.get("out_dir", cfg.out_dir)
    cfg.seed = seed_override if seed_override is not None \
        else run.get("seed", cfg.seed)

    data = sec("data")
    for name in ("source", "delimiter", "bar_interval", "split_train",
                 "split_val", "split_test", "window_in", "window_out",
                 "stride"):
        if name in data:
            setattr(cfg, name, data[name])
    splits = cfg.split_train + cfg.split_val + cfg.split_test
    if abs(splits - 1.0) > 1e-9:
        raise ConfigError(f"split fractions sum to {splits}, expected 1")

    synth = sec("synthetic")
    cfg.synthetic = SyntheticSpec(seed=cfg.seed, **synth)

    model = dict(sec("model"))
    cfg.model_kind = model.pop("kind", cfg.model_kind)
    if cfg.model_kind not in MODEL_KINDS:
        raise ConfigError(f"model kind must be one of {MODEL_KINDS}")
    cfg.mlp_hidden = model.pop("hidden", cfg.mlp_hidden)
    levels = model.pop("levels", None)
    if levels is not None:
        model["levels"] = QuantileLevels(levels)
    cfg.model = ModelSpec(window_in=cfg.window_in, num_features=1, **model)

    cfg.train = TrainConfig(seed=cfg.seed, **sec("train"))
    cfg.metrics = MetricConfig(**sec("metrics"))
    cfg.indicators = IndicatorConfig(**sec("indicators"))
    cfg.strategy = StrategyConfig(**sec("strategy"))

    bt = sec("backtest")
    cfg.initial_capital = bt.get("initial_capital", cfg.initial_capital)
    horizons_raw = bt.get("horizons", "")
    horizons: dict[str, int] = {}
    for item in filter(None, (s.strip() for s in horizons_raw.split(","))):
        name, _, bars = item.partition(":")
        try:
            horizons[name] = int(bars)
        except ValueError:
            raise ConfigError(f"[backtest] horizons: bad entry {item!r}")
    cfg.horizons = horizons
    return cfg
