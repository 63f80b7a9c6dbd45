"""Simpler quantile models: per-level linear regression on the flattened
window, and a small feed-forward network. Both minimize the same mean
pinball objective as the attention model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteLoss, ShapeMismatch
from . import layers as L
from .forecast import QuantileForecast, QuantileLevels
from .losses import (
    mean_pinball,
    mean_pinball_grad,
    mean_squared,
    mean_squared_grad,
)
from .network import ParameterSet, _glorot
from .training import Optimizer, TrainConfig


def _flatten(inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 3:
        return inputs.reshape(inputs.shape[0], -1)
    if inputs.ndim == 2:
        return inputs
    raise ShapeMismatch(f"expected (N, T, F) or (N, P), got {inputs.shape}")


# --- quantile linear regression ---

@dataclass(frozen=True)
class LinearSpec:
    num_inputs: int                       # flattened window size; 0 = intercept only
    levels: QuantileLevels = field(default_factory=QuantileLevels)


def linear_init(spec: LinearSpec, rng: np.random.Generator) -> ParameterSet:
    q = len(spec.levels)
    w = _glorot(rng, (spec.num_inputs, q)) if spec.num_inputs else np.zeros((0, q))
    return ParameterSet({"w": w, "b": np.zeros(q)})


def linear_forward(spec: LinearSpec, params: ParameterSet,
                   inputs: np.ndarray) -> QuantileForecast:
    x = _flatten(inputs)[:, :spec.num_inputs]
    values = x @ params["w"] + params["b"]
    return QuantileForecast(values=values, levels=spec.levels)


def linear_loss_and_grads(spec, params, x, y, loss="pinball"):
    pred = x @ params["w"] + params["b"]
    levels = spec.levels.levels
    if loss == "squared":
        value = mean_squared(pred, y, levels)
        dpred = mean_squared_grad(pred, y, levels)
    else:
        value = mean_pinball(pred, y, levels)
        dpred = mean_pinball_grad(pred, y, levels)
    return value, {"w": x.T @ dpred, "b": dpred.sum(axis=0)}


def train_linear(
    spec: LinearSpec,
    inputs: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig,
    initial_params: ParameterSet | None = None,
) -> tuple[ParameterSet, list[float]]:
    """Full-batch subgradient descent (Adam steps with 1/sqrt(t) decay)."""
    x = _flatten(inputs)[:, :spec.num_inputs]
    y = np.asarray(targets, dtype=float).reshape(-1)
    rng = np.random.default_rng(config.seed)
    params = initial_params.copy() if initial_params is not None \
        else linear_init(spec, rng)
    opt = Optimizer(config, params)
    base_lr = config.learning_rate

    history: list[float] = []
    value, _ = linear_loss_and_grads(spec, params, x, y)
    history.append(value)
    for t in range(config.epochs):
        value, grads = linear_loss_and_grads(spec, params, x, y)
        if not np.isfinite(value):
            raise NonFiniteLoss(f"linear baseline diverged at step {t}")
        opt.lr = base_lr / np.sqrt(1.0 + t)
        opt.step(params, grads)
        history.append(value)
    return params, history


# --- quantile feed-forward network ---

@dataclass(frozen=True)
class MLPSpec:
    num_inputs: int
    hidden: tuple[int, int] = (32, 16)
    levels: QuantileLevels = field(default_factory=QuantileLevels)


def mlp_init(spec: MLPSpec, rng: np.random.Generator) -> ParameterSet:
    u1, u2 = spec.hidden
    q = len(spec.levels)
    return ParameterSet({
        "w1": _glorot(rng, (spec.num_inputs, u1)), "b1": np.zeros(u1),
        "w2": _glorot(rng, (u1, u2)), "b2": np.zeros(u2),
        "w3": _glorot(rng, (u2, q)), "b3": np.zeros(q),
    })


def mlp_forward(spec: MLPSpec, params: ParameterSet,
                inputs: np.ndarray) -> QuantileForecast:
    values, _ = _mlp_forward_raw(params, _flatten(inputs))
    return QuantileForecast(values=values, levels=spec.levels)


def _mlp_forward_raw(params, x):
    z1, c1 = L.linear_forward(x, params["w1"], params["b1"])
    a1, m1 = L.relu_forward(z1)
    z2, c2 = L.linear_forward(a1, params["w2"], params["b2"])
    a2, m2 = L.relu_forward(z2)
    out, c3 = L.linear_forward(a2, params["w3"], params["b3"])
    return out, (c1, m1, c2, m2, c3)


def _mlp_loss_and_grads(spec, params, x, y):
    pred, (c1, m1, c2, m2, c3) = _mlp_forward_raw(params, x)
    levels = spec.levels.levels
    value = mean_pinball(pred, y, levels)
    dpred = mean_pinball_grad(pred, y, levels)
    grads: dict[str, np.ndarray] = {}
    da2, grads["w3"], grads["b3"] = L.linear_backward(c3, dpred)
    dz2 = L.relu_backward(m2, da2)
    da1, grads["w2"], grads["b2"] = L.linear_backward(c2, dz2)
    dz1 = L.relu_backward(m1, da1)
    _, grads["w1"], grads["b1"] = L.linear_backward(c1, dz1)
    return value, grads


def train_mlp(
    spec: MLPSpec,
    inputs: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig,
) -> tuple[ParameterSet, list[float]]:
    x = _flatten(inputs)
    y = np.asarray(targets, dtype=float).reshape(-1)
    n = x.shape[0]
    rng = np.random.default_rng(config.seed)
    params = mlp_init(spec, rng)
    opt = Optimizer(config, params)

    history: list[float] = []
    value, _ = _mlp_loss_and_grads(spec, params, x, y)
    history.append(value)
    for _epoch in range(config.epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            _, grads = _mlp_loss_and_grads(spec, params, x[idx], y[idx])
            opt.step(params, grads)
        value, _ = _mlp_loss_and_grads(spec, params, x, y)
        if not np.isfinite(value):
            raise NonFiniteLoss(f"mlp baseline diverged at epoch {_epoch}")
        history.append(value)
    return params, history
