"""Mini-batch training of the quantile network with pluggable optimizers.

Runs are deterministic for a given (spec, dataset, seed): fixed init,
fixed shuffle order, serial batch reduction, float64 throughout.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NonFiniteLoss
from .network import ModelSpec, ParameterSet, init_params, loss_and_grads, loss_value


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 200
    batch_size: int = 32
    seed: int = 0
    optimizer: str = "adam"        # "sgd" | "momentum" | "adam"
    lr_decay: float = 1.0          # multiplicative per-epoch decay
    momentum: float = 0.9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    gradient_clip: float | None = None

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 0:
            raise ValueError("epochs must be >= 0")
        if self.optimizer not in ("sgd", "momentum", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class Optimizer:
    """Updates a named-array parameter dict in place."""

    def __init__(self, config: TrainConfig, params: ParameterSet):
        self.config = config
        self.lr = config.learning_rate
        self.t = 0
        self.state = {
            name: {"m": np.zeros_like(a), "v": np.zeros_like(a)}
            for name, a in params.arrays.items()
        }

    def step(self, params: ParameterSet, grads: dict) -> None:
        cfg = self.config
        self.t += 1
        if cfg.gradient_clip is not None:
            total = np.sqrt(sum(float((g ** 2).sum()) for g in grads.values()))
            if total > cfg.gradient_clip:
                scale = cfg.gradient_clip / total
                grads = {k: g * scale for k, g in grads.items()}
        for name, g in grads.items():
            a = params.arrays[name]
            st = self.state[name]
            if cfg.optimizer == "sgd":
                a -= self.lr * g
            elif cfg.optimizer == "momentum":
                st["m"] = cfg.momentum * st["m"] + g
                a -= self.lr * st["m"]
            else:  # adam
                st["m"] = cfg.adam_beta1 * st["m"] + (1 - cfg.adam_beta1) * g
                st["v"] = cfg.adam_beta2 * st["v"] + (1 - cfg.adam_beta2) * g * g
                mhat = st["m"] / (1 - cfg.adam_beta1 ** self.t)
                vhat = st["v"] / (1 - cfg.adam_beta2 ** self.t)
                a -= self.lr * mhat / (np.sqrt(vhat) + cfg.adam_epsilon)


def train(
    spec: ModelSpec,
    inputs: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig,
    initial_params: ParameterSet | None = None,
) -> tuple[ParameterSet, list[float]]:
    """Minimize the mean pinball loss over all quantile levels.

    inputs: (N, T, F); targets: (N,) or (N, 1). Returns the trained
    parameters and the per-epoch full-dataset (eval-mode) training loss,
    with the pre-training loss as entry 0.
    """
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float).reshape(-1)
    n = inputs.shape[0]
    if n == 0:
        raise NonFiniteLoss("empty dataset")

    rng = np.random.default_rng(config.seed)
    params = initial_params.copy() if initial_params is not None \
        else init_params(spec, rng)
    opt = Optimizer(config, params)
    dropout_rng = np.random.default_rng(config.seed + 1)

    history: list[float] = []
    initial, _ = loss_value(spec, params, inputs, targets)
    history.append(initial)
    for _epoch in range(config.epochs):
        opt.lr = config.learning_rate * config.lr_decay ** _epoch
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            _, grads = loss_and_grads(
                spec, params, inputs[idx], targets[idx],
                mode="train", rng=dropout_rng,
            )
            opt.step(params, grads)
        epoch_loss, _ = loss_value(spec, params, inputs, targets)
        if not np.isfinite(epoch_loss) or not params.all_finite():
            raise NonFiniteLoss(
                f"training diverged at epoch {_epoch} (loss {epoch_loss})"
            )
        history.append(epoch_loss)
    return params, history
