"""Attention-encoder quantile network: spec, parameters, forward, backward.

The stack per sample: input projection to the model width, num_blocks
encoder blocks (pre-norm attention and a convolutional feed-forward, both
with residual connections), global average pooling over time, two dense
ReLU layers, and a linear head emitting one value per quantile level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteLoss, ShapeMismatch
from . import layers as L
from .forecast import QuantileForecast, QuantileLevels
from .losses import LOSSES


@dataclass(frozen=True)
class ModelSpec:
    window_in: int = 5
    num_features: int = 1
    num_blocks: int = 4
    num_heads: int = 2
    key_dim: int = 8
    conv_channels: int = 16
    conv_kernel: int = 3
    dense_units: tuple[int, int] = (32, 16)
    dropout_rate: float = 0.1
    levels: QuantileLevels = field(default_factory=QuantileLevels)
    ln_epsilon: float = 1e-5

    def __post_init__(self):
        if self.num_blocks < 1:
            raise ValueError("num_blocks must be >= 1")
        for name in ("window_in", "num_features", "num_heads", "key_dim",
                     "conv_channels", "conv_kernel"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must lie in [0, 1)")

    @property
    def model_dim(self) -> int:
        return self.num_heads * self.key_dim

    @property
    def num_levels(self) -> int:
        return len(self.levels)


@dataclass
class ParameterSet:
    arrays: dict[str, np.ndarray]

    def copy(self) -> "ParameterSet":
        return ParameterSet({k: v.copy() for k, v in self.arrays.items()})

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]

    def names(self) -> list[str]:
        return list(self.arrays)

    def num_values(self) -> int:
        return sum(v.size for v in self.arrays.values())

    def all_finite(self) -> bool:
        return all(np.isfinite(v).all() for v in self.arrays.values())


def _glorot(rng: np.random.Generator, shape) -> np.ndarray:
    fan_in, fan_out = shape[0] if len(shape) == 2 else int(np.prod(shape[:-1])), shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def parameter_shapes(spec: ModelSpec) -> dict[str, tuple[int, ...]]:
    d = spec.model_dim
    cc, k = spec.conv_channels, spec.conv_kernel
    u1, u2 = spec.dense_units
    shapes: dict[str, tuple[int, ...]] = {
        "input_w": (spec.num_features, d),
        "input_b": (d,),
    }
    for i in range(spec.num_blocks):
        p = f"block{i}_"
        shapes[p + "ln1_g"] = (d,)
        shapes[p + "ln1_b"] = (d,)
        shapes[p + "wq"] = (d, d)
        shapes[p + "wk"] = (d, d)
        shapes[p + "wv"] = (d, d)
        shapes[p + "wo"] = (d, d)
        shapes[p + "ln2_g"] = (d,)
        shapes[p + "ln2_b"] = (d,)
        shapes[p + "conv1_w"] = (k, d, cc)
        shapes[p + "conv1_b"] = (cc,)
        shapes[p + "conv2_w"] = (1, cc, d)
        shapes[p + "conv2_b"] = (d,)
    shapes["dense1_w"] = (d, u1)
    shapes["dense1_b"] = (u1,)
    shapes["dense2_w"] = (u1, u2)
    shapes["dense2_b"] = (u2,)
    shapes["out_w"] = (u2, spec.num_levels)
    shapes["out_b"] = (spec.num_levels,)
    return shapes


def init_params(spec: ModelSpec, rng: np.random.Generator) -> ParameterSet:
    """Glorot-uniform weights, zero biases, unit layer-norm gains."""
    arrays: dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(spec).items():
        if name.endswith(("_b", "ln1_b", "ln2_b")):
            arrays[name] = np.zeros(shape)
        elif name.endswith(("ln1_g", "ln2_g")):
            arrays[name] = np.ones(shape)
        else:
            arrays[name] = _glorot(rng, shape)
    return ParameterSet(arrays)


def zero_params(spec: ModelSpec) -> ParameterSet:
    return ParameterSet(
        {name: np.zeros(shape) for name, shape in parameter_shapes(spec).items()}
    )


def conv_feedforward(x, kernel1, bias1, kernel2, bias2):
    """ReLU(conv_k(x)) followed by a width-1 conv restoring the channel
    count; x: (N, T, d)."""
    h, _ = L.conv1d_forward(np.asarray(x, dtype=float), kernel1, bias1)
    h, _ = L.relu_forward(h)
    y, _ = L.conv1d_forward(h, kernel2, bias2)
    return y


def _block_forward(x, p, prefix, spec, mode, rng, signature):
    eps = spec.ln_epsilon
    n1, c_ln1 = L.layer_norm_forward(x, p[prefix + "ln1_g"], p[prefix + "ln1_b"], eps)
    att, c_att = L.mha_forward(n1, p[prefix + "wq"], p[prefix + "wk"],
                               p[prefix + "wv"], p[prefix + "wo"], spec.num_heads)
    drop_rng = rng if mode == "train" else None
    att_d, c_drop = L.dropout_forward(att, spec.dropout_rate, drop_rng)
    y1 = x + att_d

    n2, c_ln2 = L.layer_norm_forward(y1, p[prefix + "ln2_g"], p[prefix + "ln2_b"], eps)
    h1, c_conv1 = L.conv1d_forward(n2, p[prefix + "conv1_w"], p[prefix + "conv1_b"])
    hr, relu_mask = L.relu_forward(h1)
    signature.append(relu_mask)
    h2, c_conv2 = L.conv1d_forward(hr, p[prefix + "conv2_w"], p[prefix + "conv2_b"])
    y2 = y1 + h2
    return y2, (c_ln1, c_att, c_drop, c_ln2, c_conv1, relu_mask, c_conv2)


def _block_backward(dy, cache, prefix, grads):
    c_ln1, c_att, c_drop, c_ln2, c_conv1, relu_mask, c_conv2 = cache
    # second residual branch
    dh2 = dy
    dhr, grads[prefix + "conv2_w"], grads[prefix + "conv2_b"] = \
        L.conv1d_backward(c_conv2, dh2)
    dh1 = L.relu_backward(relu_mask, dhr)
    dn2, grads[prefix + "conv1_w"], grads[prefix + "conv1_b"] = \
        L.conv1d_backward(c_conv1, dh1)
    dy1, grads[prefix + "ln2_g"], grads[prefix + "ln2_b"] = \
        L.layer_norm_backward(c_ln2, dn2)
    dy1 = dy1 + dy
    # first residual branch
    datt = L.dropout_backward(c_drop, dy1)
    dn1, dwq, dwk, dwv, dwo = L.mha_backward(c_att, datt)
    grads[prefix + "wq"] = dwq
    grads[prefix + "wk"] = dwk
    grads[prefix + "wv"] = dwv
    grads[prefix + "wo"] = dwo
    dx, grads[prefix + "ln1_g"], grads[prefix + "ln1_b"] = \
        L.layer_norm_backward(c_ln1, dn1)
    return dx + dy1


def encoder_block(
    x: np.ndarray,
    params: ParameterSet,
    spec: ModelSpec,
    block_index: int = 0,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """One encoder block on a (T, d) or (N, T, d) array; shape-preserving."""
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    y, _ = _block_forward(x, params, f"block{block_index}_", spec, mode, rng, [])
    return y[0] if squeeze else y


def forward_raw(
    spec: ModelSpec,
    params: ParameterSet,
    x: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
):
    """Full forward pass. Returns (outputs (N, Q), caches, signature) where
    the signature lists the boolean activation patterns of every ReLU (used
    by the gradient checker to detect kink crossings)."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 3 or x.shape[1] != spec.window_in or x.shape[2] != spec.num_features:
        raise ShapeMismatch(
            f"expected input (N, {spec.window_in}, {spec.num_features}), "
            f"got {x.shape}"
        )
    p = params
    signature: list[np.ndarray] = []
    caches: dict = {}

    h, caches["input"] = L.linear_forward(x, p["input_w"], p["input_b"])
    block_caches = []
    for i in range(spec.num_blocks):
        h, c = _block_forward(h, p, f"block{i}_", spec, mode, rng, signature)
        block_caches.append(c)
    caches["blocks"] = block_caches

    pooled, caches["gap"] = L.gap_forward(h)
    z1, caches["dense1"] = L.linear_forward(pooled, p["dense1_w"], p["dense1_b"])
    z1r, m1 = L.relu_forward(z1)
    signature.append(m1)
    caches["relu1"] = m1
    z2, caches["dense2"] = L.linear_forward(z1r, p["dense2_w"], p["dense2_b"])
    z2r, m2 = L.relu_forward(z2)
    signature.append(m2)
    caches["relu2"] = m2
    out, caches["out"] = L.linear_forward(z2r, p["out_w"], p["out_b"])
    return out, caches, signature


def backward_raw(spec: ModelSpec, caches: dict, dout: np.ndarray) -> dict:
    grads: dict[str, np.ndarray] = {}
    dz2r, grads["out_w"], grads["out_b"] = L.linear_backward(caches["out"], dout)
    dz2 = L.relu_backward(caches["relu2"], dz2r)
    dz1r, grads["dense2_w"], grads["dense2_b"] = L.linear_backward(caches["dense2"], dz2)
    dz1 = L.relu_backward(caches["relu1"], dz1r)
    dpooled, grads["dense1_w"], grads["dense1_b"] = L.linear_backward(caches["dense1"], dz1)
    dh = L.gap_backward(caches["gap"], dpooled)
    for i in reversed(range(spec.num_blocks)):
        dh = _block_backward(dh, caches["blocks"][i], f"block{i}_", grads)
    _, grads["input_w"], grads["input_b"] = L.linear_backward(caches["input"], dh)
    return grads


def forward(
    spec: ModelSpec,
    params: ParameterSet,
    x: np.ndarray,
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> QuantileForecast:
    """Predict quantile values (normalized units) for a (N, T, F) batch."""
    out, _, _ = forward_raw(spec, params, x, mode, rng)
    return QuantileForecast(values=out, levels=spec.levels)


def _pack_signature(signature, residual_signs) -> bytes:
    chunks = [np.packbits(m.ravel()).tobytes() for m in signature]
    chunks.append(np.packbits(residual_signs.ravel()).tobytes())
    return b"".join(chunks)


def loss_value(
    spec: ModelSpec,
    params: ParameterSet,
    x: np.ndarray,
    y: np.ndarray,
    loss: str = "pinball",
) -> tuple[float, bytes]:
    """Eval-mode loss plus the kink signature of the evaluation point."""
    loss_fn, _ = LOSSES[loss]
    out, _, signature = forward_raw(spec, params, x, mode="eval")
    value = float(loss_fn(out, np.asarray(y, dtype=float), spec.levels.levels))
    residual_signs = out >= np.asarray(y, dtype=float)[:, None]
    return value, _pack_signature(signature, residual_signs)


def loss_and_grads(
    spec: ModelSpec,
    params: ParameterSet,
    x: np.ndarray,
    y: np.ndarray,
    loss: str = "pinball",
    mode: str = "eval",
    rng: np.random.Generator | None = None,
) -> tuple[float, dict]:
    loss_fn, grad_fn = LOSSES[loss]
    y = np.asarray(y, dtype=float)
    out, caches, _ = forward_raw(spec, params, x, mode, rng)
    value = float(loss_fn(out, y, spec.levels.levels))
    if not np.isfinite(value):
        raise NonFiniteLoss(f"loss diverged to {value}")
    dout = grad_fn(out, y, spec.levels.levels)
    grads = backward_raw(spec, caches, dout)
    return value, grads
