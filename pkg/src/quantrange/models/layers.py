"""Array-level building blocks with hand-written backward passes.

Every forward returns (output, cache); the matching backward consumes the
cache plus the upstream gradient and returns gradients for its inputs and
parameters. Everything runs in float64 for deterministic, checkable math.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch


# --- layer normalization (over the last axis) ---

def layer_norm(x, gamma, shift, epsilon: float = 1e-5):
    """((x - mu) / sqrt(var + eps)) * gamma + shift, per trailing vector."""
    y, _ = layer_norm_forward(np.asarray(x, dtype=float),
                              np.asarray(gamma, dtype=float),
                              np.asarray(shift, dtype=float), epsilon)
    return y


def layer_norm_forward(x, gamma, shift, epsilon: float = 1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + epsilon)
    xhat = (x - mu) * inv_std
    y = xhat * gamma + shift
    return y, (xhat, inv_std, gamma)


def layer_norm_backward(cache, dy):
    xhat, inv_std, gamma = cache
    axes = tuple(range(dy.ndim - 1))
    dgamma = (dy * xhat).sum(axis=axes)
    dshift = dy.sum(axis=axes)
    dxhat = dy * gamma
    m1 = dxhat.mean(axis=-1, keepdims=True)
    m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv_std * (dxhat - m1 - xhat * m2)
    return dx, dgamma, dshift


# --- dense ---

def linear_forward(x, w, b):
    return x @ w + b, (x, w)


def linear_backward(cache, dy):
    x, w = cache
    din, dout = w.shape
    dw = x.reshape(-1, din).T @ dy.reshape(-1, dout)
    db = dy.reshape(-1, dout).sum(axis=0)
    dx = dy @ w.T
    return dx, dw, db


# --- ReLU ---

def relu_forward(x):
    mask = x > 0.0
    return x * mask, mask


def relu_backward(mask, dy):
    return dy * mask


# --- softmax (last axis) ---

def softmax(x):
    z = x - x.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# --- multi-head attention ---

def split_heads(x, num_heads):
    n, t, d = x.shape
    return x.reshape(n, t, num_heads, d // num_heads).transpose(0, 2, 1, 3)


def merge_heads(x):
    n, h, t, dk = x.shape
    return x.transpose(0, 2, 1, 3).reshape(n, t, h * dk)


def multi_head_attention(x, wq, wk, wv, wo, num_heads: int):
    """softmax(Q K^T / sqrt(d_k)) V per head, heads concatenated then
    projected by wo. x: (N, T, d) with d divisible by num_heads."""
    y, _ = mha_forward(np.asarray(x, dtype=float), wq, wk, wv, wo, num_heads)
    return y


def mha_forward(x, wq, wk, wv, wo, num_heads: int):
    n, t, d = x.shape
    if d % num_heads != 0:
        raise DimensionMismatch(
            f"model dim {d} not divisible by num_heads {num_heads}"
        )
    dk = d // num_heads
    q = split_heads(x @ wq, num_heads)       # (N, h, T, dk)
    k = split_heads(x @ wk, num_heads)
    v = split_heads(x @ wv, num_heads)
    scores = q @ k.transpose(0, 1, 3, 2) / np.sqrt(dk)
    attn = softmax(scores)                   # (N, h, T, T)
    heads = attn @ v                         # (N, h, T, dk)
    concat = merge_heads(heads)              # (N, T, d)
    y = concat @ wo
    cache = (x, wq, wk, wv, wo, q, k, v, attn, concat, num_heads)
    return y, cache


def mha_backward(cache, dy):
    x, wq, wk, wv, wo, q, k, v, attn, concat, num_heads = cache
    n, t, d = x.shape
    dk_dim = d // num_heads
    scale = 1.0 / np.sqrt(dk_dim)

    dwo = concat.reshape(-1, d).T @ dy.reshape(-1, d)
    dconcat = dy @ wo.T
    dheads = split_heads(dconcat, num_heads)         # (N, h, T, dk)

    dattn = dheads @ v.transpose(0, 1, 3, 2)          # (N, h, T, T)
    dv = attn.transpose(0, 1, 3, 2) @ dheads
    dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
    dq = dscores @ k * scale
    dk = dscores.transpose(0, 1, 3, 2) @ q * scale

    dxq = merge_heads(dq)
    dxk = merge_heads(dk)
    dxv = merge_heads(dv)
    xf = x.reshape(-1, d)
    dwq = xf.T @ dxq.reshape(-1, d)
    dwk = xf.T @ dxk.reshape(-1, d)
    dwv = xf.T @ dxv.reshape(-1, d)
    dx = dxq @ wq.T + dxk @ wk.T + dxv @ wv.T
    return dx, dwq, dwk, dwv, dwo


# --- 1-d convolution along the time axis (same padding) ---

def conv1d_forward(x, w, b):
    """x: (N, T, Cin), w: (k, Cin, Cout), b: (Cout,). Same-padded."""
    n, t, cin = x.shape
    k, wcin, cout = w.shape
    if wcin != cin:
        raise DimensionMismatch(f"conv expects {wcin} channels, got {cin}")
    if k > t:
        raise DimensionMismatch(f"kernel width {k} exceeds sequence length {t}")
    pl = (k - 1) // 2
    pr = k - 1 - pl
    xp = np.pad(x, ((0, 0), (pl, pr), (0, 0)))
    y = np.tile(b, (n, t, 1)).astype(float)
    for j in range(k):
        y += xp[:, j:j + t] @ w[j]
    return y, (xp, w, t, pl)


def conv1d_backward(cache, dy):
    xp, w, t, pl = cache
    k, cin, cout = w.shape
    dw = np.empty_like(w)
    dxp = np.zeros_like(xp)
    for j in range(k):
        dw[j] = xp[:, j:j + t].reshape(-1, cin).T @ dy.reshape(-1, cout)
        dxp[:, j:j + t] += dy @ w[j].T
    db = dy.reshape(-1, cout).sum(axis=0)
    dx = dxp[:, pl:pl + t]
    return dx, dw, db


# --- global average pooling over the time axis ---

def global_average_pool(x):
    """(T, d) -> (d,) or (N, T, d) -> (N, d): arithmetic mean over time."""
    x = np.asarray(x, dtype=float)
    return x.mean(axis=-2)


def gap_forward(x):
    return x.mean(axis=1), (x.shape[1],)


def gap_backward(cache, dy):
    (t,) = cache
    return np.repeat(dy[:, None, :], t, axis=1) / t


# --- dropout (inverted scaling; identity in eval mode or at rate 0) ---

def dropout_forward(x, rate: float, rng: np.random.Generator | None):
    if rng is None or rate <= 0.0:
        return x, None
    mask = (rng.random(x.shape) >= rate) / (1.0 - rate)
    return x * mask, mask


def dropout_backward(mask, dy):
    if mask is None:
        return dy
    return dy * mask
