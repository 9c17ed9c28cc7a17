"""Neural layers used by all classifier architectures.

Layers are composites of autodiff primitives, so their gradients come from
the graph; nothing here defines its own backward rule.  All sequence layers
take activations shaped ``(batch, time, features)`` and an optional binary
mask ``(batch, time)`` (numpy array, 1 = real token, 0 = padding).  Padding
contributes nothing to recurrent state updates, attention, or pooling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import AllMasked, EmptySequence, NumericFailure, ShapeMismatch

ACTIVATIONS = {
    "linear": lambda t: t,
    "relu": ad.relu,
    "tanh": ad.tanh,
    "sigmoid": ad.sigmoid,
    "softmax": lambda t: ad.softmax(t, axis=-1),
}

# Score for masked attention keys; large enough to zero out after softmax
# in float32 without overflowing exp().
_MASKED_SCORE = -1e9


@dataclass
class Parameter:
    """A named trainable tensor."""

    name: str
    tensor: Tensor

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def grad(self) -> Optional[np.ndarray]:
        return self.tensor.grad


# -- initializers ------------------------------------------------------------


def glorot_uniform(rng: np.random.Generator, shape: tuple, dtype=np.float32) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[-1]
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


def orthogonal(rng: np.random.Generator, shape: tuple, dtype=np.float32) -> np.ndarray:
    """Semi-orthogonal matrix via QR, for recurrent weights."""
    rows, cols = shape
    flat = rng.standard_normal((max(rows, cols), min(rows, cols)))
    q, r = np.linalg.qr(flat)
    q = q * np.sign(np.diag(r))
    if rows < cols:
        q = q.T
    return q[:rows, :cols].astype(dtype)


def _activation(name: str):
    if name not in ACTIVATIONS:
        raise ShapeMismatch(f"unknown activation '{name}'")
    return ACTIVATIONS[name]


# -- feed-forward -------------------------------------------------------------


def dense(x: Tensor, w: Tensor, b: Tensor, activation: str = "linear") -> Tensor:
    """activation(x @ w + b); x may be (batch, d) or (batch, time, d)."""
    if x.shape[-1] != w.shape[0]:
        raise ShapeMismatch(f"dense: input dim {x.shape[-1]} != weight rows {w.shape[0]}")
    return _activation(activation)(ad.add(ad.matmul(x, w), b))


# -- recurrent ----------------------------------------------------------------


@dataclass
class LstmCellParams:
    """Gate parameters, concatenated in (input, forget, cell, output) order."""

    wx: Tensor  # (input_dim, 4H)
    wh: Tensor  # (H, 4H)
    b: Tensor  # (4H,)

    @property
    def hidden_size(self) -> int:
        return self.wh.shape[0]


def init_lstm_params(rng: np.random.Generator, input_dim: int, hidden: int, dtype=np.float32) -> LstmCellParams:
    """Glorot input weights, orthogonal recurrent weights, forget bias 1."""
    wx = glorot_uniform(rng, (input_dim, 4 * hidden), dtype)
    wh = np.concatenate([orthogonal(rng, (hidden, hidden), dtype) for _ in range(4)], axis=1)
    b = np.zeros(4 * hidden, dtype=dtype)
    b[hidden : 2 * hidden] = 1.0
    return LstmCellParams(
        wx=Tensor(wx, requires_grad=True),
        wh=Tensor(wh, requires_grad=True),
        b=Tensor(b, requires_grad=True),
    )


def lstm_cell(x_t: Tensor, h_prev: Tensor, c_prev: Tensor, params: LstmCellParams) -> tuple[Tensor, Tensor]:
    """One step of the standard LSTM recurrence.

    i, f, o = sigmoid(gates), g = tanh(gate); c = f*c_prev + i*g;
    h = o * tanh(c).
    """
    hsz = params.hidden_size
    if x_t.shape[-1] != params.wx.shape[0]:
        raise ShapeMismatch(f"lstm_cell: input dim {x_t.shape[-1]} != {params.wx.shape[0]}")
    if h_prev.shape[-1] != hsz or c_prev.shape[-1] != hsz:
        raise ShapeMismatch("lstm_cell: state dims do not match the cell size")
    gates = ad.add(ad.add(ad.matmul(x_t, params.wx), ad.matmul(h_prev, params.wh)), params.b)
    i = ad.sigmoid(gates[:, 0 * hsz : 1 * hsz])
    f = ad.sigmoid(gates[:, 1 * hsz : 2 * hsz])
    g = ad.tanh(gates[:, 2 * hsz : 3 * hsz])
    o = ad.sigmoid(gates[:, 3 * hsz : 4 * hsz])
    c_t = ad.add(ad.mul(f, c_prev), ad.mul(i, g))
    h_t = ad.mul(o, ad.tanh(c_t))
    return h_t, c_t


def _run_lstm(x: Tensor, params: LstmCellParams, mask: Optional[np.ndarray], reverse: bool) -> list[Tensor]:
    batch, steps = x.shape[0], x.shape[1]
    hsz = params.hidden_size
    dtype = x.dtype
    h = Tensor(np.zeros((batch, hsz), dtype=dtype))
    c = Tensor(np.zeros((batch, hsz), dtype=dtype))
    order = range(steps - 1, -1, -1) if reverse else range(steps)
    outputs: list[Optional[Tensor]] = [None] * steps
    for t in order:
        h_new, c_new = lstm_cell(x[:, t, :], h, c, params)
        if mask is not None:
            m = Tensor(mask[:, t : t + 1].astype(dtype))
            keep = Tensor(1.0 - mask[:, t : t + 1].astype(dtype))
            h = ad.add(ad.mul(m, h_new), ad.mul(keep, h))
            c = ad.add(ad.mul(m, c_new), ad.mul(keep, c))
            outputs[t] = ad.mul(m, h)
        else:
            h, c = h_new, c_new
            outputs[t] = h
    return outputs  # type: ignore[return-value]


def bilstm(
    x: Tensor,
    fwd: LstmCellParams,
    bwd: Optional[LstmCellParams],
    mask: Optional[np.ndarray] = None,
) -> Tensor:
    """Bidirectional LSTM over (batch, time, d).

    Returns per-step [h_fwd; h_bwd] concatenations, shape (batch, time, 2H);
    with ``bwd=None`` it degrades to a unidirectional LSTM of width H.
    Masked steps propagate state unchanged and output zeros.
    """
    if x.ndim != 3:
        raise ShapeMismatch(f"bilstm expects (batch, time, d), got {x.shape}")
    if x.shape[1] == 0:
        raise EmptySequence("bilstm: zero-length sequence")
    steps = x.shape[1]
    fwd_out = _run_lstm(x, fwd, mask, reverse=False)
    if bwd is None:
        per_step = fwd_out
    else:
        bwd_out = _run_lstm(x, bwd, mask, reverse=True)
        per_step = [ad.concat([fwd_out[t], bwd_out[t]], axis=1) for t in range(steps)]
    width = per_step[0].shape[1]
    return ad.concat([ad.reshape(s, (x.shape[0], 1, width)) for s in per_step], axis=1)


# -- attention -----------------------------------------------------------------


def self_attention(
    x: Tensor,
    wq: Tensor,
    wk: Tensor,
    wv: Tensor,
    mask: Optional[np.ndarray] = None,
    return_weights: bool = False,
):
    """Single-head scaled dot-product self-attention over (batch, time, d).

    Padding positions are excluded as keys (score -inf pre-softmax) and
    zeroed as queries in the output.
    """
    if x.ndim != 3:
        raise ShapeMismatch(f"self_attention expects (batch, time, d), got {x.shape}")
    d_k = wq.shape[1]
    q = ad.matmul(x, wq)
    k = ad.matmul(x, wk)
    v = ad.matmul(x, wv)
    scores = ad.mul(ad.matmul(q, ad.transpose(k, (0, 2, 1))), Tensor(1.0 / math.sqrt(d_k)))
    if mask is not None:
        bias = ((1.0 - mask) * _MASKED_SCORE).astype(x.dtype)[:, None, :]
        scores = ad.add(scores, Tensor(bias))
    weights = ad.softmax(scores, axis=-1)
    out = ad.matmul(weights, v)
    if mask is not None:
        out = ad.mul(out, Tensor(mask.astype(x.dtype)[:, :, None]))
    if return_weights:
        return out, weights
    return out


# -- convolution ----------------------------------------------------------------


def conv1d(x: Tensor, w: Tensor, b: Tensor, activation: str = "linear") -> Tensor:
    """1-D cross-correlation with same-padding over (batch, time, in_ch).

    `w` is (kernel, in_ch, out_ch); implemented as a sum of shifted matmuls.
    """
    if x.ndim != 3 or w.ndim != 3:
        raise ShapeMismatch(f"conv1d expects 3-D input and kernel, got {x.shape}, {w.shape}")
    if x.shape[2] != w.shape[1]:
        raise ShapeMismatch(f"conv1d: channels {x.shape[2]} != kernel in-channels {w.shape[1]}")
    batch, steps, _ = x.shape
    ksz = w.shape[0]
    pad_left = (ksz - 1) // 2
    pad_right = ksz - 1 - pad_left
    parts = []
    if pad_left:
        parts.append(Tensor(np.zeros((batch, pad_left, x.shape[2]), dtype=x.dtype)))
    parts.append(x)
    if pad_right:
        parts.append(Tensor(np.zeros((batch, pad_right, x.shape[2]), dtype=x.dtype)))
    xp = ad.concat(parts, axis=1) if len(parts) > 1 else x
    acc = None
    for kpos in range(ksz):
        term = ad.matmul(xp[:, kpos : kpos + steps, :], w[kpos])
        acc = term if acc is None else ad.add(acc, term)
    return _activation(activation)(ad.add(acc, b))


# -- pooling ---------------------------------------------------------------------


def global_average_pool(x: Tensor, mask: Optional[np.ndarray] = None) -> Tensor:
    """Mean over unmasked time steps of (batch, time, d) -> (batch, d)."""
    if x.ndim != 3:
        raise ShapeMismatch(f"global_average_pool expects (batch, time, d), got {x.shape}")
    if x.shape[1] == 0:
        raise EmptySequence("global_average_pool: zero-length sequence")
    if mask is None:
        return ad.reduce_mean(x, axis=1)
    counts = mask.sum(axis=1)
    if np.any(counts == 0):
        raise AllMasked("global_average_pool: a row has no unmasked steps")
    weighted = ad.mul(x, Tensor(mask.astype(x.dtype)[:, :, None]))
    total = ad.reduce_sum(weighted, axis=1)
    return ad.mul(total, Tensor((1.0 / counts).astype(x.dtype)[:, None]))


# -- loss -------------------------------------------------------------------------


def cross_entropy(probs: Tensor, targets: np.ndarray) -> Tensor:
    """Mean categorical cross-entropy of probability rows vs one-hot targets.

    Probabilities are clipped to [1e-12, 1] before the log; rows must sum
    to 1 within 1e-6.
    """
    targets = np.asarray(targets)
    if probs.shape != targets.shape:
        raise ShapeMismatch(f"cross_entropy: probs {probs.shape} vs targets {targets.shape}")
    row_sums = probs.data.sum(axis=-1)
    if np.any(np.abs(row_sums - 1.0) > 1e-6):
        raise NumericFailure("cross_entropy", "probability rows do not sum to 1")
    logp = ad.log(ad.clip(probs, 1e-12, 1.0))
    per_row = ad.neg(ad.reduce_sum(ad.mul(logp, Tensor(targets.astype(probs.dtype))), axis=-1))
    return ad.reduce_mean(per_row)
