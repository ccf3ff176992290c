"""A small deterministic numpy kernel for character-level BiLSTM taggers.

Everything is float64.  Gate rows of every LSTM weight matrix are stacked in
the fixed order input, forget, cell, output (``GATE_ORDER``), each block
``H`` rows tall.

Batches are time-major: arrays of shape ``(T, B, ...)`` with a ``(T, B)``
0/1 mask.  At masked positions the recurrent state is carried unchanged,
so a right-padded sequence produces exactly the states it would produce
unpadded, in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .errors import ContractViolation, TrainingError

GATE_ORDER = ("input", "forget", "cell", "output")
DIRECTIONS = ("forward", "backward")

Params = Dict[str, np.ndarray]


def sigmoid(x):
    return expit(x)


@dataclass
class LstmCellParams:
    input_weights: np.ndarray  # (4H, E)
    recurrent_weights: np.ndarray  # (4H, H)
    bias: np.ndarray  # (4H,)

    def __post_init__(self):
        W, U, b = self.input_weights, self.recurrent_weights, self.bias
        if W.ndim != 2 or U.ndim != 2 or b.ndim != 1:
            raise ContractViolation("LSTM weights must be matrices and the bias a vector")
        four_h = U.shape[0]
        if four_h % 4 or U.shape != (four_h, four_h // 4):
            raise ContractViolation(f"recurrent weights must be (4H, H), got {U.shape}")
        if W.shape[0] != four_h or b.shape != (four_h,):
            raise ContractViolation(
                f"inconsistent LSTM shapes: W {W.shape}, U {U.shape}, b {b.shape}"
            )

    @property
    def hidden_size(self):
        return self.recurrent_weights.shape[1]

    @property
    def input_size(self):
        return self.input_weights.shape[1]


def init_lstm_params(rng: np.random.Generator, input_size: int, hidden_size: int) -> LstmCellParams:
    """Uniform(-sqrt(1/H), sqrt(1/H)) weights, zero bias except forget gate = 1."""
    bound = np.sqrt(1.0 / hidden_size)
    W = rng.uniform(-bound, bound, size=(4 * hidden_size, input_size))
    U = rng.uniform(-bound, bound, size=(4 * hidden_size, hidden_size))
    b = np.zeros(4 * hidden_size)
    b[hidden_size : 2 * hidden_size] = 1.0
    return LstmCellParams(W, U, b)


def _gates(z, H):
    i = sigmoid(z[..., :H])
    f = sigmoid(z[..., H : 2 * H])
    g = np.tanh(z[..., 2 * H : 3 * H])
    o = sigmoid(z[..., 3 * H :])
    return i, f, g, o


def lstm_cell_step(x, h_prev, c_prev, params: LstmCellParams):
    """One LSTM step on single vectors; returns ``(h, c)``."""
    x, h_prev, c_prev = (np.asarray(a, dtype=np.float64) for a in (x, h_prev, c_prev))
    H = params.hidden_size
    if x.shape != (params.input_size,) or h_prev.shape != (H,) or c_prev.shape != (H,):
        raise ContractViolation(
            f"lstm_cell_step expects x ({params.input_size},), h and c ({H},); "
            f"got {x.shape}, {h_prev.shape}, {c_prev.shape}"
        )
    z = params.input_weights @ x + params.recurrent_weights @ h_prev + params.bias
    i, f, g, o = _gates(z, H)
    c = f * c_prev + i * g
    return o * np.tanh(c), c


# ---------------------------------------------------------------------------
# Sequence-level forward/backward
# ---------------------------------------------------------------------------


def lstm_forward(xs, mask, params: LstmCellParams, reverse=False):
    """Run one direction over a padded batch.

    ``xs`` is ``(T, B, E)``, ``mask`` is ``(T, B)``.  Returns the hidden
    states ``(T, B, H)`` in input order and a cache for :func:`lstm_backward`.
    """
    if reverse:
        xs, mask = xs[::-1], mask[::-1]
    T, B, _ = xs.shape
    H = params.hidden_size
    pre = xs @ params.input_weights.T + params.bias
    U_T = params.recurrent_weights.T

    hs = np.empty((T, B, H))
    gates = np.empty((T, B, 4 * H))
    tanh_c = np.empty((T, B, H))
    h_prevs = np.empty((T, B, H))
    c_prevs = np.empty((T, B, H))
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    for t in range(T):
        z = pre[t] + h @ U_T
        i, f, g, o = _gates(z, H)
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        m = mask[t][:, None]
        h_prevs[t] = h
        c_prevs[t] = c
        gates[t] = np.concatenate([i, f, g, o], axis=1)
        tanh_c[t] = tc
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
        hs[t] = h
    cache = (xs, mask, params, gates, tanh_c, h_prevs, c_prevs, reverse)
    return (hs[::-1] if reverse else hs), cache


def lstm_backward(dhs, cache):
    """Backpropagate through time.  Returns ``(dxs, grads)`` where ``grads``
    maps ``input_weights``/``recurrent_weights``/``bias`` to arrays."""
    xs, mask, params, gates, tanh_c, h_prevs, c_prevs, reverse = cache
    if reverse:
        dhs = dhs[::-1]
    T, B, H = dhs.shape
    U = params.recurrent_weights
    dU = np.zeros_like(U)
    dz_all = np.empty((T, B, 4 * H))
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in range(T - 1, -1, -1):
        m = mask[t][:, None]
        i = gates[t, :, :H]
        f = gates[t, :, H : 2 * H]
        g = gates[t, :, 2 * H : 3 * H]
        o = gates[t, :, 3 * H :]
        tc = tanh_c[t]
        dh = dhs[t] + dh_next
        dh_new = m * dh
        dc_new = m * dc_next + dh_new * o * (1.0 - tc * tc)
        dz = np.concatenate(
            [
                dc_new * g * i * (1.0 - i),
                dc_new * c_prevs[t] * f * (1.0 - f),
                dc_new * i * (1.0 - g * g),
                dh_new * tc * o * (1.0 - o),
            ],
            axis=1,
        )
        dz_all[t] = dz
        dU += dz.T @ h_prevs[t]
        dh_next = dz @ U + (1.0 - m) * dh
        dc_next = dc_new * f + (1.0 - m) * dc_next
    dW = np.einsum("tbk,tbe->ke", dz_all, xs)
    db = dz_all.sum(axis=(0, 1))
    dxs = dz_all @ params.input_weights
    if reverse:
        dxs = dxs[::-1]
    return dxs, {"input_weights": dW, "recurrent_weights": dU, "bias": db}


def bilstm_forward(xs, mask, layers: Sequence[Tuple[LstmCellParams, LstmCellParams]]):
    """Stacked bidirectional encoder over a padded batch -> ``(T, B, 2H)``."""
    caches = []
    out = xs
    for fwd, bwd in layers:
        if out.shape[-1] != fwd.input_size or out.shape[-1] != bwd.input_size:
            raise ContractViolation(
                f"layer expects inputs of size {fwd.input_size}, got {out.shape[-1]}"
            )
        hf, cf = lstm_forward(out, mask, fwd)
        hb, cb = lstm_forward(out, mask, bwd, reverse=True)
        caches.append((cf, cb, fwd.hidden_size))
        out = np.concatenate([hf, hb], axis=-1)
    return out, caches


def bilstm_backward(dout, caches):
    """Returns ``(dxs, [(forward_grads, backward_grads), ...])``."""
    grads = []
    for cf, cb, H in reversed(caches):
        dxf, gf = lstm_backward(dout[..., :H], cf)
        dxb, gb = lstm_backward(dout[..., H:], cb)
        dout = dxf + dxb
        grads.append((gf, gb))
    grads.reverse()
    return dout, grads


def bilstm_encode(inputs, layers):
    """Encode a single unpadded sequence of input vectors -> ``(T, 2H)``."""
    if not layers:
        raise ContractViolation("bilstm_encode needs at least one layer")
    xs = np.asarray(inputs, dtype=np.float64)
    if xs.size == 0:
        return np.zeros((0, 2 * layers[-1][0].hidden_size))
    out, _ = bilstm_forward(xs[:, None, :], np.ones((xs.shape[0], 1)), layers)
    return out[:, 0, :]


def linear_logits(inputs, weight, bias):
    """``logit_t = weight . input_t + bias`` over the last axis of ``inputs``."""
    inputs = np.asarray(inputs, dtype=np.float64)
    weight = np.asarray(weight, dtype=np.float64)
    if weight.ndim == 2:
        if weight.shape[0] != 1:
            raise ContractViolation(f"head weight must be (1, D), got {weight.shape}")
        weight = weight[0]
    if inputs.shape[-1] != weight.shape[0]:
        raise ContractViolation(
            f"head expects inputs of size {weight.shape[0]}, got {inputs.shape[-1]}"
        )
    return inputs @ weight + float(np.asarray(bias).reshape(-1)[0])


def _bce_terms(z, y):
    return np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))


def bce_with_logits(logits, labels, mask=None) -> float:
    """Mean numerically stable binary cross-entropy over masked positions
    (0.0 when nothing is selected)."""
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    m = np.ones_like(z) if mask is None else np.asarray(mask, dtype=np.float64)
    if z.shape != y.shape or z.shape != m.shape:
        raise ContractViolation(
            f"logits/labels/mask shapes differ: {z.shape} {y.shape} {m.shape}"
        )
    n = m.sum()
    if n == 0:
        return 0.0
    return float((_bce_terms(z, y) * m).sum() / n)


def bce_with_logits_grad(logits, labels, mask):
    """d(mean masked BCE)/d logits."""
    n = mask.sum()
    if n == 0:
        return np.zeros_like(logits)
    return (sigmoid(logits) - labels) * mask / n


# ---------------------------------------------------------------------------
# Full character tagger graph: embedding -> BiLSTM stack -> linear -> BCE
# ---------------------------------------------------------------------------


def layer_key(layer, direction, name):
    return f"layer{layer}.{direction}.{name}"


def layer_params(params: Params, num_layers: int):
    return [
        tuple(
            LstmCellParams(
                params[layer_key(l, d, "input_weights")],
                params[layer_key(l, d, "recurrent_weights")],
                params[layer_key(l, d, "bias")],
            )
            for d in DIRECTIONS
        )
        for l in range(num_layers)
    ]


def init_tagger_params(rng, vocab_size, embedding_dim, hidden_dim, num_layers=2) -> Params:
    """Parameters for a character BiLSTM with a single-logit head."""
    bound = np.sqrt(1.0 / hidden_dim)
    params = {"embedding": rng.uniform(-bound, bound, size=(vocab_size, embedding_dim))}
    in_size = embedding_dim
    for l in range(num_layers):
        for d in DIRECTIONS:
            cell = init_lstm_params(rng, in_size, hidden_dim)
            params[layer_key(l, d, "input_weights")] = cell.input_weights
            params[layer_key(l, d, "recurrent_weights")] = cell.recurrent_weights
            params[layer_key(l, d, "bias")] = cell.bias
        in_size = 2 * hidden_dim
    params["head.weight"] = rng.uniform(-bound, bound, size=(1, 2 * hidden_dim))
    params["head.bias"] = np.zeros(1)
    return params


def count_layers(params: Params) -> int:
    n = 0
    while layer_key(n, "forward", "bias") in params:
        n += 1
    return n


def tagger_logits(params: Params, ids, mask):
    """Per-character logits ``(T, B)`` for a padded batch of id sequences."""
    layers = layer_params(params, count_layers(params))
    xs = params["embedding"][ids]
    out, _ = bilstm_forward(xs, mask, layers)
    return linear_logits(out, params["head.weight"], params["head.bias"])


def tagger_loss_and_grads(params: Params, ids, labels, mask):
    """Forward the whole graph and backpropagate.

    Returns ``(loss, grads)`` with one gradient array per entry of
    ``params`` (same shapes).  Padding positions (mask 0) contribute nothing.
    """
    num_layers = count_layers(params)
    layers = layer_params(params, num_layers)
    mask = np.asarray(mask, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    xs = params["embedding"][ids]
    out, caches = bilstm_forward(xs, mask, layers)
    w = params["head.weight"]
    logits = out @ w[0] + params["head.bias"][0]
    loss = bce_with_logits(logits, labels, mask)

    dlogits = bce_with_logits_grad(logits, labels, mask)
    grads = {
        "head.weight": np.einsum("tb,tbd->d", dlogits, out)[None, :],
        "head.bias": np.array([dlogits.sum()]),
    }
    dout = dlogits[..., None] * w[0]
    dxs, layer_grads = bilstm_backward(dout, caches)
    for l, pair in enumerate(layer_grads):
        for d, g in zip(DIRECTIONS, pair):
            for name, arr in g.items():
                grads[layer_key(l, d, name)] = arr
    demb = np.zeros_like(params["embedding"])
    np.add.at(demb, ids, dxs)
    grads["embedding"] = demb
    return loss, grads


# ---------------------------------------------------------------------------
# Optimisation
# ---------------------------------------------------------------------------


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    clip_norm: Optional[float] = None
    t: int = 0
    first_moment: Params = field(default_factory=dict)
    second_moment: Params = field(default_factory=dict)


def global_norm(grads: Params) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))


def adam_step(params: Params, grads: Params, state: AdamState):
    """One bias-corrected Adam update, in place.  Returns ``(params, state)``.

    With ``state.clip_norm`` set, gradients are rescaled to that global norm
    before the moment update when they exceed it.
    """
    for name in params:
        g = grads[name]
        if g.shape != params[name].shape:
            raise ContractViolation(f"gradient for {name} has shape {g.shape}, expected {params[name].shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient for parameter {name}")
    scale = 1.0
    if state.clip_norm is not None:
        norm = global_norm({k: grads[k] for k in params})
        if norm > state.clip_norm:
            scale = state.clip_norm / norm

    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for name, p in params.items():
        g = grads[name] * scale
        m = state.first_moment.get(name)
        if m is None:
            m = state.first_moment[name] = np.zeros_like(p)
            state.second_moment[name] = np.zeros_like(p)
        v = state.second_moment[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
    return params, state


def gradient_check(
    loss_and_grads: Callable[[Params], Tuple[float, Params]],
    params: Params,
    step: float = 1e-5,
    samples: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Largest relative error between analytic and central-difference
    gradients, ``|a - n| / max(|a|, |n|, 1e-8)``.

    ``samples`` limits the check to that many coordinates drawn uniformly
    without replacement; ``None`` checks every coordinate.  ``params`` is
    restored before returning.
    """
    if step <= 0:
        raise ContractViolation("step must be positive")
    _, analytic = loss_and_grads(params)
    coords = [(name, idx) for name in sorted(params) for idx in range(params[name].size)]
    if samples is not None and samples < len(coords):
        rng = np.random.default_rng(seed)
        picked = rng.choice(len(coords), size=samples, replace=False)
        coords = [coords[k] for k in sorted(picked)]
    worst = 0.0
    for name, idx in coords:
        flat = params[name].reshape(-1)
        orig = flat[idx]
        flat[idx] = orig + step
        plus, _ = loss_and_grads(params)
        flat[idx] = orig - step
        minus, _ = loss_and_grads(params)
        flat[idx] = orig
        numeric = (plus - minus) / (2.0 * step)
        a = float(analytic[name].reshape(-1)[idx])
        err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
        worst = max(worst, err)
    return worst
