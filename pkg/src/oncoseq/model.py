"""Network numerics: embedding lookup, bidirectional LSTM, dense layers,
class-weighted softmax, and exact gradients through time.

Everything is float64 numpy. Architecture (per sequence of token ids):

    embed -> forward LSTM + backward LSTM -> pooled state -> dense+ReLU
          -> dense -> class-weighted softmax

The pooled state concatenates the forward hidden state after the last
non-PAD token with the backward hidden state at position 0. PAD
positions are masked out of the recurrence (states pass through
unchanged), so appending padding never changes the pooled state, and PAD
rows receive zero gradient. The class weights scale the softmax
exponents during training only; inference uses uniform weights.

LSTM gate parameters are packed along the last axis in the fixed order
(input, forget, cell-candidate, output), i.e. ``w_x[:, 0:h]`` is the
input gate's input weight, ``w_x[:, h:2h]`` the forget gate's, and so on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveWeightError, NumericError, ShapeMismatchError
from .preprocess import PAD_ID

GATE_ORDER = ("input", "forget", "candidate", "output")


@dataclass
class ModelConfig:
    embedding_dim: int = 256
    hidden_dim: int = 64
    dense_dim: int = 64
    seed: int = 0


@dataclass
class EmbeddingParams:
    weight: np.ndarray  # (n, k); row PAD_ID is held at zero

    @property
    def n(self) -> int:
        return self.weight.shape[0]

    @property
    def k(self) -> int:
        return self.weight.shape[1]


@dataclass
class LstmParams:
    w_x: np.ndarray  # (k, 4h), gates packed per GATE_ORDER
    w_h: np.ndarray  # (h, 4h)
    b: np.ndarray  # (4h,)

    @property
    def hidden(self) -> int:
        return self.w_h.shape[0]

    def gate(self, which: str, array: str = "w_x") -> np.ndarray:
        """View of one gate's parameters; ``array`` is w_x, w_h, or b."""
        h = self.hidden
        g = GATE_ORDER.index(which)
        return getattr(self, array)[..., g * h : (g + 1) * h]


@dataclass
class DenseParams:
    w: np.ndarray  # (in, out)
    b: np.ndarray  # (out,)


@dataclass
class ModelParams:
    embedding: EmbeddingParams
    forward_lstm: LstmParams
    backward_lstm: LstmParams
    dense1: DenseParams
    dense2: DenseParams
    class_weights: np.ndarray  # (K,), training-time softmax weights

    @property
    def n_classes(self) -> int:
        return self.dense2.w.shape[1]


def named_arrays(params: ModelParams) -> list[tuple[str, np.ndarray]]:
    """Trainable arrays in a fixed order (class_weights are not trained)."""
    return [
        ("embedding", params.embedding.weight),
        ("fwd.w_x", params.forward_lstm.w_x),
        ("fwd.w_h", params.forward_lstm.w_h),
        ("fwd.b", params.forward_lstm.b),
        ("bwd.w_x", params.backward_lstm.w_x),
        ("bwd.w_h", params.backward_lstm.w_h),
        ("bwd.b", params.backward_lstm.b),
        ("dense1.w", params.dense1.w),
        ("dense1.b", params.dense1.b),
        ("dense2.w", params.dense2.w),
        ("dense2.b", params.dense2.b),
    ]


def _uniform(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape)


def _init_lstm(rng: np.random.Generator, k: int, h: int) -> LstmParams:
    b = np.zeros(4 * h)
    b[h : 2 * h] = 1.0  # forget-gate bias starts open
    return LstmParams(
        w_x=_uniform(rng, k, (k, 4 * h)),
        w_h=_uniform(rng, h, (h, 4 * h)),
        b=b,
    )


def init_params(vocab_size: int, n_classes: int, cfg: ModelConfig) -> ModelParams:
    """Seeded initialization: embeddings uniform(-0.05, 0.05) with the PAD
    row zeroed, LSTM/dense weights uniform(+-1/sqrt(fan_in)), biases zero
    except the forget gate's (1.0)."""
    rng = np.random.default_rng(cfg.seed)
    k, h, d = cfg.embedding_dim, cfg.hidden_dim, cfg.dense_dim
    emb = rng.uniform(-0.05, 0.05, size=(vocab_size, k))
    emb[PAD_ID, :] = 0.0
    return ModelParams(
        embedding=EmbeddingParams(emb),
        forward_lstm=_init_lstm(rng, k, h),
        backward_lstm=_init_lstm(rng, k, h),
        dense1=DenseParams(w=_uniform(rng, 2 * h, (2 * h, d)), b=np.zeros(d)),
        dense2=DenseParams(w=_uniform(rng, d, (d, n_classes)), b=np.zeros(n_classes)),
        class_weights=np.ones(n_classes),
    )


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _check_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericError(f"non-finite values in {name}")


# ---------------------------------------------------------------------------
# Embedding


def embed(token_ids, params: EmbeddingParams) -> np.ndarray:
    """Row lookup: token t selects row t of the embedding weight, which is
    exactly the matrix product of a one-hot vector with the weights."""
    ids = np.asarray(token_ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= params.n):
        raise IndexError(
            f"token id out of range [0, {params.n}): {int(ids.min())}..{int(ids.max())}"
        )
    out = params.weight[ids]
    _check_finite("embedding output", out)
    return out


# ---------------------------------------------------------------------------
# LSTM


def _lstm_scan(x: np.ndarray, p: LstmParams, mask: np.ndarray):
    """Masked LSTM over a batch, in the given time order.

    x: (B, T, k); mask: (B, T) with 1.0 at real tokens. At masked
    positions the hidden and cell states pass through unchanged.
    Returns hidden states (B, T, h) and the cache for the backward pass.
    """
    batch, steps, k = x.shape
    if k != p.w_x.shape[0]:
        raise ShapeMismatchError(
            f"input width {k} does not match LSTM input weights {p.w_x.shape}"
        )
    h = p.hidden
    xp = x.reshape(batch * steps, k) @ p.w_x
    xp = (xp + p.b).reshape(batch, steps, 4 * h)

    gates_i = np.empty((batch, steps, h))
    gates_f = np.empty((batch, steps, h))
    gates_g = np.empty((batch, steps, h))
    gates_o = np.empty((batch, steps, h))
    cell_cand = np.empty((batch, steps, h))
    cell = np.empty((batch, steps, h))
    hidden = np.empty((batch, steps, h))

    h_prev = np.zeros((batch, h))
    c_prev = np.zeros((batch, h))
    for t in range(steps):
        a = xp[:, t, :] + h_prev @ p.w_h
        gi = _sigmoid(a[:, :h])
        gf = _sigmoid(a[:, h : 2 * h])
        gg = np.tanh(a[:, 2 * h : 3 * h])
        go = _sigmoid(a[:, 3 * h :])
        cc = gf * c_prev + gi * gg
        hc = go * np.tanh(cc)
        m = mask[:, t : t + 1]
        c_t = m * cc + (1.0 - m) * c_prev
        h_t = m * hc + (1.0 - m) * h_prev
        gates_i[:, t] = gi
        gates_f[:, t] = gf
        gates_g[:, t] = gg
        gates_o[:, t] = go
        cell_cand[:, t] = cc
        cell[:, t] = c_t
        hidden[:, t] = h_t
        h_prev, c_prev = h_t, c_t

    cache = {
        "x": x,
        "mask": mask,
        "i": gates_i,
        "f": gates_f,
        "g": gates_g,
        "o": gates_o,
        "cc": cell_cand,
        "c": cell,
        "h": hidden,
    }
    return hidden, cache


def _lstm_backward(d_hidden: np.ndarray, p: LstmParams, cache: dict):
    """Exact gradients through the masked recurrence.

    d_hidden: (B, T, h) gradient on the hidden-state outputs, in the same
    time order the cache was produced in. Returns (dx, dw_x, dw_h, db).
    """
    x, mask = cache["x"], cache["mask"]
    batch, steps, k = x.shape
    h = p.hidden
    d_gates = np.zeros((batch, steps, 4 * h))
    dh_rec = np.zeros((batch, h))
    dc_rec = np.zeros((batch, h))

    for t in range(steps - 1, -1, -1):
        m = mask[:, t : t + 1]
        dh_total = d_hidden[:, t] + dh_rec
        dh_cand = m * dh_total
        dh_pass = (1.0 - m) * dh_total
        dc_cand = m * dc_rec
        dc_pass = (1.0 - m) * dc_rec

        tc = np.tanh(cache["cc"][:, t])
        d_o = dh_cand * tc
        dc_cand = dc_cand + dh_cand * cache["o"][:, t] * (1.0 - tc * tc)

        c_prev = cache["c"][:, t - 1] if t > 0 else np.zeros((batch, h))
        d_f = dc_cand * c_prev
        d_i = dc_cand * cache["g"][:, t]
        d_g = dc_cand * cache["i"][:, t]
        dc_prev = dc_cand * cache["f"][:, t] + dc_pass

        gi, gf, gg, go = (cache[key][:, t] for key in ("i", "f", "g", "o"))
        d_gates[:, t, :h] = d_i * gi * (1.0 - gi)
        d_gates[:, t, h : 2 * h] = d_f * gf * (1.0 - gf)
        d_gates[:, t, 2 * h : 3 * h] = d_g * (1.0 - gg * gg)
        d_gates[:, t, 3 * h :] = d_o * go * (1.0 - go)

        dh_rec = d_gates[:, t] @ p.w_h.T + dh_pass
        dc_rec = dc_prev

    h_prev_all = np.zeros_like(cache["h"])
    h_prev_all[:, 1:] = cache["h"][:, :-1]
    flat_dg = d_gates.reshape(batch * steps, 4 * h)
    dw_x = x.reshape(batch * steps, k).T @ flat_dg
    dw_h = h_prev_all.reshape(batch * steps, h).T @ flat_dg
    db = flat_dg.sum(axis=0)
    dx = (flat_dg @ p.w_x.T).reshape(batch, steps, k)
    return dx, dw_x, dw_h, db


def lstm_forward(
    x: np.ndarray, p: LstmParams, reverse: bool = False, mask: np.ndarray | None = None
) -> np.ndarray:
    """Hidden states for one sequence, row t aligned with input row t.

    With ``reverse`` the recurrence runs over timesteps T-1..0 and the
    output is flipped back. ``mask`` marks real tokens (padding must be a
    suffix of the sequence); masked positions carry states through.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeMismatchError(f"expected (T, k) input, got shape {x.shape}")
    m = np.ones(x.shape[0]) if mask is None else np.asarray(mask, dtype=np.float64)
    if m.shape != (x.shape[0],):
        raise ShapeMismatchError("mask length does not match sequence length")
    xb, mb = x[None, :, :], m[None, :]
    if reverse:
        hidden, _ = _lstm_scan(xb[:, ::-1], p, mb[:, ::-1])
        hidden = hidden[:, ::-1]
    else:
        hidden, _ = _lstm_scan(xb, p, mb)
    out = hidden[0]
    _check_finite("lstm hidden states", out)
    return out


def bilstm(
    x: np.ndarray,
    fwd: LstmParams,
    bwd: LstmParams,
    mask: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-timestep [forward | backward] states plus the pooled vector.

    The pooled vector concatenates the forward state after the last
    non-PAD timestep with the backward state at timestep 0.
    """
    if fwd.hidden != bwd.hidden:
        raise ShapeMismatchError("forward/backward hidden widths differ")
    h_f = lstm_forward(x, fwd, reverse=False, mask=mask)
    h_b = lstm_forward(x, bwd, reverse=True, mask=mask)
    states = np.concatenate([h_f, h_b], axis=1)
    pooled = np.concatenate([h_f[-1], h_b[0]])
    return states, pooled


# ---------------------------------------------------------------------------
# Softmax and the full forward pass


def weighted_softmax(v, w) -> np.ndarray:
    """Softmax over per-class products v_i * w_i, stabilized by subtracting
    the largest product before exponentiation."""
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if v.shape != w.shape:
        raise ShapeMismatchError("scores and weights must have equal shape")
    if np.any(w <= 0):
        raise NonPositiveWeightError("softmax class weights must be strictly positive")
    u = v * w
    u = u - u.max(axis=-1, keepdims=True)
    e = np.exp(u)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_batch(tokens: np.ndarray, params: ModelParams, training: bool):
    """Probabilities for a (B, T) token batch plus caches for backprop."""
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.ndim != 2:
        raise ShapeMismatchError(f"expected (B, T) tokens, got shape {tokens.shape}")
    mask = (tokens != PAD_ID).astype(np.float64)
    x = embed(tokens, params.embedding)

    h_f, cache_f = _lstm_scan(x, params.forward_lstm, mask)
    h_b_rev, cache_b = _lstm_scan(x[:, ::-1], params.backward_lstm, mask[:, ::-1])

    # pass-through masking freezes the forward state from the last real
    # token onward, so the final position holds the last non-PAD state
    pooled = np.concatenate([h_f[:, -1, :], h_b_rev[:, -1, :]], axis=1)

    z1 = pooled @ params.dense1.w + params.dense1.b
    r1 = np.maximum(z1, 0.0)
    z2 = r1 @ params.dense2.w + params.dense2.b
    w = params.class_weights if training else np.ones_like(params.class_weights)
    probs = weighted_softmax(z2, np.broadcast_to(w, z2.shape))
    cache = {
        "tokens": tokens,
        "mask": mask,
        "f": cache_f,
        "b": cache_b,
        "pooled": pooled,
        "z1": z1,
        "r1": r1,
        "probs": probs,
        "softmax_w": w,
    }
    return probs, cache


def forward(tokens, params: ModelParams, training: bool = False) -> np.ndarray:
    """Class probabilities for one token sequence (or a (B, T) batch).

    Training mode applies the class weights inside the softmax; inference
    uses uniform weights so reported probabilities are unweighted.
    """
    arr = np.asarray(tokens, dtype=np.int64)
    single = arr.ndim == 1
    probs, _ = _forward_batch(arr[None, :] if single else arr, params, training)
    _check_finite("class probabilities", probs)
    return probs[0] if single else probs


def loss_and_grads(
    batch: tuple[np.ndarray, np.ndarray], params: ModelParams
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean weighted-softmax cross-entropy over the batch and its exact
    gradients, keyed like :func:`named_arrays`.

    The class weights enter the softmax exponents (training mode); the PAD
    embedding row is frozen, so its gradient is zeroed.
    """
    tokens, labels = batch
    tokens = np.asarray(tokens, dtype=np.int64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(labels) == 0:
        raise ShapeMismatchError("empty batch")
    probs, cache = _forward_batch(tokens, params, training=True)
    batch_size = len(labels)
    picked = probs[np.arange(batch_size), labels]
    loss = float(-np.log(np.maximum(picked, 1e-300)).mean())

    # d loss / d products = (p - onehot) / B; chain through the per-class
    # weight multiplying the logits
    d_u = probs.copy()
    d_u[np.arange(batch_size), labels] -= 1.0
    d_u /= batch_size
    d_z2 = d_u * cache["softmax_w"]

    d_w2 = cache["r1"].T @ d_z2
    d_b2 = d_z2.sum(axis=0)
    d_r1 = d_z2 @ params.dense2.w.T
    d_z1 = d_r1 * (cache["z1"] > 0)
    d_w1 = cache["pooled"].T @ d_z1
    d_b1 = d_z1.sum(axis=0)
    d_pooled = d_z1 @ params.dense1.w.T

    h = params.forward_lstm.hidden
    steps = tokens.shape[1]
    d_hf = np.zeros_like(cache["f"]["h"])
    d_hf[:, steps - 1, :] = d_pooled[:, :h]
    d_hb = np.zeros_like(cache["b"]["h"])
    d_hb[:, steps - 1, :] = d_pooled[:, h:]

    dx_f, dwx_f, dwh_f, db_f = _lstm_backward(d_hf, params.forward_lstm, cache["f"])
    dx_b_rev, dwx_b, dwh_b, db_b = _lstm_backward(d_hb, params.backward_lstm, cache["b"])
    dx = dx_f + dx_b_rev[:, ::-1]

    d_emb = np.zeros_like(params.embedding.weight)
    np.add.at(d_emb, tokens.ravel(), dx.reshape(-1, dx.shape[-1]))
    d_emb[PAD_ID, :] = 0.0

    grads = {
        "embedding": d_emb,
        "fwd.w_x": dwx_f,
        "fwd.w_h": dwh_f,
        "fwd.b": db_f,
        "bwd.w_x": dwx_b,
        "bwd.w_h": dwh_b,
        "bwd.b": db_b,
        "dense1.w": d_w1,
        "dense1.b": d_b1,
        "dense2.w": d_w2,
        "dense2.b": d_b2,
    }
    if not np.isfinite(loss):
        raise NumericError("non-finite loss")
    for name, g in grads.items():
        _check_finite(f"gradient {name}", g)
    return loss, grads
