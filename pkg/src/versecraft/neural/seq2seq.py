"""Dual-BiLSTM encoder with an attention (or fixed-vector) LSTM decoder.

The keyword and the preceding text are encoded by separate BiLSTMs whose
outputs are concatenated along the time axis. Each decoder step consumes the
embedding of the previous token concatenated with a context vector: either an
additive-attention mix of the encoder states or, in fixed mode, the last
encoder state reused at every step. The decoder's initial hidden state is an
affine projection of that last encoder state.

Forward passes record caches; backward() replays them in reverse and returns
exact gradients for every parameter, embedding included.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..corpus import END_ID, START_ID, Batch, Vocab
from .lstm import LstmCell, bilstm_backward, bilstm_forward, glorot_uniform, \
    lstm_step_backward, lstm_step_forward


class Mode(Enum):
    ATTENTION = "attention"
    FIXED_C = "fixed_c"


# Parameter names in the flat model dict; the checkpoint manifest uses them.
PARAM_NAMES = (
    "embedding",
    "kw_fw_w", "kw_fw_b", "kw_bw_w", "kw_bw_b",
    "ctx_fw_w", "ctx_fw_b", "ctx_bw_w", "ctx_bw_b",
    "dec_w", "dec_b",
    "attn_ws", "attn_wh", "attn_v",
    "init_w", "init_b",
    "proj_w", "proj_b",
)


@dataclass
class Seq2SeqModel:
    vocab: Vocab
    mode: Mode
    embed_dim: int
    hidden: int
    params: dict[str, np.ndarray]

    @classmethod
    def create(
        cls,
        vocab: Vocab,
        embed_dim: int,
        hidden: int = 128,
        mode: Mode = Mode.ATTENTION,
        embedding: np.ndarray | None = None,
        seed: int = 0,
        dtype=np.float64,
    ) -> "Seq2SeqModel":
        rng = np.random.default_rng(seed)
        v = len(vocab)
        d, h = embed_dim, hidden
        if embedding is not None:
            if embedding.shape != (v, d):
                raise ValueError(
                    f"embedding shape {embedding.shape} != ({v}, {d})"
                )
            emb = embedding.astype(dtype).copy()
        else:
            bound = 0.5 / d
            emb = rng.uniform(-bound, bound, size=(v, d)).astype(dtype)

        def cell_arrays(input_dim: int) -> tuple[np.ndarray, np.ndarray]:
            w = glorot_uniform(rng, (input_dim + h, 4 * h), dtype)
            b = np.zeros(4 * h, dtype=dtype)
            b[h : 2 * h] = 1.0
            return w, b

        params: dict[str, np.ndarray] = {"embedding": emb}
        params["kw_fw_w"], params["kw_fw_b"] = cell_arrays(d)
        params["kw_bw_w"], params["kw_bw_b"] = cell_arrays(d)
        params["ctx_fw_w"], params["ctx_fw_b"] = cell_arrays(d)
        params["ctx_bw_w"], params["ctx_bw_b"] = cell_arrays(d)
        params["dec_w"], params["dec_b"] = cell_arrays(d + 2 * h)
        params["attn_ws"] = glorot_uniform(rng, (h, h), dtype)
        params["attn_wh"] = glorot_uniform(rng, (h, 2 * h), dtype)
        params["attn_v"] = glorot_uniform(rng, (h,), dtype)
        params["init_w"] = glorot_uniform(rng, (h, 2 * h), dtype)
        params["init_b"] = np.zeros(h, dtype=dtype)
        params["proj_w"] = glorot_uniform(rng, (v, h), dtype)
        params["proj_b"] = np.zeros(v, dtype=dtype)
        return cls(vocab=vocab, mode=mode, embed_dim=d, hidden=h, params=params)

    @property
    def dtype(self):
        return self.params["embedding"].dtype

    @property
    def vocab_size(self) -> int:
        return self.params["embedding"].shape[0]

    def _cell(self, prefix: str, input_dim: int) -> LstmCell:
        return LstmCell(
            w=self.params[f"{prefix}_w"],
            b=self.params[f"{prefix}_b"],
            input_dim=input_dim,
            hidden=self.hidden,
        )

    @property
    def kw_fw(self) -> LstmCell:
        return self._cell("kw_fw", self.embed_dim)

    @property
    def kw_bw(self) -> LstmCell:
        return self._cell("kw_bw", self.embed_dim)

    @property
    def ctx_fw(self) -> LstmCell:
        return self._cell("ctx_fw", self.embed_dim)

    @property
    def ctx_bw(self) -> LstmCell:
        return self._cell("ctx_bw", self.embed_dim)

    @property
    def dec(self) -> LstmCell:
        return self._cell("dec", self.embed_dim + 2 * self.hidden)

    def zero_grads(self) -> dict[str, np.ndarray]:
        return {name: np.zeros_like(arr) for name, arr in self.params.items()}


@dataclass
class EncoderStates:
    """Per-batch encoder outputs: zero-padded state matrix plus source mask.
    Row b holds the keyword states followed by the context states."""

    states: np.ndarray   # (B, S, 2H)
    mask: np.ndarray     # (B, S) bool
    lengths: np.ndarray  # (B,)
    cache: list[dict]

    @property
    def size(self) -> int:
        return self.states.shape[0]


def encode(
    model: Seq2SeqModel,
    keyword_ids: np.ndarray,
    context_ids: np.ndarray,
    keyword_lengths: np.ndarray,
    context_lengths: np.ndarray,
) -> EncoderStates:
    """Run both BiLSTMs per example and concatenate along the time axis."""
    emb = model.params["embedding"]
    batch = keyword_ids.shape[0]
    lengths = keyword_lengths + context_lengths
    s_max = int(lengths.max())
    states = np.zeros((batch, s_max, 2 * model.hidden), dtype=model.dtype)
    mask = np.zeros((batch, s_max), dtype=bool)
    caches: list[dict] = []
    for b in range(batch):
        lk = int(keyword_lengths[b])
        lc = int(context_lengths[b])
        kw_ids = keyword_ids[b, :lk]
        ctx_ids = context_ids[b, :lc]
        kw_out, kw_cache = bilstm_forward(model.kw_fw, model.kw_bw, emb[kw_ids], lk)
        ctx_out, ctx_cache = bilstm_forward(model.ctx_fw, model.ctx_bw, emb[ctx_ids], lc)
        states[b, :lk] = kw_out
        states[b, lk : lk + lc] = ctx_out
        mask[b, : lk + lc] = True
        caches.append(
            {"kw_ids": kw_ids, "ctx_ids": ctx_ids,
             "kw_cache": kw_cache, "ctx_cache": ctx_cache}
        )
    return EncoderStates(states=states, mask=mask, lengths=lengths, cache=caches)


def fixed_context(states: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """The last unmasked encoder state, reused at every fixed-mode step."""
    if states.shape[0] == 0:
        raise ValueError("no encoder states")
    if mask is None:
        return states[-1]
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        raise ValueError("all encoder states are masked")
    return states[idx[-1]]


# ---------------------------------------------------------------------------
# Additive attention
# ---------------------------------------------------------------------------


def _attend_forward(
    ws: np.ndarray, v: np.ndarray, query: np.ndarray,
    states: np.ndarray, wh_states: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, tuple]:
    a = ws @ query
    u = np.tanh(wh_states + a)
    e = u @ v
    e = e - e.max()
    w = np.exp(e)
    w = w / w.sum()
    ctx = w @ states
    return ctx, w, (query, u, w)


def _attend_backward(
    ws: np.ndarray, v: np.ndarray, states: np.ndarray, cache: tuple,
    d_ctx: np.ndarray, d_states: np.ndarray, d_wh_states: np.ndarray,
    g_ws: np.ndarray, g_v: np.ndarray,
) -> np.ndarray:
    query, u, w = cache
    dw = states @ d_ctx
    d_states += np.outer(w, d_ctx)
    de = w * (dw - (w @ dw))
    g_v += u.T @ de
    dpre = np.outer(de, v) * (1.0 - u * u)
    d_wh_states += dpre
    da = dpre.sum(axis=0)
    g_ws += np.outer(da, query)
    return ws.T @ da


def attend(
    model: Seq2SeqModel,
    decoder_state: np.ndarray,
    encoder_states: np.ndarray,
    source_mask: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Additive-attention context for one decoder state.

    Scores are v . tanh(Ws q + Wh s_i) over unmasked states only; returns the
    weighted state mix and the full-length weight vector (zero at masked
    positions).
    """
    if source_mask is None:
        source_mask = np.ones(encoder_states.shape[0], dtype=bool)
    idx = np.flatnonzero(source_mask)
    if idx.size == 0:
        raise ValueError("attention requires at least one unmasked state")
    valid = encoder_states[idx]
    wh = valid @ model.params["attn_wh"].T
    ctx, w, _ = _attend_forward(
        model.params["attn_ws"], model.params["attn_v"], decoder_state, valid, wh
    )
    weights = np.zeros(encoder_states.shape[0], dtype=ctx.dtype)
    weights[idx] = w
    return ctx, weights


# ---------------------------------------------------------------------------
# Teacher-forced decoding
# ---------------------------------------------------------------------------


def decode_train(
    model: Seq2SeqModel,
    enc: EncoderStates,
    decoder_in_ids: np.ndarray,
) -> tuple[np.ndarray, dict]:
    """Teacher forcing: ground-truth inputs at every step. Returns logits of
    shape (B, T, V) and the cache backward() consumes."""
    if not np.all(decoder_in_ids[:, 0] == START_ID):
        raise ValueError("decoder input rows must begin with START")
    emb = model.params["embedding"]
    proj_w, proj_b = model.params["proj_w"], model.params["proj_b"]
    batch, steps = decoder_in_ids.shape
    logits = np.zeros((batch, steps, model.vocab_size), dtype=model.dtype)
    examples: list[dict] = []
    attention = model.mode is Mode.ATTENTION
    for b in range(batch):
        length = int(enc.lengths[b])
        states_b = enc.states[b, :length]
        wh = states_b @ model.params["attn_wh"].T if attention else None
        c_vec = states_b[-1]
        h = model.params["init_w"] @ c_vec + model.params["init_b"]
        c = np.zeros(model.hidden, dtype=model.dtype)
        step_caches = []
        for t in range(steps):
            if attention:
                ctx, _, att_cache = _attend_forward(
                    model.params["attn_ws"], model.params["attn_v"], h, states_b, wh
                )
            else:
                ctx, att_cache = c_vec, None
            x = np.concatenate([emb[decoder_in_ids[b, t]], ctx])
            h, c, lstm_cache = lstm_step_forward(model.dec, x, h, c)
            logits[b, t] = proj_w @ h + proj_b
            step_caches.append((att_cache, lstm_cache, h))
        examples.append({"states": states_b, "c_vec": c_vec, "steps": step_caches})
    cache = {"enc": enc, "decoder_in_ids": decoder_in_ids, "examples": examples}
    return logits, cache


def backward(
    model: Seq2SeqModel, cache: dict, d_logits: np.ndarray
) -> dict[str, np.ndarray]:
    """Exact reverse-mode gradients for every parameter given dL/dlogits."""
    grads = model.zero_grads()
    enc: EncoderStates = cache["enc"]
    dec_in = cache["decoder_in_ids"]
    emb_grad = grads["embedding"]
    proj_w = model.params["proj_w"]
    init_w = model.params["init_w"]
    attention = model.mode is Mode.ATTENTION
    hidden = model.hidden
    for b in range(enc.size):
        example = cache["examples"][b]
        states_b = example["states"]
        c_vec = example["c_vec"]
        steps = example["steps"]
        d_states = np.zeros_like(states_b)
        d_wh = np.zeros((states_b.shape[0], hidden), dtype=model.dtype) if attention else None
        d_cvec = np.zeros_like(c_vec)
        dh = np.zeros(hidden, dtype=model.dtype)
        dc = np.zeros(hidden, dtype=model.dtype)
        for t in reversed(range(len(steps))):
            att_cache, lstm_cache, h_t = steps[t]
            dlog = d_logits[b, t]
            grads["proj_w"] += np.outer(dlog, h_t)
            grads["proj_b"] += dlog
            dh = dh + proj_w.T @ dlog
            dx, dh_prev, dc = lstm_step_backward(
                model.dec, lstm_cache, dh, dc, grads["dec_w"], grads["dec_b"]
            )
            emb_grad[dec_in[b, t]] += dx[: model.embed_dim]
            d_ctx = dx[model.embed_dim :]
            if attention:
                dq = _attend_backward(
                    model.params["attn_ws"], model.params["attn_v"], states_b,
                    att_cache, d_ctx, d_states, d_wh,
                    grads["attn_ws"], grads["attn_v"],
                )
                dh_prev = dh_prev + dq
            else:
                d_cvec += d_ctx
            dh = dh_prev
        # dh now sits on h0 = init_w @ c_vec + init_b
        grads["init_w"] += np.outer(dh, c_vec)
        grads["init_b"] += dh
        d_cvec += init_w.T @ dh
        if attention:
            grads["attn_wh"] += d_wh.T @ states_b
            d_states += d_wh @ model.params["attn_wh"]
        d_states[-1] += d_cvec

        # Split the state gradients back into the two encoders.
        enc_cache = enc.cache[b]
        lk = len(enc_cache["kw_ids"])
        d_kw_xs = bilstm_backward(
            model.kw_fw, model.kw_bw, enc_cache["kw_cache"], d_states[:lk],
            grads["kw_fw_w"], grads["kw_fw_b"], grads["kw_bw_w"], grads["kw_bw_b"],
        )
        d_ctx_xs = bilstm_backward(
            model.ctx_fw, model.ctx_bw, enc_cache["ctx_cache"], d_states[lk:],
            grads["ctx_fw_w"], grads["ctx_fw_b"], grads["ctx_bw_w"], grads["ctx_bw_b"],
        )
        np.add.at(emb_grad, enc_cache["kw_ids"], d_kw_xs)
        np.add.at(emb_grad, enc_cache["ctx_ids"], d_ctx_xs)
    return grads


# ---------------------------------------------------------------------------
# Loss
# ---------------------------------------------------------------------------


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def sequence_loss(
    logits: np.ndarray, target_ids: np.ndarray, mask: np.ndarray
) -> float:
    """Masked mean negative log-probability (natural log) per target token."""
    total = mask.sum()
    if total == 0:
        raise ValueError("loss mask selects no positions")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=-1))
    picked = np.take_along_axis(shifted, target_ids[..., None], axis=-1)[..., 0]
    nll = lse - picked
    return float((nll * mask).sum() / total)


def sequence_loss_grad(
    logits: np.ndarray, target_ids: np.ndarray, mask: np.ndarray
) -> np.ndarray:
    """dL/dlogits for sequence_loss; zero at masked positions."""
    total = mask.sum()
    if total == 0:
        raise ValueError("loss mask selects no positions")
    d = softmax(logits)
    rows = np.arange(logits.shape[0])[:, None]
    cols = np.arange(logits.shape[1])[None, :]
    d[rows, cols, target_ids] -= 1.0
    d *= (mask / total)[..., None]
    return d.astype(logits.dtype)


def loss_and_grads(
    model: Seq2SeqModel, batch: Batch
) -> tuple[float, dict[str, np.ndarray]]:
    """encode -> decode_train -> sequence_loss -> backward on one batch."""
    enc = encode(
        model, batch.keyword_ids, batch.context_ids,
        batch.keyword_lengths, batch.context_lengths,
    )
    logits, cache = decode_train(model, enc, batch.decoder_in_ids)
    loss = sequence_loss(logits, batch.decoder_target_ids, batch.loss_mask)
    d_logits = sequence_loss_grad(logits, batch.decoder_target_ids, batch.loss_mask)
    grads = backward(model, cache, d_logits)
    return loss, grads


# ---------------------------------------------------------------------------
# Greedy decoding
# ---------------------------------------------------------------------------


def decode_greedy(
    model: Seq2SeqModel,
    encoder_states: np.ndarray,
    source_mask: np.ndarray | None = None,
    max_len: int = 16,
    ban_ids: Sequence[int] = (),
) -> list[int]:
    """Feed each argmax prediction back as the next input, starting from
    START; stops at END (not emitted) or after max_len tokens. Ties pick the
    lowest id. ban_ids are never selected."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    if source_mask is not None:
        idx = np.flatnonzero(source_mask)
        states = encoder_states[idx]
    else:
        states = encoder_states
    if states.shape[0] == 0:
        raise ValueError("no unmasked encoder states")
    emb = model.params["embedding"]
    proj_w, proj_b = model.params["proj_w"], model.params["proj_b"]
    attention = model.mode is Mode.ATTENTION
    wh = states @ model.params["attn_wh"].T if attention else None
    c_vec = states[-1]
    h = model.params["init_w"] @ c_vec + model.params["init_b"]
    c = np.zeros(model.hidden, dtype=model.dtype)
    token = START_ID
    out: list[int] = []
    ban = [i for i in ban_ids if i != END_ID]
    for _ in range(max_len):
        if attention:
            ctx, _, _ = _attend_forward(
                model.params["attn_ws"], model.params["attn_v"], h, states, wh
            )
        else:
            ctx = c_vec
        x = np.concatenate([emb[token], ctx])
        h, c, _ = lstm_step_forward(model.dec, x, h, c)
        logits = proj_w @ h + proj_b
        if ban:
            logits = logits.copy()
            logits[ban] = -np.inf
        token = int(np.argmax(logits))
        if token == END_ID:
            break
        out.append(token)
    return out
