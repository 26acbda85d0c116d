"""LSTM cell and bidirectional encoding with hand-written backward passes.

A cell packs its four gate weight matrices (input, forget, output, candidate)
as column blocks of one (input_dim + hidden, 4*hidden) array acting on the
concatenation [x_t ; h_{t-1}]. Forward passes record the intermediates the
backward passes need; every backward pass is exact reverse-mode
differentiation, checked against finite differences in the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def glorot_uniform(rng: np.random.Generator, shape: tuple[int, ...],
                   dtype=np.float64) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


@dataclass
class LstmCell:
    """Gate order along the packed axis is i, f, o, g."""

    w: np.ndarray  # (input_dim + hidden, 4*hidden)
    b: np.ndarray  # (4*hidden,)
    input_dim: int
    hidden: int

    @classmethod
    def create(cls, input_dim: int, hidden: int, rng: np.random.Generator,
               dtype=np.float64) -> "LstmCell":
        w = glorot_uniform(rng, (input_dim + hidden, 4 * hidden), dtype)
        b = np.zeros(4 * hidden, dtype=dtype)
        b[hidden : 2 * hidden] = 1.0  # forget-gate bias starts open
        return cls(w=w, b=b, input_dim=input_dim, hidden=hidden)

    # Per-gate views onto the packed arrays.
    @property
    def w_i(self) -> np.ndarray:
        return self.w[:, : self.hidden]

    @property
    def w_f(self) -> np.ndarray:
        return self.w[:, self.hidden : 2 * self.hidden]

    @property
    def w_o(self) -> np.ndarray:
        return self.w[:, 2 * self.hidden : 3 * self.hidden]

    @property
    def w_g(self) -> np.ndarray:
        return self.w[:, 3 * self.hidden :]

    @property
    def b_i(self) -> np.ndarray:
        return self.b[: self.hidden]

    @property
    def b_f(self) -> np.ndarray:
        return self.b[self.hidden : 2 * self.hidden]

    @property
    def b_o(self) -> np.ndarray:
        return self.b[2 * self.hidden : 3 * self.hidden]

    @property
    def b_g(self) -> np.ndarray:
        return self.b[3 * self.hidden :]


def lstm_step_forward(cell: LstmCell, x: np.ndarray, h_prev: np.ndarray,
                      c_prev: np.ndarray) -> tuple[np.ndarray, np.ndarray, dict]:
    if x.shape != (cell.input_dim,):
        raise ValueError(f"expected input of shape ({cell.input_dim},), got {x.shape}")
    if h_prev.shape != (cell.hidden,) or c_prev.shape != (cell.hidden,):
        raise ValueError(f"hidden/cell state must have shape ({cell.hidden},)")
    hd = cell.hidden
    xh = np.concatenate([x, h_prev])
    z = xh @ cell.w + cell.b
    i = sigmoid(z[:hd])
    f = sigmoid(z[hd : 2 * hd])
    o = sigmoid(z[2 * hd : 3 * hd])
    g = np.tanh(z[3 * hd :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    cache = {"xh": xh, "i": i, "f": f, "o": o, "g": g, "c_prev": c_prev, "tc": tc}
    return h, c, cache


def lstm_step(cell: LstmCell, x: np.ndarray, h_prev: np.ndarray,
              c_prev: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Standard gate equations: c = f*c_prev + i*g, h = o*tanh(c)."""
    h, c, _ = lstm_step_forward(cell, x, h_prev, c_prev)
    return h, c


def lstm_step_backward(
    cell: LstmCell,
    cache: dict,
    dh: np.ndarray,
    dc: np.ndarray,
    dw: np.ndarray,
    db: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Backprop one step. dh/dc are gradients flowing into h_t and c_t;
    dw/db are accumulated in place. Returns (dx, dh_prev, dc_prev)."""
    hd = cell.hidden
    i, f, o, g = cache["i"], cache["f"], cache["o"], cache["g"]
    tc, c_prev, xh = cache["tc"], cache["c_prev"], cache["xh"]

    do = dh * tc
    dc_total = dc + dh * o * (1.0 - tc * tc)
    df = dc_total * c_prev
    dc_prev = dc_total * f
    di = dc_total * g
    dg = dc_total * i

    dz = np.concatenate([
        di * i * (1.0 - i),
        df * f * (1.0 - f),
        do * o * (1.0 - o),
        dg * (1.0 - g * g),
    ])
    dw += np.outer(xh, dz)
    db += dz
    dxh = cell.w @ dz
    return dxh[: cell.input_dim], dxh[cell.input_dim :], dc_prev


def run_lstm_forward(
    cell: LstmCell, xs: np.ndarray, h0: np.ndarray, c0: np.ndarray
) -> tuple[np.ndarray, list[dict], np.ndarray, np.ndarray]:
    """Run a cell over the rows of xs. Returns (hs, caches, h_last, c_last)."""
    steps = xs.shape[0]
    hs = np.zeros((steps, cell.hidden), dtype=xs.dtype)
    caches: list[dict] = []
    h, c = h0, c0
    for t in range(steps):
        h, c, cache = lstm_step_forward(cell, xs[t], h, c)
        hs[t] = h
        caches.append(cache)
    return hs, caches, h, c


def run_lstm_backward(
    cell: LstmCell,
    caches: list[dict],
    dhs: np.ndarray,
    dw: np.ndarray,
    db: np.ndarray,
    dh_last: np.ndarray | None = None,
    dc_last: np.ndarray | None = None,
) -> np.ndarray:
    """BPTT over a recorded run; dhs holds the per-step gradients on h_t.
    Returns dxs. Weight gradients accumulate into dw/db."""
    steps = len(caches)
    dxs = np.zeros((steps, cell.input_dim), dtype=dhs.dtype)
    dh = np.zeros(cell.hidden, dtype=dhs.dtype)
    dc = np.zeros(cell.hidden, dtype=dhs.dtype)
    if dh_last is not None:
        dh = dh + dh_last
    if dc_last is not None:
        dc = dc + dc_last
    for t in reversed(range(steps)):
        dh = dh + dhs[t]
        dxs[t], dh, dc = lstm_step_backward(cell, caches[t], dh, dc, dw, db)
    return dxs


# ---------------------------------------------------------------------------
# Bidirectional encoding of one sequence
# ---------------------------------------------------------------------------


def bilstm_forward(
    fw: LstmCell, bw: LstmCell, xs: np.ndarray, valid_length: int
) -> tuple[np.ndarray, dict]:
    """Encode xs[:valid_length] in both directions.

    Output row t is [forward h_t ; backward h_t] for t < valid_length and a
    zero vector for padded positions. The backward direction runs over the
    reversed valid prefix only, so padding never influences the encoding.
    """
    if valid_length < 1:
        raise ValueError("valid_length must be >= 1")
    if valid_length > xs.shape[0]:
        raise ValueError("valid_length exceeds sequence length")
    hd = fw.hidden
    steps = xs.shape[0]
    valid = xs[:valid_length]
    zero_h = np.zeros(hd, dtype=xs.dtype)
    fw_hs, fw_caches, _, _ = run_lstm_forward(fw, valid, zero_h, zero_h)
    bw_hs_rev, bw_caches, _, _ = run_lstm_forward(bw, valid[::-1], zero_h, zero_h)
    out = np.zeros((steps, 2 * hd), dtype=xs.dtype)
    out[:valid_length, :hd] = fw_hs
    out[:valid_length, hd:] = bw_hs_rev[::-1]
    cache = {"fw_caches": fw_caches, "bw_caches": bw_caches,
             "valid_length": valid_length, "steps": steps}
    return out, cache


def bilstm_encode(
    fw: LstmCell, bw: LstmCell, xs: np.ndarray, valid_length: int | None = None
) -> np.ndarray:
    """Concatenated forward/backward hidden states, one 2H row per position."""
    if valid_length is None:
        valid_length = xs.shape[0]
    out, _ = bilstm_forward(fw, bw, xs, valid_length)
    return out


def bilstm_backward(
    fw: LstmCell,
    bw: LstmCell,
    cache: dict,
    d_out: np.ndarray,
    dfw_w: np.ndarray,
    dfw_b: np.ndarray,
    dbw_w: np.ndarray,
    dbw_b: np.ndarray,
) -> np.ndarray:
    """Backprop through bilstm_forward; returns dxs (gradients on padded
    positions are zero). Weight gradients accumulate into the d* arrays."""
    hd = fw.hidden
    valid = cache["valid_length"]
    dxs = np.zeros((cache["steps"], fw.input_dim), dtype=d_out.dtype)
    d_fw = np.ascontiguousarray(d_out[:valid, :hd])
    d_bw_rev = np.ascontiguousarray(d_out[:valid, hd:][::-1])
    dxs[:valid] += run_lstm_backward(fw, cache["fw_caches"], d_fw, dfw_w, dfw_b)
    dxs[:valid] += run_lstm_backward(bw, cache["bw_caches"], d_bw_rev, dbw_w, dbw_b)[::-1]
    return dxs
