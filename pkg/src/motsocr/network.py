"""Bidirectional peephole LSTM over column-feature sequences with a
per-frame softmax output layer.

All trainable values live in one flat float64 vector; the structured
weight matrices are views into it, so optimizer updates and checkpoint
serialization never copy per-array. Flat layout, in order:

    forward block:  wx (H_in x 4N), wh (N x 4N), b (4N), p_i, p_f, p_o (N each)
    backward block: same six arrays
    output layer:   w_out (2N x K), b_out (K)

with gate columns packed as (cell input, input gate, forget gate, output
gate). The sequence kernels come from ``motsocr._kernels`` (compiled
extension when available, NumPy otherwise).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .imaging import GrayImage


class NumericError(ArithmeticError):
    """A forward or backward pass produced a non-finite value."""


@dataclass(frozen=True)
class FrameSequence:
    """T column vectors of height H, intensities in [0, 1], left to right."""

    frames: np.ndarray  # (T, H) float64

    def __post_init__(self):
        fr = np.ascontiguousarray(self.frames, dtype=np.float64)
        if fr.ndim != 2 or fr.shape[0] < 1:
            raise ValueError("frame sequence must be (T >= 1, H)")
        if fr.min() < 0.0 or fr.max() > 1.0:
            raise ValueError("frame components must lie in [0, 1]")
        object.__setattr__(self, "frames", fr)

    @classmethod
    def from_image(cls, img: GrayImage) -> "FrameSequence":
        return cls(img.pixels.T.astype(np.float64) / 255.0)

    def __len__(self) -> int:
        return self.frames.shape[0]


@dataclass
class LstmBlockParams:
    """Views into the parameter vector for one direction."""

    wx: np.ndarray   # (H_in, 4N)
    wh: np.ndarray   # (N, 4N)
    b: np.ndarray    # (4N,)
    p_i: np.ndarray  # (N,)
    p_f: np.ndarray  # (N,)
    p_o: np.ndarray  # (N,)


def _block_size(h_in: int, n: int) -> int:
    return h_in * 4 * n + n * 4 * n + 4 * n + 3 * n


def _carve_block(flat: np.ndarray, offset: int, h_in: int, n: int):
    def take(count, shape):
        nonlocal offset
        view = flat[offset : offset + count].reshape(shape)
        offset += count
        return view

    block = LstmBlockParams(
        wx=take(h_in * 4 * n, (h_in, 4 * n)),
        wh=take(n * 4 * n, (n, 4 * n)),
        b=take(4 * n, (4 * n,)),
        p_i=take(n, (n,)),
        p_f=take(n, (n,)),
        p_o=take(n, (n,)),
    )
    return block, offset


@dataclass
class NetworkParams:
    """All trainable weights of the bidirectional network."""

    h_in: int
    n: int
    k: int
    flat: np.ndarray
    forward_block: LstmBlockParams = field(init=False)
    backward_block: LstmBlockParams = field(init=False)
    w_out: np.ndarray = field(init=False)
    b_out: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("need at least one label class plus blank")
        expected = param_count(self.h_in, self.n, self.k)
        if self.flat.shape != (expected,):
            raise ValueError(
                f"parameter vector has {self.flat.shape}, expected ({expected},)"
            )
        self.forward_block, off = _carve_block(self.flat, 0, self.h_in, self.n)
        self.backward_block, off = _carve_block(self.flat, off, self.h_in, self.n)
        self.w_out = self.flat[off : off + 2 * self.n * self.k].reshape(2 * self.n, self.k)
        off += 2 * self.n * self.k
        self.b_out = self.flat[off : off + self.k]

    def copy(self) -> "NetworkParams":
        return NetworkParams(self.h_in, self.n, self.k, self.flat.copy())

    def zeros_like(self) -> "NetworkParams":
        return NetworkParams(self.h_in, self.n, self.k, np.zeros_like(self.flat))


def param_count(h_in: int, n: int, k: int) -> int:
    return 2 * _block_size(h_in, n) + 2 * n * k + k


def init_params(h_in: int, n: int, k: int, seed: int) -> NetworkParams:
    """Weights i.i.d. uniform on [-0.1, 0.1] (PCG64 stream under `seed`);
    all biases zero."""
    if min(h_in, n, k) <= 0:
        raise ValueError("all dimensions must be positive")
    rng = np.random.default_rng(seed)
    flat = rng.uniform(-0.1, 0.1, size=param_count(h_in, n, k))
    params = NetworkParams(h_in, n, k, flat)
    params.forward_block.b[:] = 0.0
    params.backward_block.b[:] = 0.0
    params.b_out[:] = 0.0
    return params


def lstm_cell_step(block: LstmBlockParams, x_t, h_prev, c_prev):
    """One peephole LSTM step; the canonical single-step definition the
    sequence kernels must agree with. Returns (h_t, c_t)."""
    n = block.wh.shape[0]
    z = x_t @ block.wx + h_prev @ block.wh + block.b
    g = np.tanh(z[:n])
    i = _kernels.numpy_ref.sigmoid(z[n : 2 * n] + block.p_i * c_prev)
    f = _kernels.numpy_ref.sigmoid(z[2 * n : 3 * n] + block.p_f * c_prev)
    c_t = f * c_prev + i * g
    o = _kernels.numpy_ref.sigmoid(z[3 * n :] + block.p_o * c_t)
    h_t = o * np.tanh(c_t)
    if not (np.isfinite(h_t).all() and np.isfinite(c_t).all()):
        raise NumericError("numeric overflow in LSTM step")
    return h_t, c_t


@dataclass
class NetworkState:
    """Full activation trace of one bidirectional pass (kept for BPTT).

    Backward-direction traces are stored in processing order, i.e. over the
    time-reversed input.
    """

    x: np.ndarray               # (T, H_in)
    fwd_traces: tuple           # (g, i, f, o, c, h), natural time order
    bwd_traces: tuple           # (g, i, f, o, c, h), reversed time order
    logits: np.ndarray          # (T, K)
    y: np.ndarray               # (T, K) softmax rows


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def blstm_forward(params: NetworkParams, seq: FrameSequence) -> NetworkState:
    """Run both directions and the softmax output layer over the sequence."""
    x = seq.frames
    fb, bb = params.forward_block, params.backward_block
    fwd = _kernels.lstm_forward(x, fb.wx, fb.wh, fb.b, fb.p_i, fb.p_f, fb.p_o)
    x_rev = np.ascontiguousarray(x[::-1])
    bwd = _kernels.lstm_forward(x_rev, bb.wx, bb.wh, bb.b, bb.p_i, bb.p_f, bb.p_o)
    h_cat = np.hstack([fwd[5], bwd[5][::-1]])
    logits = h_cat @ params.w_out + params.b_out
    finite = (
        np.isfinite(logits).all(axis=1)
        & np.isfinite(fwd[4]).all(axis=1)
        & np.isfinite(bwd[4][::-1]).all(axis=1)
    )
    if not finite.all():
        bad = int(np.flatnonzero(~finite)[0])
        raise NumericError(f"numeric overflow at step {bad}")
    return NetworkState(x=x, fwd_traces=fwd, bwd_traces=bwd, logits=logits, y=softmax(logits))


def network_backward(
    params: NetworkParams, state: NetworkState, dlogits: np.ndarray
) -> NetworkParams:
    """Exact gradient of the loss w.r.t. every parameter given per-frame
    logit gradients. Returns a NetworkParams-shaped gradient container."""
    if dlogits.shape != state.logits.shape:
        raise ValueError(
            f"dlogits shape {dlogits.shape} != logits shape {state.logits.shape}"
        )
    n = params.n
    grads = params.zeros_like()
    h_cat = np.hstack([state.fwd_traces[5], state.bwd_traces[5][::-1]])
    grads.w_out[:] = h_cat.T @ dlogits
    grads.b_out[:] = dlogits.sum(axis=0)
    dh_cat = dlogits @ params.w_out.T
    dh_fwd = np.ascontiguousarray(dh_cat[:, :n])
    dh_bwd = np.ascontiguousarray(dh_cat[::-1, n:])

    fb, gb = params.forward_block, grads.forward_block
    out = _kernels.lstm_backward(
        state.x, fb.wh, fb.p_i, fb.p_f, fb.p_o, state.fwd_traces, dh_fwd
    )
    gb.wx[:], gb.wh[:], gb.b[:], gb.p_i[:], gb.p_f[:], gb.p_o[:] = out

    x_rev = np.ascontiguousarray(state.x[::-1])
    bb, hb = params.backward_block, grads.backward_block
    out = _kernels.lstm_backward(
        x_rev, bb.wh, bb.p_i, bb.p_f, bb.p_o, state.bwd_traces, dh_bwd
    )
    hb.wx[:], hb.wh[:], hb.b[:], hb.p_i[:], hb.p_f[:], hb.p_o[:] = out
    return grads
