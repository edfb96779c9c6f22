"""NumPy reference implementation of the hot kernels.

Same contracts as the compiled extension (`_core`): peephole LSTM forward
over a full sequence, exact backpropagation through time, and the log-space
label-lattice recursions used by the CTC loss. The gate order inside packed
weight matrices is (cell input, input gate, forget gate, output gate).
"""
from __future__ import annotations

import numpy as np

NEG_INF = -np.inf


def sigmoid(z: np.ndarray) -> np.ndarray:
    # Stable in both tails.
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def lstm_forward(x, wx, wh, b, p_i, p_f, p_o):
    """Run one LSTM direction over a whole sequence.

    x: (T, H_in) float64. wx: (H_in, 4N). wh: (N, 4N). b: (4N,).
    p_i/p_f/p_o: (N,) peephole weights (input and forget gates read the
    previous cell state, the output gate reads the current one).

    Returns activation traces (g, i, f, o, c, h), each (T, N).
    """
    T = x.shape[0]
    n = wh.shape[0]
    xw = x @ wx + b
    g = np.empty((T, n))
    ig = np.empty((T, n))
    fg = np.empty((T, n))
    og = np.empty((T, n))
    c = np.empty((T, n))
    h = np.empty((T, n))
    h_prev = np.zeros(n)
    c_prev = np.zeros(n)
    for t in range(T):
        z = xw[t] + h_prev @ wh
        g_t = np.tanh(z[:n])
        i_t = sigmoid(z[n : 2 * n] + p_i * c_prev)
        f_t = sigmoid(z[2 * n : 3 * n] + p_f * c_prev)
        c_t = f_t * c_prev + i_t * g_t
        o_t = sigmoid(z[3 * n :] + p_o * c_t)
        h_t = o_t * np.tanh(c_t)
        g[t], ig[t], fg[t], og[t], c[t], h[t] = g_t, i_t, f_t, o_t, c_t, h_t
        h_prev, c_prev = h_t, c_t
    return g, ig, fg, og, c, h


def lstm_backward(x, wh, p_i, p_f, p_o, traces, dh_out):
    """Exact BPTT for one direction.

    traces: the (g, i, f, o, c, h) arrays from lstm_forward on the same
    inputs. dh_out: (T, N) gradient of the loss w.r.t. each block output.

    Returns (d_wx, d_wh, d_b, d_p_i, d_p_f, d_p_o).
    """
    g, ig, fg, og, c, h = traces
    T, n = dh_out.shape
    dz = np.zeros((T, 4 * n))
    d_p_i = np.zeros(n)
    d_p_f = np.zeros(n)
    d_p_o = np.zeros(n)
    dc_next = np.zeros(n)
    dzi_next = np.zeros(n)
    dzf_next = np.zeros(n)
    for t in range(T - 1, -1, -1):
        dh = dh_out[t].copy()
        if t < T - 1:
            dh += dz[t + 1] @ wh.T
        tanh_c = np.tanh(c[t])
        dzo = dh * tanh_c * og[t] * (1.0 - og[t])
        dc = dh * og[t] * (1.0 - tanh_c * tanh_c) + p_o * dzo
        if t < T - 1:
            dc += dc_next * fg[t + 1] + p_i * dzi_next + p_f * dzf_next
        c_prev = c[t - 1] if t > 0 else np.zeros(n)
        dzi = dc * g[t] * ig[t] * (1.0 - ig[t])
        dzf = dc * c_prev * fg[t] * (1.0 - fg[t])
        dzg = dc * ig[t] * (1.0 - g[t] * g[t])
        dz[t, :n] = dzg
        dz[t, n : 2 * n] = dzi
        dz[t, 2 * n : 3 * n] = dzf
        dz[t, 3 * n :] = dzo
        d_p_i += dzi * c_prev
        d_p_f += dzf * c_prev
        d_p_o += dzo * c[t]
        dc_next, dzi_next, dzf_next = dc, dzi, dzf
    h_prev = np.vstack([np.zeros((1, n)), h[:-1]])
    d_wx = x.T @ dz
    d_wh = h_prev.T @ dz
    d_b = dz.sum(axis=0)
    return d_wx, d_wh, d_b, d_p_i, d_p_f, d_p_o


def ctc_alpha_beta(log_y_state: np.ndarray, can_skip: np.ndarray):
    """Log-space forward/backward over a blank-augmented label lattice.

    log_y_state: (T, S) log-probability of each lattice state's label per
    frame. can_skip[s] is True when the s-2 -> s transition is legal
    (s odd in 0-based terms handled by the caller).

    Returns (log_alpha, log_beta, log_p). log_beta excludes the frame-t
    emission, so log_alpha[t] + log_beta[t] sums over s to log_p for any t.
    """
    T, S = log_y_state.shape
    log_alpha = np.full((T, S), NEG_INF)
    log_alpha[0, 0] = log_y_state[0, 0]
    if S > 1:
        log_alpha[0, 1] = log_y_state[0, 1]
    for t in range(1, T):
        prev = log_alpha[t - 1]
        stay = prev
        step = np.concatenate(([NEG_INF], prev[:-1]))
        skip = np.concatenate(([NEG_INF, NEG_INF], prev[:-2]))
        acc = np.logaddexp(stay, step)
        acc = np.where(can_skip, np.logaddexp(acc, skip), acc)
        log_alpha[t] = acc + log_y_state[t]

    log_beta = np.full((T, S), NEG_INF)
    log_beta[T - 1, S - 1] = 0.0
    if S > 1:
        log_beta[T - 1, S - 2] = 0.0
    for t in range(T - 2, -1, -1):
        nxt = log_beta[t + 1] + log_y_state[t + 1]
        stay = nxt
        step = np.concatenate((nxt[1:], [NEG_INF]))
        skip_src = np.concatenate((nxt[2:], [NEG_INF, NEG_INF]))
        skip_ok = np.concatenate((can_skip[2:], [False, False]))
        acc = np.logaddexp(stay, step)
        log_beta[t] = np.where(skip_ok, np.logaddexp(acc, skip_src), acc)

    if S > 1:
        log_p = np.logaddexp(log_alpha[T - 1, S - 1], log_alpha[T - 1, S - 2])
    else:
        log_p = log_alpha[T - 1, S - 1]
    return log_alpha, log_beta, float(log_p)
