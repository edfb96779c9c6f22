# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: peephole LSTM sequence forward/backward and the
log-space CTC lattice recursions.

Contracts match motsocr._kernels.numpy_ref exactly; the large GEMMs
(input projections, weight-gradient accumulation) stay in NumPy/BLAS while
the sequential per-timestep work runs in C loops.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, tanh, log1p, INFINITY

cnp.import_array()


cdef inline double _sigmoid(double z) nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


cdef inline double _logadd(double a, double b) nogil:
    if a == -INFINITY:
        return b
    if b == -INFINITY:
        return a
    if a >= b:
        return a + log1p(exp(b - a))
    return b + log1p(exp(a - b))


def lstm_forward(x, wx, wh, b, p_i, p_f, p_o):
    """See numpy_ref.lstm_forward."""
    cdef cnp.ndarray[double, ndim=2] xw = np.asarray(x, dtype=np.float64) @ np.asarray(wx, dtype=np.float64)
    xw += np.asarray(b, dtype=np.float64)
    cdef double[:, ::1] xw_v = xw
    cdef double[:, ::1] wh_v = np.ascontiguousarray(wh, dtype=np.float64)
    cdef double[::1] pi_v = np.ascontiguousarray(p_i, dtype=np.float64)
    cdef double[::1] pf_v = np.ascontiguousarray(p_f, dtype=np.float64)
    cdef double[::1] po_v = np.ascontiguousarray(p_o, dtype=np.float64)

    cdef Py_ssize_t T = xw.shape[0]
    cdef Py_ssize_t n = wh_v.shape[0]
    g_arr = np.empty((T, n))
    i_arr = np.empty((T, n))
    f_arr = np.empty((T, n))
    o_arr = np.empty((T, n))
    c_arr = np.empty((T, n))
    h_arr = np.empty((T, n))
    cdef double[:, ::1] G = g_arr, I = i_arr, F = f_arr, O = o_arr, C = c_arr, H = h_arr
    z_arr = np.empty(4 * n)
    cdef double[::1] z = z_arr
    cdef Py_ssize_t t, i, j
    cdef double hv, c_prev_i, c_t, g_t, i_t, f_t, o_t

    with nogil:
        for t in range(T):
            for j in range(4 * n):
                z[j] = xw_v[t, j]
            if t > 0:
                for i in range(n):
                    hv = H[t - 1, i]
                    for j in range(4 * n):
                        z[j] += hv * wh_v[i, j]
            for i in range(n):
                c_prev_i = C[t - 1, i] if t > 0 else 0.0
                g_t = tanh(z[i])
                i_t = _sigmoid(z[n + i] + pi_v[i] * c_prev_i)
                f_t = _sigmoid(z[2 * n + i] + pf_v[i] * c_prev_i)
                c_t = f_t * c_prev_i + i_t * g_t
                o_t = _sigmoid(z[3 * n + i] + po_v[i] * c_t)
                G[t, i] = g_t
                I[t, i] = i_t
                F[t, i] = f_t
                O[t, i] = o_t
                C[t, i] = c_t
                H[t, i] = o_t * tanh(c_t)
    return g_arr, i_arr, f_arr, o_arr, c_arr, h_arr


def lstm_backward(x, wh, p_i, p_f, p_o, traces, dh_out):
    """See numpy_ref.lstm_backward."""
    g_arr, i_arr, f_arr, o_arr, c_arr, h_arr = traces
    cdef double[:, ::1] G = np.ascontiguousarray(g_arr)
    cdef double[:, ::1] I = np.ascontiguousarray(i_arr)
    cdef double[:, ::1] F = np.ascontiguousarray(f_arr)
    cdef double[:, ::1] O = np.ascontiguousarray(o_arr)
    cdef double[:, ::1] C = np.ascontiguousarray(c_arr)
    cdef double[:, ::1] dH = np.ascontiguousarray(dh_out, dtype=np.float64)
    cdef double[:, ::1] wh_v = np.ascontiguousarray(wh, dtype=np.float64)
    cdef double[::1] pi_v = np.ascontiguousarray(p_i, dtype=np.float64)
    cdef double[::1] pf_v = np.ascontiguousarray(p_f, dtype=np.float64)
    cdef double[::1] po_v = np.ascontiguousarray(p_o, dtype=np.float64)

    cdef Py_ssize_t T = dH.shape[0]
    cdef Py_ssize_t n = dH.shape[1]
    dz_arr = np.zeros((T, 4 * n))
    dpi_arr = np.zeros(n)
    dpf_arr = np.zeros(n)
    dpo_arr = np.zeros(n)
    cdef double[:, ::1] dz = dz_arr
    cdef double[::1] dpi = dpi_arr, dpf = dpf_arr, dpo = dpo_arr
    dc_next_arr = np.zeros(n)
    dh_t_arr = np.zeros(n)
    cdef double[::1] dc_next = dc_next_arr
    cdef double[::1] dh_t = dh_t_arr
    cdef Py_ssize_t t, i, j
    cdef double tanh_c, dzo, dc, c_prev_i, dzi, dzf, dzg, acc

    with nogil:
        for t in range(T - 1, -1, -1):
            for i in range(n):
                acc = dH[t, i]
                if t < T - 1:
                    for j in range(4 * n):
                        acc += wh_v[i, j] * dz[t + 1, j]
                dh_t[i] = acc
            for i in range(n):
                tanh_c = tanh(C[t, i])
                dzo = dh_t[i] * tanh_c * O[t, i] * (1.0 - O[t, i])
                dc = dh_t[i] * O[t, i] * (1.0 - tanh_c * tanh_c) + po_v[i] * dzo
                if t < T - 1:
                    dc += dc_next[i] * F[t + 1, i] \
                        + pi_v[i] * dz[t + 1, n + i] \
                        + pf_v[i] * dz[t + 1, 2 * n + i]
                c_prev_i = C[t - 1, i] if t > 0 else 0.0
                dzi = dc * G[t, i] * I[t, i] * (1.0 - I[t, i])
                dzf = dc * c_prev_i * F[t, i] * (1.0 - F[t, i])
                dzg = dc * I[t, i] * (1.0 - G[t, i] * G[t, i])
                dz[t, i] = dzg
                dz[t, n + i] = dzi
                dz[t, 2 * n + i] = dzf
                dz[t, 3 * n + i] = dzo
                dpi[i] += dzi * c_prev_i
                dpf[i] += dzf * c_prev_i
                dpo[i] += dzo * C[t, i]
                dc_next[i] = dc

    x_arr = np.ascontiguousarray(x, dtype=np.float64)
    h_prev = np.vstack([np.zeros((1, n)), np.asarray(h_arr)[:-1]])
    d_wx = x_arr.T @ dz_arr
    d_wh = h_prev.T @ dz_arr
    d_b = dz_arr.sum(axis=0)
    return d_wx, d_wh, d_b, dpi_arr, dpf_arr, dpo_arr


def ctc_alpha_beta(log_y_state, can_skip):
    """See numpy_ref.ctc_alpha_beta."""
    cdef double[:, ::1] ly = np.ascontiguousarray(log_y_state, dtype=np.float64)
    cdef cnp.uint8_t[::1] skip = np.ascontiguousarray(can_skip, dtype=np.uint8)
    cdef Py_ssize_t T = ly.shape[0]
    cdef Py_ssize_t S = ly.shape[1]
    la_arr = np.full((T, S), -np.inf)
    lb_arr = np.full((T, S), -np.inf)
    cdef double[:, ::1] la = la_arr
    cdef double[:, ::1] lb = lb_arr
    cdef Py_ssize_t t, s
    cdef double acc, log_p

    with nogil:
        la[0, 0] = ly[0, 0]
        if S > 1:
            la[0, 1] = ly[0, 1]
        for t in range(1, T):
            for s in range(S):
                acc = la[t - 1, s]
                if s >= 1:
                    acc = _logadd(acc, la[t - 1, s - 1])
                if s >= 2 and skip[s]:
                    acc = _logadd(acc, la[t - 1, s - 2])
                la[t, s] = acc + ly[t, s]

        lb[T - 1, S - 1] = 0.0
        if S > 1:
            lb[T - 1, S - 2] = 0.0
        for t in range(T - 2, -1, -1):
            for s in range(S):
                acc = lb[t + 1, s] + ly[t + 1, s]
                if s + 1 < S:
                    acc = _logadd(acc, lb[t + 1, s + 1] + ly[t + 1, s + 1])
                if s + 2 < S and skip[s + 2]:
                    acc = _logadd(acc, lb[t + 1, s + 2] + ly[t + 1, s + 2])
                lb[t, s] = acc

        log_p = la[T - 1, S - 1]
        if S > 1:
            log_p = _logadd(log_p, la[T - 1, S - 2])
    return la_arr, lb_arr, float(log_p)
