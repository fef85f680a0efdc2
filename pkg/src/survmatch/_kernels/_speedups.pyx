# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled survival-curve kernels.

Semantics mirror ``_fallback.py`` exactly; the interval/risk-set
bookkeeping and the denominator guard are documented there. Integer-count
paths (pkm/dkm/product_limit) are bit-identical to the fallback; the smooth
kernel may differ in final ulps because the summation order differs.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

cnp.import_array()

BACKEND = "cython"

cdef double DEN_GUARD = 1e-12


cdef inline double _sig(double z) noexcept nogil:
    cdef double e
    if z >= 0.0:
        return 1.0 / (1.0 + exp(-z))
    e = exp(z)
    return e / (1.0 + e)


def pkm_sums(t_hat, y, grid):
    cdef double[::1] th = np.ascontiguousarray(t_hat, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(grid, dtype=np.float64)
    cdef Py_ssize_t n = th.shape[0], m = gv.shape[0]
    num_arr = np.zeros(m, dtype=np.float64)
    den_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] num = num_arr
    cdef double[::1] den = den_arr
    cdef Py_ssize_t i, j
    cdef double prev, cur
    with nogil:
        for j in range(n):
            prev = 1.0
            for i in range(m):
                cur = 1.0 if th[j] > gv[i] else 0.0
                if yv[j] == 1.0:
                    num[i] += prev - cur
                den[i] += prev
                prev = cur
    return num_arr, den_arr


def dkm_sums(cdf, y, grid):
    cdef double[:, ::1] f = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef Py_ssize_t n = f.shape[0], m = f.shape[1]
    num_arr = np.zeros(m, dtype=np.float64)
    den_arr = np.zeros(m, dtype=np.float64)
    cdef double[::1] num = num_arr
    cdef double[::1] den = den_arr
    cdef Py_ssize_t i, j
    cdef double prev
    with nogil:
        for j in range(n):
            prev = 0.0
            for i in range(m):
                if yv[j] == 1.0:
                    num[i] += f[j, i] - prev
                den[i] += prev
                prev = f[j, i]
        for i in range(m):
            den[i] = <double>n - den[i]
    return num_arr, den_arr


def product_limit(num, den):
    cdef double[::1] nv = np.ascontiguousarray(num, dtype=np.float64)
    cdef double[::1] dv = np.ascontiguousarray(den, dtype=np.float64)
    cdef Py_ssize_t m = nv.shape[0]
    s_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] s = s_arr
    cdef double running = 1.0
    cdef Py_ssize_t i
    with nogil:
        for i in range(m):
            if dv[i] > DEN_GUARD:
                running *= 1.0 - nv[i] / dv[i]
            s[i] = running
    return s_arr


def smooth_pkm_forward(t_hat, y, grid, double tau):
    cdef double[::1] th = np.ascontiguousarray(t_hat, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(grid, dtype=np.float64)
    ev_arr = np.ascontiguousarray(y, dtype=np.float64)
    cdef double[::1] yv = ev_arr
    cdef Py_ssize_t n = th.shape[0], m = gv.shape[0]
    p_arr = np.empty((n, m), dtype=np.float64)
    num_arr = np.zeros(m, dtype=np.float64)
    den_arr = np.zeros(m, dtype=np.float64)
    live_arr = np.empty(m, dtype=np.uint8)
    factors_arr = np.empty(m, dtype=np.float64)
    s_arr = np.empty(m, dtype=np.float64)
    cdef double[:, ::1] p = p_arr
    cdef double[::1] num = num_arr
    cdef double[::1] den = den_arr
    cdef cnp.uint8_t[::1] live = live_arr
    cdef double[::1] factors = factors_arr
    cdef double[::1] s = s_arr
    cdef Py_ssize_t i, j
    cdef double prev, cur, running
    with nogil:
        for j in range(n):
            prev = 1.0
            for i in range(m):
                cur = _sig((th[j] - gv[i]) / tau)
                p[j, i] = cur
                if yv[j] == 1.0:
                    num[i] += prev - cur
                den[i] += prev
                prev = cur
        running = 1.0
        for i in range(m):
            if den[i] > DEN_GUARD:
                live[i] = 1
                factors[i] = 1.0 - num[i] / den[i]
                running *= factors[i]
            else:
                live[i] = 0
                factors[i] = 1.0
            s[i] = running
    cache = (p_arr, ev_arr, num_arr, den_arr, live_arr, factors_arr, s_arr, tau)
    return s_arr, cache


def smooth_pkm_vjp(cache, g):
    p_arr, ev_arr, num_arr, den_arr, live_arr, factors_arr, s_arr, tau_obj = cache
    cdef double[:, ::1] p = p_arr
    cdef double[::1] ev = ev_arr
    cdef double[::1] num = num_arr
    cdef double[::1] den = den_arr
    cdef cnp.uint8_t[::1] live = live_arr
    cdef double[::1] factors = factors_arr
    cdef double[::1] s = s_arr
    cdef double tau = tau_obj
    cdef double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], m = p.shape[1]
    c_arr = np.empty(m, dtype=np.float64)
    u_arr = np.zeros(m, dtype=np.float64)
    v_arr = np.zeros(m, dtype=np.float64)
    dt_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] c = c_arr
    cdef double[::1] u = u_arr
    cdef double[::1] v = v_arr
    cdef double[::1] dt = dt_arr
    cdef Py_ssize_t i, j
    cdef double s_prev, acc, w, pij, un, vn
    with nogil:
        c[m - 1] = gv[m - 1]
        for i in range(m - 2, -1, -1):
            c[i] = gv[i] + c[i + 1] * factors[i + 1]
        for i in range(m):
            if live[i] == 1:
                s_prev = 1.0 if i == 0 else s[i - 1]
                u[i] = -c[i] * s_prev / den[i]
                v[i] = c[i] * s_prev * num[i] / (den[i] * den[i])
        for j in range(n):
            acc = 0.0
            for i in range(m):
                un = u[i + 1] if i + 1 < m else 0.0
                vn = v[i + 1] if i + 1 < m else 0.0
                w = ev[j] * (un - u[i]) + vn
                pij = p[j, i]
                acc += w * pij * (1.0 - pij)
            dt[j] = acc / tau
    return dt_arr
