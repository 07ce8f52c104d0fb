# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the hot loops.

Mirrors ``geomed._pykernels`` exactly: the sequential chain update,
the empirical loss/subgradient sums and the modified Weiszfeld step.
"""

from libc.math cimport fmax, pow, sqrt

import numpy as np

cdef double EPS_MATCH = 1e-12


cpdef long chain_run(const double[:, ::1] points, double[::1] z, double[::1] zbar,
                     long count, double c_gamma, double alpha, const double[::1] v):
    """Advance the averaged chain over a block; updates z/zbar in place."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, j
    cdef double gamma, dist, s, zsq, diff
    for i in range(n):
        count += 1
        gamma = c_gamma * pow(<double> count, -alpha)
        s = 0.0
        zsq = 0.0
        for j in range(d):
            diff = points[i, j] - z[j]
            s += diff * diff
            zsq += z[j] * z[j]
        dist = sqrt(s)
        if dist <= EPS_MATCH * fmax(1.0, sqrt(zsq)):
            for j in range(d):
                z[j] += gamma * v[j]
        else:
            for j in range(d):
                z[j] += gamma * ((points[i, j] - z[j]) / dist + v[j])
        for j in range(d):
            zbar[j] += (z[j] - zbar[j]) / (<double> count)
    return count


cpdef double loss(const double[:, ::1] points, const double[::1] at):
    """Empirical objective mean(||x_i - at|| - ||x_i||)."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    cdef double s_at, s_x, diff
    for i in range(n):
        s_at = 0.0
        s_x = 0.0
        for j in range(d):
            diff = points[i, j] - at[j]
            s_at += diff * diff
            s_x += points[i, j] * points[i, j]
        acc += sqrt(s_at) - sqrt(s_x)
    return acc / (<double> n)


cpdef long subgrad(const double[:, ::1] points, const double[::1] at, double[::1] out):
    """Empirical subgradient at ``at``; returns the number of dropped atoms."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, j
    cdef long dropped = 0
    cdef double s, dist, thr
    s = 0.0
    for j in range(d):
        out[j] = 0.0
        s += at[j] * at[j]
    thr = EPS_MATCH * fmax(1.0, sqrt(s))
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += (points[i, j] - at[j]) * (points[i, j] - at[j])
        dist = sqrt(s)
        if dist <= thr:
            dropped += 1
        else:
            for j in range(d):
                out[j] -= (points[i, j] - at[j]) / dist
    if dropped < n:
        for j in range(d):
            out[j] /= <double> n
    return dropped


cpdef tuple vz_step(const double[:, ::1] points, const double[::1] weights,
                    const double[::1] y, double[::1] out):
    """One modified-Weiszfeld step on weighted points; returns (r, eta)."""
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t d = points.shape[1]
    cdef Py_ssize_t i, j
    cdef double eta = 0.0
    cdef double denom = 0.0
    cdef double s, dist, thr, inv, r, ratio
    t_num_arr = np.zeros(d, dtype=np.float64)
    r_vec_arr = np.zeros(d, dtype=np.float64)
    cdef double[::1] t_num = t_num_arr
    cdef double[::1] r_vec = r_vec_arr
    s = 0.0
    for j in range(d):
        s += y[j] * y[j]
    thr = EPS_MATCH * fmax(1.0, sqrt(s))
    for i in range(n):
        s = 0.0
        for j in range(d):
            s += (points[i, j] - y[j]) * (points[i, j] - y[j])
        dist = sqrt(s)
        if dist <= thr:
            eta += weights[i]
        else:
            inv = weights[i] / dist
            denom += inv
            for j in range(d):
                t_num[j] += inv * points[i, j]
                r_vec[j] += inv * (points[i, j] - y[j])
    if denom == 0.0:
        for j in range(d):
            out[j] = y[j]
        return 0.0, eta
    s = 0.0
    for j in range(d):
        s += r_vec[j] * r_vec[j]
    r = sqrt(s)
    if eta == 0.0:
        for j in range(d):
            out[j] = t_num[j] / denom
    elif r <= 1e-300:
        for j in range(d):
            out[j] = y[j]
    else:
        ratio = eta / r
        if ratio >= 1.0:
            for j in range(d):
                out[j] = y[j]
        else:
            for j in range(d):
                out[j] = (1.0 - ratio) * (t_num[j] / denom) + ratio * y[j]
    return r, eta
