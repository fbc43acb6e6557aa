# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled progressive-filling kernel; mirrors _maxmin_py.maxmin_fill op for op."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def maxmin_fill(const long long[::1] conn_ptr, const long long[::1] conn_chan,
                const double[::1] capacity, double rel_tol=1e-12):
    cdef Py_ssize_t n = conn_ptr.shape[0] - 1
    cdef Py_ssize_t nc = capacity.shape[0]
    cdef Py_ssize_t i, c, k, j, q
    cdef Py_ssize_t remaining = n
    cdef Py_ssize_t nsat
    cdef double best, t, level, cut

    rates_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] rates = rates_arr
    count_arr = np.zeros(nc, dtype=np.int64)
    cdef long long[::1] count = count_arr
    frozen_sum_arr = np.zeros(nc, dtype=np.float64)
    cdef double[::1] frozen_sum = frozen_sum_arr
    frozen_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] frozen = frozen_arr
    sat_arr = np.empty(nc, dtype=np.int64)
    cdef long long[::1] sat = sat_arr

    # channel -> connections (CSR)
    chan_ptr_arr = np.zeros(nc + 1, dtype=np.int64)
    cdef long long[::1] chan_ptr = chan_ptr_arr
    for k in range(conn_chan.shape[0]):
        chan_ptr[conn_chan[k] + 1] += 1
    for c in range(nc):
        chan_ptr[c + 1] += chan_ptr[c]
    chan_conn_arr = np.empty(conn_chan.shape[0], dtype=np.int64)
    cdef long long[::1] chan_conn = chan_conn_arr
    fill_arr = chan_ptr_arr[:-1].copy()
    cdef long long[::1] fill = fill_arr
    for i in range(n):
        for k in range(conn_ptr[i], conn_ptr[i + 1]):
            c = conn_chan[k]
            chan_conn[fill[c]] = i
            fill[c] += 1
            count[c] += 1

    level = 0.0
    while remaining > 0:
        best = -1.0
        for c in range(nc):
            if count[c] > 0:
                t = (capacity[c] - frozen_sum[c]) / count[c]
                if best < 0.0 or t < best:
                    best = t
        if best < level:
            best = level
        level = best
        cut = best * (1.0 + rel_tol)
        nsat = 0
        for c in range(nc):
            if count[c] > 0:
                t = (capacity[c] - frozen_sum[c]) / count[c]
                if t <= cut:
                    sat[nsat] = c
                    nsat += 1
        for q in range(nsat):
            c = sat[q]
            for k in range(chan_ptr[c], chan_ptr[c + 1]):
                i = chan_conn[k]
                if frozen[i]:
                    continue
                frozen[i] = 1
                rates[i] = level
                remaining -= 1
                for j in range(conn_ptr[i], conn_ptr[i + 1]):
                    count[conn_chan[j]] -= 1
                    frozen_sum[conn_chan[j]] += level
    return rates_arr
