# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot loops; same contracts as ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def peak_sum_rows(h, int k):
    cdef const double[:, ::1] hv = np.ascontiguousarray(h, dtype=np.float64)
    cdef Py_ssize_t rows = hv.shape[0], cols = hv.shape[1]
    out = np.zeros(rows)
    cdef double[::1] ov = out
    cdef double best[16]
    cdef Py_ssize_t i, j, m, q
    cdef double v
    if cols < 3 or k < 1:
        return out
    if k > 16:
        raise ValueError("k > 16 not supported by the compiled kernel")
    if k > cols - 2:
        k = <int>(cols - 2)
    with nogil:
        for i in range(rows):
            for m in range(k):
                best[m] = -INFINITY
            for j in range(1, cols - 1):
                v = hv[i, j]
                if v > hv[i, j - 1] and v > hv[i, j + 1] and v > best[k - 1]:
                    # insertion into the descending top-k list
                    q = k - 1
                    while q > 0 and best[q - 1] < v:
                        best[q] = best[q - 1]
                        q -= 1
                    best[q] = v
            for m in range(k):
                if best[m] > -INFINITY:
                    ov[i] += best[m]
    return out


def viterbi_log(log_init, log_trans, obs):
    cdef const double[::1] li = np.ascontiguousarray(log_init, dtype=np.float64)
    cdef const double[:, ::1] lt = np.ascontiguousarray(log_trans, dtype=np.float64)
    cdef const double[:, ::1] ob = np.ascontiguousarray(obs, dtype=np.float64)
    cdef Py_ssize_t n_frames = ob.shape[0], n_states = ob.shape[1]
    back_arr = np.zeros((n_frames, n_states), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] back = back_arr
    cur_arr = np.empty(n_states)
    prev_arr = np.empty(n_states)
    cdef double[::1] cur = cur_arr
    cdef double[::1] prev = prev_arr
    path_arr = np.empty(n_frames, dtype=np.int64)
    cdef cnp.int64_t[::1] path = path_arr
    cdef Py_ssize_t t, i, j, arg
    cdef double bestv, v
    with nogil:
        for j in range(n_states):
            prev[j] = li[j] + ob[0, j]
        for t in range(1, n_frames):
            for j in range(n_states):
                bestv = prev[0] + lt[0, j]
                arg = 0
                for i in range(1, n_states):
                    v = prev[i] + lt[i, j]
                    if v > bestv:
                        bestv = v
                        arg = i
                back[t, j] = arg
                cur[j] = bestv + ob[t, j]
            for j in range(n_states):
                prev[j] = cur[j]
        arg = 0
        bestv = prev[0]
        for j in range(1, n_states):
            if prev[j] > bestv:
                bestv = prev[j]
                arg = j
        path[n_frames - 1] = arg
        t = n_frames - 1
        while t > 0:
            path[t - 1] = back[t, path[t]]
            t -= 1
    return path_arr, float(bestv)
