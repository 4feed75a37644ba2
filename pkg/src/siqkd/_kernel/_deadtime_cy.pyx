# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython dead-time filter, kept in lockstep with the Python fallback."""

import numpy as np

cimport numpy as cnp


def deadtime_filter(cnp.float64_t[::1] times,
                    cnp.int64_t[::1] detectors,
                    cnp.float64_t[::1] dead_times,
                    Py_ssize_t n_detectors):
    cdef Py_ssize_t n = times.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] accepted = \
        np.zeros(n, dtype=bool)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] live_at = \
        np.full(n_detectors, -np.inf)
    cdef cnp.float64_t[::1] live = live_at
    cdef cnp.uint8_t[::1] acc = accepted
    cdef Py_ssize_t i, d
    cdef double t
    for i in range(n):
        d = detectors[i]
        t = times[i]
        if t >= live[d]:
            acc[i] = True
            live[d] = t + dead_times[d]
    return accepted
