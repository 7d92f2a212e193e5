# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels.

Semantics and float arithmetic mirror ``_pure`` exactly; see the numpy
module for the contract docstrings.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite, sqrt

cnp.import_array()

BACKEND = "native"

cdef double MIN_HIT_DISTANCE = 1e-9


def cast_rays(origins, directions, centers, double cos_half_angle):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] o = np.ascontiguousarray(origins, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] u = np.ascontiguousarray(directions, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef Py_ssize_t n = o.shape[0]
    cdef Py_ssize_t h = c.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] hit = np.full(n, -1, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist = np.full(n, np.nan, dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double rx, ry, rz, dot, d, best_d
    cdef Py_ssize_t best_j
    for i in range(n):
        best_j = -1
        best_d = 0.0
        for j in range(h):
            rx = c[j, 0] - o[i, 0]
            ry = c[j, 1] - o[i, 1]
            rz = c[j, 2] - o[i, 2]
            dot = (rx * u[i, 0] + ry * u[i, 1]) + rz * u[i, 2]
            d = sqrt((rx * rx + ry * ry) + rz * rz)
            if d > MIN_HIT_DISTANCE and dot > 0.0 and dot >= cos_half_angle * d:
                if best_j < 0 or d < best_d:
                    best_j = j
                    best_d = d
        if best_j >= 0:
            hit[i] = best_j
            dist[i] = best_d
    return hit, dist


def segment_runs(ids, times, double gap_tolerance):
    cdef cnp.ndarray[cnp.int64_t, ndim=1] a = np.ascontiguousarray(ids, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(times, dtype=np.float64)
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] run_ids = np.empty(n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] start_t = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] end_t = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.empty(n, dtype=np.int64)
    cdef Py_ssize_t i, k = 0
    cdef cnp.int64_t cur = -1
    cdef double last_t = 0.0
    for i in range(n):
        if a[i] < 0:
            continue
        if cur >= 0 and a[i] == cur and t[i] - last_t <= gap_tolerance:
            end_t[k - 1] = t[i]
            counts[k - 1] += 1
        else:
            run_ids[k] = a[i]
            start_t[k] = t[i]
            end_t[k] = t[i]
            counts[k] = 1
            k += 1
            cur = a[i]
        last_t = t[i]
    return (
        np.ascontiguousarray(run_ids[:k]),
        np.ascontiguousarray(start_t[:k]),
        np.ascontiguousarray(end_t[:k]),
        np.ascontiguousarray(counts[:k]),
    )


def latest_in_window(press_times, hit_times, double window):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] p = np.ascontiguousarray(press_times, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] t = np.ascontiguousarray(hit_times, dtype=np.float64)
    cdef Py_ssize_t np_ = p.shape[0]
    cdef Py_ssize_t nt = t.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(np_, dtype=np.int64)
    cdef Py_ssize_t i, lo, hi, mid
    for i in range(np_):
        # rightmost index with t[idx] <= p[i]
        lo = 0
        hi = nt
        while lo < hi:
            mid = (lo + hi) // 2
            if t[mid] <= p[i]:
                lo = mid + 1
            else:
                hi = mid
        if lo > 0 and t[lo - 1] >= p[i] - window:
            out[i] = lo - 1
        else:
            out[i] = -1
    return out
