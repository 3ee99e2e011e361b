# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: haversine fan-out, nearest-center assignment,
per-cluster distance sums. Mirrors geoclust._core_py exactly; see there for
the contract of each function."""

import numpy as np

cimport numpy as cnp
from libc.math cimport asin, sin, sqrt

cnp.import_array()

BACKEND = "compiled"

cdef double EARTH_RADIUS_KM = 6371.0


def haversine_to_point_km(double lat0, double lon0, double coslat0,
                          const double[::1] lats, const double[::1] lons,
                          const double[::1] coslats):
    cdef Py_ssize_t n = lats.shape[0]
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i
    cdef double sdlat, sdlon, h
    for i in range(n):
        sdlat = sin((lats[i] - lat0) * 0.5)
        sdlon = sin((lons[i] - lon0) * 0.5)
        h = sdlat * sdlat + coslat0 * coslats[i] * sdlon * sdlon
        if h < 0.0:
            h = 0.0
        elif h > 1.0:
            h = 1.0
        out[i] = 2.0 * EARTH_RADIUS_KM * asin(sqrt(h))
    return out_arr


def nearest_center(const double[:, ::1] xy, const double[:, ::1] centers):
    cdef Py_ssize_t n = xy.shape[0]
    cdef Py_ssize_t k = centers.shape[0]
    labels_arr = np.empty(n, dtype=np.int64)
    sqdist_arr = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[::1] labels = labels_arr
    cdef double[::1] sqdist = sqdist_arr
    cdef Py_ssize_t i, c
    cdef double dx, dy, d2, best
    cdef Py_ssize_t best_c
    for i in range(n):
        best = -1.0
        best_c = 0
        for c in range(k):
            dx = xy[i, 0] - centers[c, 0]
            dy = xy[i, 1] - centers[c, 1]
            d2 = dx * dx + dy * dy
            if best < 0.0 or d2 < best:
                best = d2
                best_c = c
        labels[i] = best_c
        sqdist[i] = best
    return labels_arr, sqdist_arr


def cluster_distance_sums(const double[:, ::1] xy, const cnp.int64_t[::1] labels, Py_ssize_t k,
                          Py_ssize_t block=512):
    # block is accepted for signature parity with the python twin; the loop
    # needs no blocking here.
    cdef Py_ssize_t n = xy.shape[0]
    sums_arr = np.zeros((n, k), dtype=np.float64)
    cdef double[:, ::1] sums = sums_arr
    cdef Py_ssize_t i, j
    cdef double dx, dy
    for i in range(n):
        for j in range(n):
            dx = xy[i, 0] - xy[j, 0]
            dy = xy[i, 1] - xy[j, 1]
            sums[i, labels[j]] += sqrt(dx * dx + dy * dy)
    return sums_arr
