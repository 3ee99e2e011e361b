"""Numpy implementations of the hot kernels.

Fallback twin of the compiled geoclust._core module: same functions, same
signatures, same arithmetic per element, so results agree with the compiled
backend to float rounding (and exactly, for nearest_center labels).
All angles are radians; all distances are km on the R=6371 sphere.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"

_EARTH_RADIUS_KM = 6371.0


def haversine_to_point_km(lat0, lon0, coslat0, lats, lons, coslats):
    """Distances from one point to many. Angles in radians, cos(lat) precomputed."""
    sdlat = np.sin((lats - lat0) * 0.5)
    sdlon = np.sin((lons - lon0) * 0.5)
    h = sdlat * sdlat + coslat0 * coslats * sdlon * sdlon
    np.clip(h, 0.0, 1.0, out=h)
    return 2.0 * _EARTH_RADIUS_KM * np.arcsin(np.sqrt(h))


def nearest_center(xy, centers):
    """Nearest center per row of xy under squared Euclidean distance.

    Ties go to the lowest center index. Returns (labels int64, sqdist float64).
    """
    n = xy.shape[0]
    k = centers.shape[0]
    d2 = np.empty((n, k))
    for c in range(k):
        dx = xy[:, 0] - centers[c, 0]
        dy = xy[:, 1] - centers[c, 1]
        d2[:, c] = dx * dx + dy * dy
    labels = np.argmin(d2, axis=1).astype(np.int64)
    return labels, d2[np.arange(n), labels]


def cluster_distance_sums(xy, labels, k, block=512):
    """sums[i, c] = sum over points j with label c of euclidean(xy[i], xy[j]).

    The self-distance contributes 0. Work is blocked over query rows to bound
    memory at block * n floats.
    """
    n = xy.shape[0]
    sums = np.zeros((n, k))
    for start in range(0, n, block):
        stop = min(start + block, n)
        dx = xy[start:stop, 0][:, None] - xy[None, :, 0]
        dy = xy[start:stop, 1][:, None] - xy[None, :, 1]
        d = np.sqrt(dx * dx + dy * dy)
        for c in range(k):
            sums[start:stop, c] = d[:, labels == c].sum(axis=1)
    return sums
