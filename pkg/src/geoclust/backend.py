"""Kernel backend selection.

Imports the compiled extension (geoclust._core) when available, otherwise the
numpy fallback (geoclust._core_py). Set GEOCLUST_PURE_PYTHON=1 to force the
fallback, e.g. to compare backends.
"""

from __future__ import annotations

import os

if os.environ.get("GEOCLUST_PURE_PYTHON"):
    from geoclust import _core_py as _impl
else:
    try:
        from geoclust import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        from geoclust import _core_py as _impl

BACKEND = _impl.BACKEND
haversine_to_point_km = _impl.haversine_to_point_km
nearest_center = _impl.nearest_center
cluster_distance_sums = _impl.cluster_distance_sums
