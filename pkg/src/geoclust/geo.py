"""Geographic primitives: point type, haversine distance, and a radius-query grid index.

All coordinates are stored in decimal degrees; conversion to radians happens
only inside the distance kernels. Distances are great-circle kilometres on a
sphere of radius EARTH_RADIUS_KM.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from geoclust import backend
from geoclust.errors import PreconditionError

EARTH_RADIUS_KM = 6371.0

# Above this latitude the 1/cos(lat) longitude-bin widening blows up, so the
# grid index keeps polar points in a bucket that every query scans.
POLAR_LAT_DEG = 85.0

# Below this many points a grid buys nothing; scan everything.
EXHAUSTIVE_THRESHOLD = 64


@dataclass(frozen=True)
class GeoPoint:
    """One location as latitude/longitude in decimal degrees."""

    lat_deg: float
    lon_deg: float

    def __post_init__(self):
        if not (math.isfinite(self.lat_deg) and math.isfinite(self.lon_deg)):
            raise PreconditionError(f"coordinates must be finite, got ({self.lat_deg}, {self.lon_deg})")
        if not -90.0 <= self.lat_deg <= 90.0:
            raise PreconditionError(f"latitude {self.lat_deg} outside [-90, 90]")
        if not -180.0 <= self.lon_deg <= 180.0:
            raise PreconditionError(f"longitude {self.lon_deg} outside [-180, 180]")


def haversine_km(p: GeoPoint, q: GeoPoint) -> float:
    """Great-circle distance in km between two points on the R=6371 sphere."""
    lat1, lon1 = math.radians(p.lat_deg), math.radians(p.lon_deg)
    lat2, lon2 = math.radians(q.lat_deg), math.radians(q.lon_deg)
    sdlat = math.sin((lat2 - lat1) / 2.0)
    sdlon = math.sin((lon2 - lon1) / 2.0)
    h = sdlat * sdlat + math.cos(lat1) * math.cos(lat2) * sdlon * sdlon
    # guard the sqrt/asin against rounding just past 1.0 near antipodes
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def km_to_radians(d_km: float) -> float:
    """Convert a distance in km to the central angle in radians (d / 6371)."""
    if d_km < 0:
        raise PreconditionError(f"distance must be non-negative, got {d_km}")
    return d_km / EARTH_RADIUS_KM


class RadiusIndex:
    """Fixed-radius neighbor index over an immutable set of points.

    Latitude rows have angular height radius/R; within a row, longitude bins
    are widened by 1/cos(lat) at the row's poleward edge (capped at
    POLAR_LAT_DEG). A query enumerates the rows within one of its own and all
    longitude bins overlapping the ball's bounding window, splitting the
    window where it crosses the +-180 meridian. Points poleward of
    POLAR_LAT_DEG live in a bucket appended to every candidate set.

    neighbors(i) returns exactly the closed-ball set
    {j : haversine(i, j) <= radius_km}, i included, sorted by index.
    Immutable after construction; concurrent queries are safe.
    """

    def __init__(self, coords: np.ndarray, radius_km: float):
        if radius_km <= 0:
            raise PreconditionError(f"radius_km must be positive, got {radius_km}")
        self.radius_km = float(radius_km)
        self._coords = np.ascontiguousarray(coords, dtype=np.float64)
        n = len(self._coords)
        self._lat_rad = np.radians(self._coords[:, 0])
        self._lon_rad = np.radians(self._coords[:, 1])
        self._cos_lat = np.cos(self._lat_rad)
        self._exhaustive = n < EXHAUSTIVE_THRESHOLD
        if self._exhaustive:
            return

        self._ang_deg = math.degrees(radius_km / EARTH_RADIUS_KM)  # row height
        lat = self._coords[:, 0]
        lon = self._coords[:, 1]
        polar = np.abs(lat) > POLAR_LAT_DEG
        self._polar_idx = np.flatnonzero(polar)

        rows = np.floor((lat + 90.0) / self._ang_deg).astype(np.int64)
        cells: dict[tuple[int, int], list[int]] = {}
        for i in np.flatnonzero(~polar):
            key = (int(rows[i]), self._lon_bin(int(rows[i]), lon[i]))
            cells.setdefault(key, []).append(int(i))
        self._cells = {k: np.asarray(v, dtype=np.int64) for k, v in cells.items()}

    def _row_cos_min(self, row: int) -> float:
        # smallest cos(lat) over the row, i.e. at its poleward edge
        lo = -90.0 + row * self._ang_deg
        hi = lo + self._ang_deg
        edge = max(abs(lo), abs(hi))
        return math.cos(math.radians(min(edge, POLAR_LAT_DEG)))

    def _lon_bin_width(self, row: int) -> float:
        return self._ang_deg / max(self._row_cos_min(row), 1e-12)

    def _lon_bin(self, row: int, lon_deg: float) -> int:
        return int(math.floor((lon_deg + 180.0) / self._lon_bin_width(row)))

    @staticmethod
    def _lon_windows(lon0: float, dlon: float) -> list[tuple[float, float]]:
        if dlon >= 180.0:
            return [(-180.0, 180.0)]
        lo, hi = lon0 - dlon, lon0 + dlon
        windows = [(max(lo, -180.0), min(hi, 180.0))]
        if hi > 180.0:
            windows.append((-180.0, hi - 360.0))
        if lo < -180.0:
            windows.append((lo + 360.0, 180.0))
        return windows

    def _candidates(self, i: int) -> np.ndarray:
        lat0 = self._coords[i, 0]
        lon0 = self._coords[i, 1]
        ang = self._ang_deg
        if abs(lat0) > POLAR_LAT_DEG or abs(lat0) + ang >= 90.0:
            # query ball may contain a pole; bounding-window math breaks down
            return np.arange(len(self._coords), dtype=np.int64)

        # widest longitude deviation of the radius ball, at the query latitude
        ratio = math.sin(self.radius_km / EARTH_RADIUS_KM) / math.cos(math.radians(lat0))
        dlon = 180.0 if ratio >= 1.0 else math.degrees(math.asin(ratio))

        row0 = int(math.floor((lat0 + 90.0) / ang))
        max_row = int(math.floor(180.0 / ang))
        chunks = [self._polar_idx] if len(self._polar_idx) else []
        for row in range(max(row0 - 1, 0), min(row0 + 1, max_row) + 1):
            width = self._lon_bin_width(row)
            for wlo, whi in self._lon_windows(lon0, dlon):
                b_lo = int(math.floor((wlo + 180.0) / width))
                b_hi = int(math.floor((whi + 180.0) / width))
                for b in range(b_lo, b_hi + 1):
                    arr = self._cells.get((row, b))
                    if arr is not None:
                        chunks.append(arr)
        if not chunks:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate(chunks))

    def _query(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        if self._exhaustive:
            cand = np.arange(len(self._coords), dtype=np.int64)
        else:
            cand = self._candidates(i)
        d = backend.haversine_to_point_km(
            self._lat_rad[i],
            self._lon_rad[i],
            self._cos_lat[i],
            self._lat_rad[cand],
            self._lon_rad[cand],
            self._cos_lat[cand],
        )
        keep = d <= self.radius_km
        return cand[keep], d[keep]

    def neighbors(self, i: int) -> np.ndarray:
        """Indices of all points within radius_km of point i (closed ball, sorted)."""
        return self._query(i)[0]

    def neighbors_with_distances(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Like neighbors(i) but also returns the matching distances in km."""
        return self._query(i)


def build_radius_index(coords: np.ndarray, radius_km: float) -> RadiusIndex:
    """Build a RadiusIndex over an (n, 2) array of [lat_deg, lon_deg] rows."""
    return RadiusIndex(coords, radius_km)
