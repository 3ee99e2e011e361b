"""Dataset loading, validation, subsampling, and synthetic blob generation.

The CSV reader keeps only the two named coordinate columns, drops (and
counts) rows it cannot use, and never repairs values. Point order always
follows the input file.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from geoclust.errors import DataError, PreconditionError
from geoclust.geo import EARTH_RADIUS_KM, GeoPoint
from geoclust.labeling import Labeling

DEFAULT_LAT_COLUMN = "Latitude"
DEFAULT_LON_COLUMN = "Longitude"

_KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0


class Dataset:
    """Ordered, immutable collection of lat/lon points in degrees.

    coords is an (n, 2) float64 array of [lat_deg, lon_deg] rows; source is a
    free-text origin label. Values are validated on construction and the
    array is frozen, so instances are safe to share between tasks.
    """

    __slots__ = ("coords", "source")

    def __init__(self, coords, source: str = ""):
        arr = np.ascontiguousarray(coords, dtype=np.float64).reshape(-1, 2)
        if arr.size:
            if not np.all(np.isfinite(arr)):
                raise PreconditionError("coordinates must be finite")
            lat, lon = arr[:, 0], arr[:, 1]
            if lat.min() < -90.0 or lat.max() > 90.0:
                raise PreconditionError("latitude outside [-90, 90]")
            if lon.min() < -180.0 or lon.max() > 180.0:
                raise PreconditionError("longitude outside [-180, 180]")
        arr.setflags(write=False)
        self.coords = arr
        self.source = source

    @property
    def n(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.source == other.source and np.array_equal(self.coords, other.coords)

    def __hash__(self):
        return hash((self.source, self.coords.tobytes()))

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, source={self.source!r})"

    def point(self, i: int) -> GeoPoint:
        return GeoPoint(float(self.coords[i, 0]), float(self.coords[i, 1]))

    @property
    def points(self) -> list[GeoPoint]:
        return [self.point(i) for i in range(self.n)]


@dataclass(frozen=True)
class IngestReport:
    """Row accounting for one load: read = kept + invalid + duplicate."""

    rows_read: int
    rows_kept: int
    rows_dropped_invalid: int
    rows_dropped_duplicate: int

    def __post_init__(self):
        if self.rows_read != self.rows_kept + self.rows_dropped_invalid + self.rows_dropped_duplicate:
            raise PreconditionError("ingest report rows do not add up")


def _parse_coord(cell: str | None, lo: float, hi: float) -> float | None:
    if cell is None:
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    if not math.isfinite(value) or not lo <= value <= hi:
        return None
    return value


def load_csv(
    path,
    lat_column: str = DEFAULT_LAT_COLUMN,
    lon_column: str = DEFAULT_LON_COLUMN,
    dedupe: bool = False,
) -> tuple[Dataset, IngestReport]:
    """Load a header-first CSV of decimal-degree coordinates.

    Rows with unparseable numbers, missing cells, or out-of-range coordinates
    are dropped and counted; with dedupe=True exact coordinate duplicates
    after the first are dropped and counted. An empty (but well-formed) file
    yields an empty Dataset; deciding whether that is fatal is the caller's
    job.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    rows_read = 0
    dropped_invalid = 0
    dropped_duplicate = 0
    kept: list[tuple[float, float]] = []
    seen: set[tuple[float, float]] = set()
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataError(f"{path}: empty file, expected a header row")
        for col in (lat_column, lon_column):
            if col not in reader.fieldnames:
                raise DataError(f"{path}: missing column {col!r} (has {reader.fieldnames})")
        for row in reader:
            rows_read += 1
            lat = _parse_coord(row.get(lat_column), -90.0, 90.0)
            lon = _parse_coord(row.get(lon_column), -180.0, 180.0)
            if lat is None or lon is None:
                dropped_invalid += 1
                continue
            if dedupe:
                key = (lat, lon)
                if key in seen:
                    dropped_duplicate += 1
                    continue
                seen.add(key)
            kept.append((lat, lon))
    coords = np.asarray(kept, dtype=np.float64).reshape(-1, 2)
    report = IngestReport(rows_read, len(kept), dropped_invalid, dropped_duplicate)
    return Dataset(coords, source=str(path)), report


def bundled_fixture_path() -> Path:
    """Path of the packaged two-blob demo CSV (Latitude/Longitude header)."""
    return Path(resources.files("geoclust").joinpath("data", "two_blobs.csv"))


def subsample(dataset: Dataset, n: int, seed: int) -> Dataset:
    """Uniform sample of n points without replacement, input order preserved."""
    if not 0 <= n <= dataset.n:
        raise PreconditionError(f"subsample size {n} exceeds dataset size {dataset.n}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(dataset.n, size=n, replace=False))
    return Dataset(dataset.coords[idx], source=dataset.source)


def synth_blobs(
    n_per_blob: int,
    centers: list[GeoPoint],
    spread_km: float,
    seed: int,
) -> tuple[Dataset, Labeling]:
    """Gaussian blobs around the given centers, plus the ground-truth labels.

    spread_km is the isotropic standard deviation in km, converted to degrees
    at each center's latitude. Points are clamped to valid coordinate ranges.
    """
    if not centers:
        raise PreconditionError("need at least one blob center")
    if spread_km <= 0:
        raise PreconditionError(f"spread_km must be positive, got {spread_km}")
    rng = np.random.default_rng(seed)
    coords = []
    labels = []
    for b, center in enumerate(centers):
        sigma_lat = spread_km / _KM_PER_DEG
        sigma_lon = spread_km / (_KM_PER_DEG * max(math.cos(math.radians(center.lat_deg)), 1e-12))
        lat = rng.normal(center.lat_deg, sigma_lat, size=n_per_blob)
        lon = rng.normal(center.lon_deg, sigma_lon, size=n_per_blob)
        coords.append(np.column_stack([np.clip(lat, -90.0, 90.0), np.clip(lon, -180.0, 180.0)]))
        labels.append(np.full(n_per_blob, b, dtype=np.int64))
    dataset = Dataset(
        np.concatenate(coords),
        source=f"synth_blobs(n_per_blob={n_per_blob}, centers={len(centers)}, spread_km={spread_km}, seed={seed})",
    )
    return dataset, Labeling(np.concatenate(labels))
