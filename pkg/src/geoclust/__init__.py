"""Geospatial hotspot clustering toolkit.

Clusters latitude/longitude point sets with k-means, mini-batch k-means,
DBSCAN, and OPTICS, scores the results with internal validity indices
(silhouette, Davies-Bouldin, Calinski-Harabasz), and times the algorithms
across dataset sizes. See the `geoclust` CLI for the end-to-end pipeline.
"""

from geoclust.backend import BACKEND
from geoclust.errors import DataError, PreconditionError
from geoclust.geo import EARTH_RADIUS_KM, GeoPoint, build_radius_index, haversine_km, km_to_radians
from geoclust.ingest import Dataset, IngestReport, load_csv, subsample, synth_blobs
from geoclust.labeling import Labeling

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DataError",
    "Dataset",
    "EARTH_RADIUS_KM",
    "GeoPoint",
    "IngestReport",
    "Labeling",
    "PreconditionError",
    "build_radius_index",
    "haversine_km",
    "km_to_radians",
    "load_csv",
    "subsample",
    "synth_blobs",
    "__version__",
]
