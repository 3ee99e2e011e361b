import math

import numpy as np
import pytest

from geoclust.geo import EARTH_RADIUS_KM, GeoPoint
from geoclust.ingest import Dataset, synth_blobs
from geoclust.labeling import Labeling

KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0


def meridian_dataset(offsets_km, lon=0.0):
    """Points along one meridian at the given arc offsets from the equator."""
    coords = np.array([[d / KM_PER_DEG, lon] for d in offsets_km])
    return Dataset(coords, source="meridian")


@pytest.fixture
def meridian_two_clusters():
    """Two groups of 3 points, 1 km apart inside groups, ~100 km between."""
    return meridian_dataset([0, 1, 2, 100, 101, 102])


@pytest.fixture
def line_fixture():
    """Degree-space line {0, 1, 10, 11} at the equator, labels {0, 0, 1, 1}."""
    coords = np.array([[0.0, 0.0], [0.0, 1.0], [0.0, 10.0], [0.0, 11.0]])
    return Dataset(coords, source="line"), Labeling(np.array([0, 0, 1, 1]))


@pytest.fixture
def two_blobs():
    dataset, truth = synth_blobs(
        100, [GeoPoint(35.2, -80.8), GeoPoint(36.1, -79.4)], spread_km=3.0, seed=7
    )
    return dataset, truth


def five_blob_centers():
    return [
        GeoPoint(34.0, -82.0),
        GeoPoint(34.0, -78.0),
        GeoPoint(36.5, -80.0),
        GeoPoint(39.0, -82.0),
        GeoPoint(39.0, -78.0),
    ]
