"""k-means and mini-batch k-means in degree space, plus k selection.

Partitional methods use squared Euclidean distance on raw degree
coordinates; nearest-center ties always break toward the lowest center
index, and every run is deterministic for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from geoclust import backend
from geoclust.errors import PreconditionError
from geoclust.geo import EARTH_RADIUS_KM
from geoclust.ingest import Dataset
from geoclust.labeling import Labeling

_KM_PER_DEG = EARTH_RADIUS_KM * math.pi / 180.0


@dataclass(frozen=True)
class KMeansParams:
    k: int
    init: str = "random-from-data"  # or "kmeanspp"
    seed: int = 0
    max_iter: int = 300
    tol_km: float = 0.1

    def __post_init__(self):
        if self.k < 1:
            raise PreconditionError(f"k must be >= 1, got {self.k}")
        if self.max_iter < 1:
            raise PreconditionError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol_km < 0:
            raise PreconditionError(f"tol_km must be >= 0, got {self.tol_km}")
        if self.init not in ("random-from-data", "kmeanspp"):
            raise PreconditionError(f"unknown init {self.init!r}")


@dataclass(frozen=True)
class MiniBatchParams:
    k: int
    batch_size: int = 100
    n_iter: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise PreconditionError(f"k must be >= 1, got {self.k}")
        if self.batch_size < 1:
            raise PreconditionError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.n_iter < 1:
            raise PreconditionError(f"n_iter must be >= 1, got {self.n_iter}")


@dataclass(frozen=True)
class KMeansModel:
    """Fitted centers in degree space plus fit diagnostics."""

    centers: np.ndarray
    inertia: float
    iterations_run: int
    converged: bool
    inertia_trace: tuple[float, ...] = field(default=(), repr=False)


def _check_fit_preconditions(dataset: Dataset, k: int) -> None:
    if dataset.n < k:
        raise PreconditionError(f"dataset has {dataset.n} points, fewer than k={k}")
    if len(np.unique(dataset.coords, axis=0)) < k:
        raise PreconditionError(f"dataset has fewer than k={k} distinct points")


def _init_centers(coords: np.ndarray, k: int, init: str, rng: np.random.Generator) -> np.ndarray:
    if init == "random-from-data":
        distinct = np.unique(coords, axis=0)
        pick = rng.choice(len(distinct), size=k, replace=False)
        return distinct[pick].copy()
    # kmeans++: spread initial centers by squared-distance-weighted sampling
    centers = np.empty((k, 2))
    centers[0] = coords[rng.integers(len(coords))]
    d2 = ((coords - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all remaining mass at chosen centers; fall back to distinct points
            distinct = np.unique(coords, axis=0)
            pick = rng.choice(len(distinct), size=k - c, replace=False)
            centers[c:] = distinct[pick]
            break
        centers[c] = coords[rng.choice(len(coords), p=d2 / total)]
        d2 = np.minimum(d2, ((coords - centers[c]) ** 2).sum(axis=1))
    return centers


def _center_shift_km(old: np.ndarray, new: np.ndarray, mean_lat_deg: float) -> float:
    # degree shifts converted to km at the dataset's mean latitude
    dlat = (new[:, 0] - old[:, 0]) * _KM_PER_DEG
    dlon = (new[:, 1] - old[:, 1]) * _KM_PER_DEG * math.cos(math.radians(mean_lat_deg))
    return float(np.sqrt(dlat * dlat + dlon * dlon).max())


def _repair_empty_clusters(coords, centers, labels, sqdist) -> None:
    # reset each empty cluster's center to the point farthest from its
    # current nearest center (deterministic; farthest-first for several)
    counts = np.bincount(labels, minlength=len(centers))
    empties = np.flatnonzero(counts == 0)
    if not len(empties):
        return
    dist = sqdist.copy()
    for c in empties:
        far = int(np.argmax(dist))
        centers[c] = coords[far]
        dist[far] = -1.0  # do not reuse the same point for the next empty
        labels[far] = c


def kmeans_fit(dataset: Dataset, params: KMeansParams) -> tuple[KMeansModel, Labeling]:
    """Lloyd iterations until centers move less than tol_km or max_iter."""
    _check_fit_preconditions(dataset, params.k)
    coords = dataset.coords
    rng = np.random.default_rng(params.seed)
    centers = _init_centers(coords, params.k, params.init, rng)
    mean_lat = float(coords[:, 0].mean())
    trace: list[float] = []
    converged = False
    iterations = 0
    for iterations in range(1, params.max_iter + 1):
        labels, sqdist = backend.nearest_center(coords, centers)
        _repair_empty_clusters(coords, centers, labels, sqdist)
        trace.append(float(sqdist.sum()))
        new_centers = np.empty_like(centers)
        for c in range(params.k):
            members = coords[labels == c]
            # repair can re-empty a cluster by stealing its last point
            new_centers[c] = members.mean(axis=0) if len(members) else centers[c]
        shift = _center_shift_km(centers, new_centers, mean_lat)
        centers = new_centers
        if shift < params.tol_km:
            converged = True
            break
    labels, sqdist = backend.nearest_center(coords, centers)
    inertia = float(sqdist.sum())
    trace.append(inertia)
    model = KMeansModel(centers, inertia, iterations, converged, tuple(trace))
    return model, Labeling(labels)


def minibatch_kmeans_fit(dataset: Dataset, params: MiniBatchParams) -> tuple[KMeansModel, Labeling]:
    """Streaming-mean k-means over fixed-size random batches.

    Each batch point moves its nearest center with learning rate
    1/(assignment count so far); a final full pass produces the labeling and
    inertia. No convergence test is performed, so converged is always False.
    """
    _check_fit_preconditions(dataset, params.k)
    if params.batch_size > dataset.n:
        raise PreconditionError(
            f"batch_size {params.batch_size} exceeds dataset size {dataset.n}"
        )
    coords = dataset.coords
    rng = np.random.default_rng(params.seed)
    centers = _init_centers(coords, params.k, "random-from-data", rng)
    counts = np.zeros(params.k, dtype=np.int64)
    for _ in range(params.n_iter):
        batch_idx = rng.choice(dataset.n, size=params.batch_size, replace=False)
        batch = coords[batch_idx]
        assign, _ = backend.nearest_center(batch, centers)
        for j in range(params.batch_size):
            c = assign[j]
            counts[c] += 1
            eta = 1.0 / counts[c]
            centers[c] = (1.0 - eta) * centers[c] + eta * batch[j]
    labels, sqdist = backend.nearest_center(coords, centers)
    model = KMeansModel(centers, float(sqdist.sum()), params.n_iter, False)
    return model, Labeling(labels)


def _selection_params(k: int, seed: int) -> KMeansParams:
    # kmeans++ keeps per-k fits stable enough for curve comparison; each k
    # gets an independent stream derived from (seed, k)
    return KMeansParams(k=k, init="kmeanspp", seed=_derived_seed(seed, k))


def _derived_seed(seed: int, k: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=(k,)).generate_state(1)[0])


def select_k_elbow(
    dataset: Dataset, k_min: int, k_max: int, seed: int
) -> tuple[int, list[tuple[int, float]]]:
    """Pick k by the largest gap between the inertia curve and its chord.

    The perpendicular distance to the chord joining the curve's endpoints is
    proportional to the vertical gap, so the gap itself is maximized; ties
    (including a perfectly linear curve) break toward the smallest k.
    """
    if not 1 <= k_min < k_max:
        raise PreconditionError(f"need 1 <= k_min < k_max, got [{k_min}, {k_max}]")
    if k_max > dataset.n:
        raise PreconditionError(f"k_max {k_max} exceeds dataset size {dataset.n}")
    ks = list(range(k_min, k_max + 1))
    inertias = [kmeans_fit(dataset, _selection_params(k, seed))[0].inertia for k in ks]
    first, last = inertias[0], inertias[-1]
    span = ks[-1] - ks[0]
    best_k, best_gap = ks[0], -math.inf
    for k, inertia in zip(ks, inertias):
        chord = first + (last - first) * (k - ks[0]) / span
        gap = chord - inertia
        if gap > best_gap + 1e-12:
            best_k, best_gap = k, gap
    return best_k, list(zip(ks, inertias))


def select_k_silhouette(
    dataset: Dataset, k_min: int, k_max: int, seed: int
) -> tuple[int, list[tuple[int, float]]]:
    """Pick the k whose k-means labeling has the best mean silhouette."""
    from geoclust.validity import silhouette_score

    if k_min < 2:
        raise PreconditionError(f"silhouette selection needs k_min >= 2, got {k_min}")
    if not k_min < k_max:
        raise PreconditionError(f"need k_min < k_max, got [{k_min}, {k_max}]")
    if k_max > dataset.n:
        raise PreconditionError(f"k_max {k_max} exceeds dataset size {dataset.n}")
    curve = []
    best_k, best_score = k_min, -math.inf
    for k in range(k_min, k_max + 1):
        _, labeling = kmeans_fit(dataset, _selection_params(k, seed))
        score = silhouette_score(dataset, labeling)
        curve.append((k, score))
        if score > best_score + 1e-12:
            best_k, best_score = k, score
    return best_k, curve
