"""DBSCAN and OPTICS over haversine neighborhoods.

Conventions shared by both algorithms: neighborhoods are closed balls
(distance <= eps) that include the query point, min_samples counts are
self-inclusive, and core distance is the distance to the min_samples-th
nearest point with self counted first. Scan order, queue tie-breaking, and
cluster numbering are all deterministic for a fixed point order.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from geoclust import backend
from geoclust.errors import PreconditionError
from geoclust.geo import build_radius_index
from geoclust.ingest import Dataset
from geoclust.labeling import Labeling

_UNVISITED = -2
_NOISE = -1


@dataclass(frozen=True)
class DensityParams:
    """eps / min_samples for DBSCAN, plus the OPTICS scan ceiling."""

    eps_km: float = 5.0
    min_samples: int = 300
    max_eps_km: float = math.inf

    def __post_init__(self):
        if self.eps_km <= 0:
            raise PreconditionError(f"eps_km must be positive, got {self.eps_km}")
        if self.min_samples < 1:
            raise PreconditionError(f"min_samples must be >= 1, got {self.min_samples}")
        if self.max_eps_km < self.eps_km:
            raise PreconditionError("max_eps_km must be >= eps_km")


@dataclass(frozen=True)
class OpticsOrdering:
    """Reachability chart: visit order plus per-point distances.

    order is the visit permutation; reachability, core_distance (km, +inf for
    undefined) and predecessor (-1 for none) are indexed by point, not by
    visit position. min_samples and max_eps_km record the build parameters.
    """

    order: np.ndarray
    reachability: np.ndarray
    core_distance: np.ndarray
    predecessor: np.ndarray
    min_samples: int
    max_eps_km: float

    def reachability_in_order(self) -> np.ndarray:
        return self.reachability[self.order]


def dbscan(dataset: Dataset, params: DensityParams) -> Labeling:
    """Density clustering: core points, border points, and -1 noise.

    Clusters are grown from unvisited core points in index order; border
    points belong to the first cluster that claims them, so labels are
    reproducible for a fixed input order.
    """
    n = dataset.n
    labels = np.full(n, _UNVISITED, dtype=np.int64)
    if n == 0:
        return Labeling(labels)
    index = build_radius_index(dataset.coords, params.eps_km)
    min_samples = params.min_samples
    cluster_id = 0
    for seed in range(n):
        if labels[seed] != _UNVISITED:
            continue
        neighbors = index.neighbors(seed)
        if len(neighbors) < min_samples:
            labels[seed] = _NOISE
            continue
        labels[seed] = cluster_id
        claim = neighbors[labels[neighbors] < 0]  # unvisited or provisional noise
        labels[claim] = cluster_id
        queue = deque(claim.tolist())
        while queue:
            q = queue.popleft()
            q_neighbors = index.neighbors(q)
            if len(q_neighbors) < min_samples:
                continue  # border point: claimed, but does not expand
            claim = q_neighbors[labels[q_neighbors] < 0]
            labels[claim] = cluster_id
            queue.extend(claim.tolist())
        cluster_id += 1
    return Labeling(labels)


def optics(dataset: Dataset, params: DensityParams) -> OpticsOrdering:
    """OPTICS sweep producing the reachability ordering.

    Unprocessed points seed new components in index order; the priority
    queue pops the smallest reachability with ties broken by smallest point
    index; neighborhoods are limited to max_eps_km. With an infinite
    max_eps_km every neighborhood is the whole dataset, so the sweep switches
    to a dense array scan instead of a queue.
    """
    n = dataset.n
    order = np.empty(n, dtype=np.int64)
    reach = np.full(n, np.inf)
    core = np.full(n, np.inf)
    pred = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return OpticsOrdering(order, reach, core, pred, params.min_samples, params.max_eps_km)
    if math.isinf(params.max_eps_km):
        _optics_dense(dataset, params.min_samples, order, reach, core, pred)
    else:
        _optics_queued(dataset, params, order, reach, core, pred)
    return OpticsOrdering(order, reach, core, pred, params.min_samples, params.max_eps_km)


def _optics_dense(dataset, min_samples, order, reach, core, pred):
    # max_eps = inf: every point's neighborhood is all n points, so keep
    # reachabilities in a flat array and pop by vectorized argmin instead of
    # maintaining a heap with n updates per expansion.
    coords = dataset.coords
    n = len(coords)
    lat = np.radians(coords[:, 0])
    lon = np.radians(coords[:, 1])
    coslat = np.cos(lat)
    key = np.full(n, np.inf)  # reach with processed points masked out
    processed = np.zeros(n, dtype=bool)
    next_seed = 0
    for pos in range(n):
        p = int(np.argmin(key))
        if not np.isfinite(key[p]):
            while processed[next_seed]:
                next_seed += 1
            p = next_seed
        processed[p] = True
        key[p] = np.inf
        order[pos] = p
        d = backend.haversine_to_point_km(lat[p], lon[p], coslat[p], lat, lon, coslat)
        if min_samples <= n:
            core[p] = np.partition(d, min_samples - 1)[min_samples - 1]
        if np.isfinite(core[p]):
            new_reach = np.maximum(d, core[p])
            improve = ~processed & (new_reach < reach)
            reach[improve] = new_reach[improve]
            key[improve] = new_reach[improve]
            pred[improve] = p


def _optics_queued(dataset, params, order, reach, core, pred):
    index = build_radius_index(dataset.coords, params.max_eps_km)
    min_samples = params.min_samples
    n = dataset.n
    processed = np.zeros(n, dtype=bool)
    seeds: list[tuple[float, int]] = []  # lazy-deletion heap of (reach, index)
    pos = 0

    def expand(p: int):
        nonlocal pos
        processed[p] = True
        order[pos] = p
        pos += 1
        neighbors, dists = index.neighbors_with_distances(p)
        if len(neighbors) >= min_samples:
            core[p] = np.partition(dists, min_samples - 1)[min_samples - 1]
            new_reach = np.maximum(dists, core[p])
            for q, r in zip(neighbors.tolist(), new_reach.tolist()):
                if not processed[q] and r < reach[q]:
                    reach[q] = r
                    pred[q] = p
                    heapq.heappush(seeds, (r, q))

    for seed in range(n):
        if processed[seed]:
            continue
        expand(seed)
        while seeds:
            r, q = heapq.heappop(seeds)
            if processed[q] or r != reach[q]:
                continue  # stale entry superseded by a better reachability
            expand(q)


def extract_dbscan_cut(ordering: OpticsOrdering, eps_km: float, min_samples: int) -> Labeling:
    """DBSCAN-equivalent labeling from a reachability ordering, cut at eps.

    Walking the order: a point with reachability > eps starts a new cluster
    if its core distance is <= eps, and is noise otherwise; any other point
    joins the current cluster. Matches dbscan() at the same eps/min_samples
    on core points (border points can differ).
    """
    if eps_km > ordering.max_eps_km:
        raise PreconditionError(
            f"cut eps {eps_km} exceeds the ordering's max_eps {ordering.max_eps_km}"
        )
    if min_samples != ordering.min_samples:
        raise PreconditionError(
            f"cut min_samples {min_samples} differs from the ordering's {ordering.min_samples}"
        )
    n = len(ordering.order)
    labels = np.full(n, _NOISE, dtype=np.int64)
    cluster_id = -1
    for p in ordering.order.tolist():
        if ordering.reachability[p] > eps_km:
            if ordering.core_distance[p] <= eps_km:
                cluster_id += 1
                labels[p] = cluster_id
            # else: noise
        else:
            labels[p] = cluster_id
    return Labeling(labels)


def write_reachability_csv(ordering: OpticsOrdering, path) -> None:
    """Two-column reachability chart (visit_position, reachability_km).

    Infinite reachability is rendered as the literal "inf".
    """
    values = ordering.reachability_in_order()
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("visit_position,reachability_km\n")
        for i, v in enumerate(values.tolist()):
            fh.write(f"{i},{'inf' if math.isinf(v) else repr(v)}\n")
