"""Internal cluster-validity indices with inspectable breakdowns.

Silhouette, Davies-Bouldin, and Calinski-Harabasz, all over Euclidean
distance in degree space (the centroid-based formulas presume a vector
space). Noise points (label -1) are excluded before scoring by default.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from geoclust import backend
from geoclust.errors import PreconditionError
from geoclust.ingest import Dataset
from geoclust.labeling import Labeling


@dataclass(frozen=True)
class SilhouetteSample:
    """Per-point silhouette pieces: cohesion a, separation b, value s."""

    a: float
    b: float
    s: float


@dataclass(frozen=True)
class DaviesBouldinBreakdown:
    """Per-cluster centroids, spreads, and pairwise similarity behind the score."""

    centroids: np.ndarray        # (k, 2) cluster means
    d_bar: np.ndarray            # (k,) mean member-to-centroid distance
    centroid_dist: np.ndarray    # (k, k) pairwise centroid distances
    similarity: np.ndarray       # (k, k) worst-case ratio matrix, 0 on diagonal
    per_cluster_max: np.ndarray  # (k,) max similarity to any other cluster
    score: float


@dataclass(frozen=True)
class DispersionStats:
    """Variance-ratio breakdown: total, within, and between dispersion."""

    tss: float
    ss_w: float
    ss_b: float
    n: int
    k: int
    chi: float
    global_centroid: np.ndarray
    centroids: np.ndarray
    cluster_sizes: np.ndarray

    def __post_init__(self) -> None:
        # within + between must rebuild the total dispersion exactly
        assert abs(self.ss_b + self.ss_w - self.tss) <= 1e-9 * self.tss
        assert self.ss_b >= -1e-9 * self.tss


def _clustered_subset(dataset: Dataset, labeling: Labeling, exclude_noise: bool):
    if len(labeling) != dataset.n:
        raise PreconditionError(
            f"labeling length {len(labeling)} does not match dataset size {dataset.n}"
        )
    labels = labeling.labels
    if exclude_noise:
        keep = labels >= 0
        coords = dataset.coords[keep]
        labels = labels[keep]
    else:
        if np.any(labels < 0):
            raise PreconditionError("labeling contains noise; pass exclude_noise=True to score it")
        coords = dataset.coords
    if len(labels) == 0:
        raise PreconditionError("no clustered points to score (all noise)")
    # relabel to a contiguous 0..k-1 over the retained points
    ids = np.unique(labels)
    compact = np.searchsorted(ids, labels)
    return np.ascontiguousarray(coords), compact.astype(np.int64), len(ids)


def silhouette_samples(
    dataset: Dataset, labeling: Labeling, exclude_noise: bool = True
) -> list[SilhouetteSample]:
    """Per-point silhouette values in retained-point order.

    a is the mean distance to the point's own cluster (0 for singletons, with
    s forced to 0); b is the smallest mean distance to another cluster.
    """
    coords, labels, k = _clustered_subset(dataset, labeling, exclude_noise)
    if k < 2:
        raise PreconditionError(f"silhouette needs at least 2 clusters, got {k}")
    sums = backend.cluster_distance_sums(coords, labels, k)
    sizes = np.bincount(labels, minlength=k)
    out = []
    for i, lab in enumerate(labels.tolist()):
        if sizes[lab] == 1:
            other = [sums[i, c] / sizes[c] for c in range(k) if c != lab]
            out.append(SilhouetteSample(a=0.0, b=float(min(other)), s=0.0))
            continue
        a = sums[i, lab] / (sizes[lab] - 1)
        b = min(sums[i, c] / sizes[c] for c in range(k) if c != lab)
        denom = max(a, b)
        s = 0.0 if denom == 0.0 else (b - a) / denom
        out.append(SilhouetteSample(a=float(a), b=float(b), s=float(s)))
    return out


def silhouette_score(dataset: Dataset, labeling: Labeling, exclude_noise: bool = True) -> float:
    """Mean silhouette over the retained points; bounded in [-1, 1]."""
    samples = silhouette_samples(dataset, labeling, exclude_noise)
    return float(np.mean([s.s for s in samples]))


def davies_bouldin(
    dataset: Dataset,
    labeling: Labeling,
    exclude_noise: bool = True,
    half_coefficient: bool = False,
) -> DaviesBouldinBreakdown:
    """Average over clusters of the worst within-to-between distance ratio.

    half_coefficient replaces the 1/k averaging with a 1/2 coefficient for
    compatibility with sources that print the index that way; off by default.
    """
    coords, labels, k = _clustered_subset(dataset, labeling, exclude_noise)
    if k < 2:
        raise PreconditionError(f"Davies-Bouldin needs at least 2 clusters, got {k}")
    centroids = np.empty((k, 2))
    d_bar = np.empty(k)
    for c in range(k):
        members = coords[labels == c]
        centroids[c] = members.mean(axis=0)
        d_bar[c] = float(np.sqrt(((members - centroids[c]) ** 2).sum(axis=1)).mean())
    diff = centroids[:, None, :] - centroids[None, :, :]
    centroid_dist = np.sqrt((diff**2).sum(axis=2))
    off_diag = ~np.eye(k, dtype=bool)
    if np.any(centroid_dist[off_diag] == 0.0):
        raise PreconditionError("two cluster centroids coincide; ratio undefined")
    similarity = np.zeros((k, k))
    similarity[off_diag] = (d_bar[:, None] + d_bar[None, :])[off_diag] / centroid_dist[off_diag]
    per_cluster_max = similarity.max(axis=1)
    coeff = 0.5 if half_coefficient else 1.0 / k
    score = float(coeff * per_cluster_max.sum())
    return DaviesBouldinBreakdown(centroids, d_bar, centroid_dist, similarity, per_cluster_max, score)


def calinski_harabasz(
    dataset: Dataset, labeling: Labeling, exclude_noise: bool = True
) -> DispersionStats:
    """Variance ratio criterion: (ss_b / ss_w) * (n - k) / (k - 1)."""
    coords, labels, k = _clustered_subset(dataset, labeling, exclude_noise)
    n = len(coords)
    if k < 2:
        raise PreconditionError(f"Calinski-Harabasz needs at least 2 clusters, got {k}")
    if k >= n:
        raise PreconditionError(f"Calinski-Harabasz needs k < n, got k={k}, n={n}")
    global_centroid = coords.mean(axis=0)
    tss = float(((coords - global_centroid) ** 2).sum())
    centroids = np.empty((k, 2))
    sizes = np.bincount(labels, minlength=k)
    ss_w = 0.0
    ss_b = 0.0
    for c in range(k):
        members = coords[labels == c]
        centroids[c] = members.mean(axis=0)
        ss_w += float(((members - centroids[c]) ** 2).sum())
        ss_b += sizes[c] * float(((centroids[c] - global_centroid) ** 2).sum())
    if ss_w == 0.0:
        raise PreconditionError("zero within-cluster dispersion; variance ratio undefined")
    chi = (ss_b / ss_w) * (n - k) / (k - 1)
    return DispersionStats(tss, ss_w, ss_b, n, k, float(chi), global_centroid, centroids, sizes)


@dataclass(frozen=True)
class ValidityRow:
    """One labeling's scores; status is "ok" or "not-scorable: <reason>"."""

    algorithm: str
    silhouette: float | None
    davies_bouldin: float | None
    calinski_harabasz: float | None
    n_clusters: int
    n_noise: int
    status: str


@dataclass(frozen=True)
class ValidityReport:
    """Scores for a set of labelings plus the best algorithm per index."""

    rows: tuple[ValidityRow, ...]
    best: dict[str, str | None]  # index name -> algorithm name

    def as_dict(self) -> dict:
        """JSON-ready mapping keyed by algorithm name."""
        out = {}
        for row in self.rows:
            out[row.algorithm] = {
                "silhouette": row.silhouette,
                "davies_bouldin": row.davies_bouldin,
                "calinski_harabasz": row.calinski_harabasz,
                "n_clusters": row.n_clusters,
                "n_noise": row.n_noise,
                "status": row.status,
                "best_for": sorted(idx for idx, alg in self.best.items() if alg == row.algorithm),
            }
        return out


def validity_report(
    dataset: Dataset, labelings: dict[str, Labeling], exclude_noise: bool = True
) -> ValidityReport:
    """Score every labeling with all three indices and mark the best per index.

    A labeling that violates an index precondition (one cluster, all noise,
    coincident centroids) gets a not-scorable status instead of raising.
    """
    if not labelings:
        raise PreconditionError("no labelings to score")
    rows = []
    for name, labeling in labelings.items():
        try:
            sil = silhouette_score(dataset, labeling, exclude_noise)
            db = davies_bouldin(dataset, labeling, exclude_noise).score
            chi = calinski_harabasz(dataset, labeling, exclude_noise).chi
            status = "ok"
        except PreconditionError as exc:
            sil = db = chi = None
            status = f"not-scorable: {exc}"
        rows.append(
            ValidityRow(name, sil, db, chi, labeling.n_clusters, labeling.n_noise, status)
        )
    scorable = [r for r in rows if r.status == "ok"]
    best: dict[str, str | None] = {"silhouette": None, "davies_bouldin": None, "calinski_harabasz": None}
    if scorable:
        best["silhouette"] = max(scorable, key=lambda r: r.silhouette).algorithm
        best["davies_bouldin"] = min(scorable, key=lambda r: r.davies_bouldin).algorithm
        best["calinski_harabasz"] = max(scorable, key=lambda r: r.calinski_harabasz).algorithm
    return ValidityReport(tuple(rows), best)
