"""Wall-clock timing of clustering algorithms across dataset-size tiers.

Each measurement times the complete fit only: dataset construction,
subsampling, and report emission stay outside the clock. One unmeasured
warmup run precedes the measured repetitions; the default aggregation is the
median, which resists scheduler noise. Measured runs execute strictly
sequentially.
"""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Callable

from geoclust.density import DensityParams, dbscan, extract_dbscan_cut, optics
from geoclust.errors import PreconditionError
from geoclust.ingest import Dataset, subsample
from geoclust.labeling import Labeling
from geoclust.partitional import (
    KMeansParams,
    MiniBatchParams,
    kmeans_fit,
    minibatch_kmeans_fit,
)

_AGGREGATIONS = {
    "median": statistics.median,
    "min": min,
    "mean": statistics.fmean,
}


@dataclass(frozen=True)
class AlgorithmSpec:
    """A named, fully parameterized fit: dataset in, labeling out."""

    name: str
    fit: Callable[[Dataset], Labeling]


@dataclass(frozen=True)
class BenchResult:
    algorithm: str
    n_points: int
    seconds: float
    repetitions: int
    aggregation: str


def make_algorithm(name: str, seed: int = 0, **params) -> AlgorithmSpec:
    """Standard algorithm specs by name: kmeans, minibatch_kmeans, dbscan, optics.

    Unknown keyword parameters are rejected by the underlying params types.
    Defaults follow the module defaults (k=10, batch_size=100, eps_km=5,
    min_samples=300).
    """
    if name == "kmeans":
        p = KMeansParams(k=params.pop("k", 10), seed=seed, **params)
        return AlgorithmSpec(name, lambda ds: kmeans_fit(ds, p)[1])
    if name == "minibatch_kmeans":
        p = MiniBatchParams(k=params.pop("k", 10), seed=seed, **params)
        return AlgorithmSpec(name, lambda ds: minibatch_kmeans_fit(ds, p)[1])
    if name == "dbscan":
        p = DensityParams(**{"eps_km": 5.0, "min_samples": 300, **params})
        return AlgorithmSpec(name, lambda ds: dbscan(ds, p))
    if name == "optics":
        p = DensityParams(**{"eps_km": 5.0, "min_samples": 300, **params})

        def fit(ds: Dataset) -> Labeling:
            # the labeling is the eps cut of the reachability ordering
            return extract_dbscan_cut(optics(ds, p), p.eps_km, p.min_samples)

        return AlgorithmSpec(name, fit)
    raise PreconditionError(f"unknown algorithm {name!r}")


def time_algorithm(
    algorithm: AlgorithmSpec,
    dataset: Dataset,
    repetitions: int = 3,
    aggregation: str = "median",
) -> BenchResult:
    """Warm up once, run `repetitions` measured fits, aggregate the durations."""
    if repetitions < 1:
        raise PreconditionError(f"repetitions must be >= 1, got {repetitions}")
    if aggregation not in _AGGREGATIONS:
        raise PreconditionError(f"unknown aggregation {aggregation!r}")
    algorithm.fit(dataset)  # warmup, unmeasured
    durations = []
    for _ in range(repetitions):
        start = time.perf_counter()
        algorithm.fit(dataset)
        durations.append(time.perf_counter() - start)
    seconds = float(_AGGREGATIONS[aggregation](durations))
    return BenchResult(algorithm.name, dataset.n, seconds, repetitions, aggregation)


def scaling_suite(
    dataset: Dataset,
    sizes: list[int],
    algorithms: list[AlgorithmSpec],
    seed: int = 0,
    repetitions: int = 3,
    aggregation: str = "median",
) -> list[list[BenchResult]]:
    """Time every algorithm on one identical seeded subsample per size tier.

    Returns a row per size in input order, each row holding one BenchResult
    per algorithm in input order.
    """
    for size in sizes:
        if size > dataset.n:
            raise PreconditionError(f"suite size {size} exceeds dataset size {dataset.n}")
    table = []
    for size in sizes:
        tier = subsample(dataset, size, seed)
        table.append([
            time_algorithm(alg, tier, repetitions, aggregation) for alg in algorithms
        ])
    return table


def write_bench_csv(table: list[list[BenchResult]], path) -> None:
    """Size-by-algorithm timing table, seconds with 3 decimal places."""
    with open(path, "w", encoding="utf-8") as fh:
        names = [r.algorithm for r in table[0]] if table else []
        fh.write("n_points," + ",".join(names) + "\n")
        for row in table:
            cells = ",".join(f"{r.seconds:.3f}" for r in row)
            fh.write(f"{row[0].n_points},{cells}\n")
