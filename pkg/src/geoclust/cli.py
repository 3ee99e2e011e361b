"""Command-line pipeline: ingest -> cluster -> evaluate -> report.

Subcommands: cluster, evaluate, select-k, bench, export. Every flag has a
documented default, can be supplied through a flat key/value config file
(flags override the file), and every command is deterministic for a fixed
seed. Exit codes: 0 success, 2 bad arguments or config, 3 data error,
4 algorithm precondition failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from geoclust.bench import make_algorithm, scaling_suite, write_bench_csv
from geoclust.density import DensityParams, dbscan, extract_dbscan_cut, optics, write_reachability_csv
from geoclust.errors import DataError, PreconditionError
from geoclust.ingest import Dataset, load_csv
from geoclust.labeling import Labeling
from geoclust.partitional import (
    KMeansParams,
    MiniBatchParams,
    kmeans_fit,
    minibatch_kmeans_fit,
    select_k_elbow,
    select_k_silhouette,
)
from geoclust.validity import validity_report

ALGORITHM_NAMES = ("kmeans", "minibatch_kmeans", "optics", "dbscan")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_PRECONDITION = 4


class ConfigError(Exception):
    """Bad config file or unusable flag combination."""


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline run needs; defaults follow the module defaults.

    Round-trips losslessly through the flat key/value file format written by
    to_file().
    """

    input: str = ""
    lat_col: str = "Latitude"
    lon_col: str = "Longitude"
    seed: int = 0
    out_dir: str = "."
    dedupe: bool = False
    exclude_noise: bool = True
    algorithms: tuple[str, ...] = ALGORITHM_NAMES
    formats: tuple[str, ...] = ("geojson", "summary", "labels")
    k: int = 10
    mb_k: int = 10
    batch_size: int = 100
    n_iter: int = 100
    eps_km: float = 5.0
    min_samples: int = 300
    max_eps_km: float = math.inf

    def to_file(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for f in fields(self):
                value = getattr(self, f.name)
                if isinstance(value, tuple):
                    value = ",".join(value)
                elif isinstance(value, bool):
                    value = "true" if value else "false"
                fh.write(f"{f.name} = {value}\n")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls(**_parse_config_file(path, cls))


def _parse_config_file(path, cls=RunConfig) -> dict:
    spec = {f.name: f.type for f in fields(cls)}
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in spec:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key: str, value: str):
    default = getattr(RunConfig(), key)
    if isinstance(default, bool):
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise ConfigError(f"key {key!r}: expected a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: {exc}") from exc
    if isinstance(default, tuple):
        return tuple(v.strip() for v in value.split(",") if v.strip())
    return value


@dataclass(frozen=True)
class ClusterSummary:
    """Cluster sizes for one labeling, largest first, ties by ascending label."""

    algorithm: str
    rows: tuple[tuple[int, int], ...]  # (size, label)
    n_noise: int

    @classmethod
    def from_labeling(cls, algorithm: str, labeling: Labeling) -> "ClusterSummary":
        sizes = labeling.cluster_sizes()
        rows = sorted(
            ((int(sizes[label]), label) for label in range(labeling.n_clusters)),
            key=lambda row: (-row[0], row[1]),
        )
        return cls(algorithm, tuple(rows), labeling.n_noise)

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("size,label\n")
            for size, label in self.rows:
                fh.write(f"{size},{label}\n")


def export_geojson(dataset: Dataset, labeling: Labeling, path) -> None:
    """Write a GeoJSON FeatureCollection of labeled points.

    Coordinates are [longitude, latitude] per the GeoJSON convention; each
    feature carries integer property `cluster` (-1 for noise) and boolean
    `noise`.
    """
    if len(labeling) != dataset.n:
        raise DataError(
            f"labeling length {len(labeling)} does not match dataset size {dataset.n}"
        )
    features = []
    for (lat, lon), label in zip(dataset.coords.tolist(), labeling.labels.tolist()):
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [lon, lat]},
                "properties": {"cluster": label, "noise": label == -1},
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh, indent=2)
        fh.write("\n")


def write_labels(labeling: Labeling, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for label in labeling.labels.tolist():
            fh.write(f"{label}\n")


def read_labels(path) -> Labeling:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such labels file: {path}")
    try:
        values = [int(line) for line in path.read_text(encoding="utf-8").split()]
    except ValueError as exc:
        raise DataError(f"{path}: labels must be integers: {exc}") from exc
    return Labeling(np.asarray(values, dtype=np.int64))


def _load_dataset(config: RunConfig) -> Dataset:
    if not config.input:
        raise ConfigError("no input file given (use --input or the config file)")
    dataset, report = load_csv(config.input, config.lat_col, config.lon_col, config.dedupe)
    print(
        f"loaded {dataset.n} points from {config.input} "
        f"({report.rows_dropped_invalid} invalid, {report.rows_dropped_duplicate} duplicate rows dropped)",
        file=sys.stderr,
    )
    if dataset.n == 0:
        raise DataError(f"{config.input}: no valid coordinate rows")
    return dataset


def _fit_one(name: str, config: RunConfig, dataset: Dataset):
    """Fit one algorithm; returns (labeling, optics ordering or None)."""
    if name == "kmeans":
        return kmeans_fit(dataset, KMeansParams(k=config.k, seed=config.seed))[1], None
    if name == "minibatch_kmeans":
        params = MiniBatchParams(
            k=config.mb_k, batch_size=config.batch_size, n_iter=config.n_iter, seed=config.seed
        )
        return minibatch_kmeans_fit(dataset, params)[1], None
    if name == "dbscan":
        return dbscan(dataset, _density_params(config)), None
    if name == "optics":
        ordering = optics(dataset, _density_params(config))
        return extract_dbscan_cut(ordering, config.eps_km, config.min_samples), ordering
    raise ConfigError(f"unknown algorithm {name!r} (choose from {', '.join(ALGORITHM_NAMES)})")


def _density_params(config: RunConfig) -> DensityParams:
    return DensityParams(config.eps_km, config.min_samples, config.max_eps_km)


def cmd_cluster(config: RunConfig) -> int:
    """Fit the selected algorithms and write GeoJSON, summary, and labels files."""
    for name in config.algorithms:
        if name not in ALGORITHM_NAMES:
            raise ConfigError(f"unknown algorithm {name!r} (choose from {', '.join(ALGORITHM_NAMES)})")
    dataset = _load_dataset(config)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    try:
        for name in config.algorithms:
            labeling, ordering = _fit_one(name, config, dataset)
            if "geojson" in config.formats:
                path = out_dir / f"{name}.geojson"
                export_geojson(dataset, labeling, path)
                written.append(path)
            if "summary" in config.formats:
                path = out_dir / f"{name}_summary.csv"
                ClusterSummary.from_labeling(name, labeling).write_csv(path)
                written.append(path)
            if "labels" in config.formats:
                path = out_dir / f"{name}.labels"
                write_labels(labeling, path)
                written.append(path)
            if ordering is not None:
                path = out_dir / f"{name}_reachability.csv"
                write_reachability_csv(ordering, path)
                written.append(path)
            print(
                f"{name}: {labeling.n_clusters} clusters, {labeling.n_noise} noise points",
                file=sys.stderr,
            )
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
    return EXIT_OK


def cmd_evaluate(config: RunConfig, labels_paths: list[str]) -> int:
    """Score labeling files against the dataset and write the validity report."""
    if not labels_paths:
        raise ConfigError("evaluate needs at least one labels file")
    dataset = _load_dataset(config)
    labelings: dict[str, Labeling] = {}
    for p in labels_paths:
        labeling = read_labels(p)
        if len(labeling) != dataset.n:
            raise DataError(
                f"{p}: {len(labeling)} labels for {dataset.n} points"
            )
        labelings[Path(p).stem] = labeling
    report = validity_report(dataset, labelings, config.exclude_noise)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "validity_report.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.as_dict(), fh, indent=2)
        fh.write("\n")
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def cmd_select_k(config: RunConfig, k_min: int, k_max: int, method: str) -> int:
    """Run elbow or silhouette k selection; print the chosen k."""
    if method not in ("elbow", "silhouette"):
        raise ConfigError(f"unknown method {method!r} (choose elbow or silhouette)")
    dataset = _load_dataset(config)
    if method == "elbow":
        chosen, curve = select_k_elbow(dataset, k_min, k_max, config.seed)
    else:
        chosen, curve = select_k_silhouette(dataset, k_min, k_max, config.seed)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"select_k_{method}.csv"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("k,score\n")
        for k, score in curve:
            fh.write(f"{k},{score!r}\n")
    print(chosen)
    return EXIT_OK


def cmd_bench(config: RunConfig, sizes: list[int], repetitions: int) -> int:
    """Time the selected algorithms per size tier and write the timing CSV."""
    for name in config.algorithms:
        if name not in ALGORITHM_NAMES:
            raise ConfigError(f"unknown algorithm {name!r} (choose from {', '.join(ALGORITHM_NAMES)})")
    if not sizes:
        raise ConfigError("bench needs at least one size")
    dataset = _load_dataset(config)
    algorithms = [_bench_spec(name, config) for name in config.algorithms]
    table = scaling_suite(dataset, sizes, algorithms, config.seed, repetitions)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "bench.csv"
    write_bench_csv(table, path)
    print(f"wrote {path}", file=sys.stderr)
    return EXIT_OK


def _bench_spec(name: str, config: RunConfig):
    if name == "kmeans":
        return make_algorithm(name, seed=config.seed, k=config.k)
    if name == "minibatch_kmeans":
        return make_algorithm(
            name, seed=config.seed, k=config.mb_k, batch_size=config.batch_size, n_iter=config.n_iter
        )
    return make_algorithm(
        name, eps_km=config.eps_km, min_samples=config.min_samples, max_eps_km=config.max_eps_km
    )


def cmd_export(config: RunConfig, labels_path: str, output: str) -> int:
    """Re-export a dataset plus saved labels as GeoJSON."""
    dataset = _load_dataset(config)
    labeling = read_labels(labels_path)
    if len(labeling) != dataset.n:
        raise DataError(f"{labels_path}: {len(labeling)} labels for {dataset.n} points")
    out = Path(output)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    export_geojson(dataset, labeling, out)
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="flat key = value config file; flags override it")
    parser.add_argument("--input", help="input CSV with a header row (default: from config)")
    parser.add_argument("--lat-col", help="latitude column name (default Latitude)")
    parser.add_argument("--lon-col", help="longitude column name (default Longitude)")
    parser.add_argument("--seed", type=int, help="random seed (default 0)")
    parser.add_argument("--out-dir", help="output directory (default .)")
    parser.add_argument(
        "--dedupe",
        action="store_true",
        default=None,
        help="drop exact duplicate coordinates",
    )


def _add_algorithm_params(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--algorithms", help="comma list from: " + ",".join(ALGORITHM_NAMES))
    parser.add_argument("--k", type=int, help="k-means cluster count (default 10)")
    parser.add_argument("--mb-k", type=int, help="mini-batch k-means cluster count (default 10)")
    parser.add_argument("--batch-size", type=int, help="mini-batch size (default 100)")
    parser.add_argument("--n-iter", type=int, help="mini-batch iterations (default 100)")
    parser.add_argument("--eps-km", type=float, help="DBSCAN/OPTICS-cut eps in km (default 5)")
    parser.add_argument("--min-samples", type=int, help="density min samples, self-inclusive (default 300)")
    parser.add_argument("--max-eps-km", type=float, help="OPTICS scan ceiling in km (default inf)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geoclust",
        description="Cluster latitude/longitude points and score the results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="fit algorithms, write GeoJSON/summary/labels per algorithm")
    _add_common(p)
    _add_algorithm_params(p)
    p.add_argument("--formats", help="comma list from geojson,summary,labels (default all)")

    p = sub.add_parser("evaluate", help="score labelings with the three validity indices")
    _add_common(p)
    p.add_argument("labels", nargs="*", help="labels files (one integer per line)")
    p.add_argument(
        "--include-noise",
        action="store_true",
        help="score noise points as-is instead of excluding label -1",
    )

    p = sub.add_parser("select-k", help="choose k by the elbow or silhouette method")
    _add_common(p)
    p.add_argument("--k-min", type=int, default=2, help="smallest k (default 2)")
    p.add_argument("--k-max", type=int, default=10, help="largest k (default 10)")
    p.add_argument("--method", default="elbow", help="elbow or silhouette (default elbow)")

    p = sub.add_parser("bench", help="time algorithms across dataset-size tiers")
    _add_common(p)
    _add_algorithm_params(p)
    p.add_argument("--sizes", default="10000,21854,33707", help="comma list of tier sizes")
    p.add_argument("--repetitions", type=int, default=3, help="measured runs per cell (default 3)")

    p = sub.add_parser("export", help="export a dataset plus saved labels as GeoJSON")
    _add_common(p)
    p.add_argument("--labels", required=True, help="labels file to join with the input")
    p.add_argument("--output", default="export.geojson", help="output GeoJSON path")

    return parser


def _build_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if args.config else RunConfig()
    overrides = {}
    for f in fields(RunConfig):
        value = getattr(args, f.name, None)
        if value is None:
            continue
        if isinstance(value, str) and isinstance(getattr(config, f.name), tuple):
            value = tuple(v.strip() for v in value.split(",") if v.strip())
        overrides[f.name] = value
    if getattr(args, "include_noise", False):
        overrides["exclude_noise"] = False
    return replace(config, **overrides)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _build_config(args)
        if args.command == "cluster":
            return cmd_cluster(config)
        if args.command == "evaluate":
            return cmd_evaluate(config, args.labels)
        if args.command == "select-k":
            return cmd_select_k(config, args.k_min, args.k_max, args.method)
        if args.command == "bench":
            try:
                sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
            except ValueError as exc:
                raise ConfigError(f"--sizes: {exc}") from exc
            return cmd_bench(config, sizes, args.repetitions)
        if args.command == "export":
            return cmd_export(config, args.labels, args.output)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"geoclust: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"geoclust: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PreconditionError as exc:
        print(f"geoclust: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
