"""Per-point cluster assignment, the universal output of every algorithm.

Labels are integers: -1 marks noise, non-negative ids form the contiguous set
{0, ..., n_clusters - 1}, assigned in order of first discovery.
"""

from __future__ import annotations

import numpy as np

from geoclust.errors import PreconditionError


class Labeling:
    """Immutable per-point label vector with -1 reserved for noise."""

    __slots__ = ("labels", "n_clusters")

    def __init__(self, labels):
        arr = np.ascontiguousarray(labels, dtype=np.int64)
        if arr.ndim != 1:
            raise PreconditionError("labels must be a 1-D sequence")
        positive = arr[arr >= 0]
        if positive.size:
            ids = np.unique(positive)
            n_clusters = int(ids[-1]) + 1
            if len(ids) != n_clusters:
                raise PreconditionError("non-negative labels must be contiguous from 0")
        else:
            n_clusters = 0
        if arr.size and arr.min() < -1:
            raise PreconditionError("labels below -1 are not allowed")
        arr.setflags(write=False)
        self.labels = arr
        self.n_clusters = n_clusters

    def __len__(self) -> int:
        return len(self.labels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Labeling):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash(self.labels.tobytes())

    def __repr__(self) -> str:
        return f"Labeling(n={len(self.labels)}, n_clusters={self.n_clusters}, n_noise={self.n_noise})"

    @property
    def n_noise(self) -> int:
        return int(np.count_nonzero(self.labels == -1))

    def cluster_sizes(self) -> np.ndarray:
        """Sizes of clusters 0..n_clusters-1 (noise not counted)."""
        if self.n_clusters == 0:
            return np.zeros(0, dtype=np.int64)
        return np.bincount(self.labels[self.labels >= 0], minlength=self.n_clusters).astype(np.int64)

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)
