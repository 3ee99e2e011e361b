import itertools

import numpy as np
import pytest

from geoclust.errors import PreconditionError
from geoclust.geo import GeoPoint
from geoclust.ingest import Dataset, synth_blobs
from geoclust.partitional import (
    KMeansParams,
    MiniBatchParams,
    kmeans_fit,
    minibatch_kmeans_fit,
    select_k_elbow,
    select_k_silhouette,
)

from conftest import five_blob_centers


def agreement_up_to_permutation(a, b, k):
    """Best label-matching agreement rate between two labelings."""
    best = 0
    for perm in itertools.permutations(range(k)):
        mapped = np.array([perm[v] for v in a])
        best = max(best, int((mapped == b).sum()))
    return best / len(a)


class TestParams:
    @pytest.mark.parametrize("kwargs", [{"k": 0}, {"k": 2, "max_iter": 0}, {"k": 2, "tol_km": -1.0}])
    def test_kmeans_validation(self, kwargs):
        with pytest.raises(PreconditionError):
            KMeansParams(**kwargs)

    def test_kmeans_init_names(self):
        KMeansParams(k=2, init="random-from-data")
        KMeansParams(k=2, init="kmeanspp")
        with pytest.raises(PreconditionError):
            KMeansParams(k=2, init="plusplus")

    @pytest.mark.parametrize("kwargs", [{"k": 0}, {"k": 2, "batch_size": 0}, {"k": 2, "n_iter": 0}])
    def test_minibatch_validation(self, kwargs):
        with pytest.raises(PreconditionError):
            MiniBatchParams(**kwargs)


class TestKMeansFit:
    def test_saturated_k(self):
        coords = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        model, labeling = kmeans_fit(Dataset(coords), KMeansParams(k=4, seed=0))
        assert model.inertia == pytest.approx(0.0, abs=1e-12)
        assert sorted(labeling.labels) == [0, 1, 2, 3]

    def test_k_equals_one_closed_form(self):
        coords = np.array([[0.0, 0.0], [0.0, 2.0], [2.0, 0.0], [2.0, 2.0]])
        model, labeling = kmeans_fit(Dataset(coords), KMeansParams(k=1, seed=0))
        np.testing.assert_allclose(model.centers[0], [1.0, 1.0])
        assert model.inertia == pytest.approx(8.0)
        assert labeling.n_clusters == 1

    def test_blob_recovery(self):
        centers = [GeoPoint(35.0, -80.0), GeoPoint(35.0, -74.5)]
        ds, truth = synth_blobs(100, centers, 5.0, seed=2)
        _, labeling = kmeans_fit(ds, KMeansParams(k=2, seed=0))
        assert agreement_up_to_permutation(labeling.labels, truth.labels, 2) == 1.0

    def test_monotone_inertia_trace(self):
        ds, _ = synth_blobs(60, five_blob_centers(), 10.0, seed=3)
        model, _ = kmeans_fit(ds, KMeansParams(k=5, seed=1))
        trace = model.inertia_trace
        assert len(trace) >= 2
        for earlier, later in zip(trace, trace[1:]):
            assert later <= earlier + 1e-9

    def test_labels_cover_range(self):
        ds, _ = synth_blobs(40, five_blob_centers(), 15.0, seed=4)
        model, labeling = kmeans_fit(ds, KMeansParams(k=5, seed=2))
        assert set(labeling.labels) <= set(range(5))
        assert labeling.n_noise == 0
        assert len(model.centers) == 5

    def test_preconditions(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            kmeans_fit(ds, KMeansParams(k=3))
        dup = Dataset(np.tile([1.0, 1.0], (5, 1)))
        with pytest.raises(PreconditionError):
            kmeans_fit(dup, KMeansParams(k=2))

    def test_deterministic_per_seed(self, two_blobs):
        ds, _ = two_blobs
        a = kmeans_fit(ds, KMeansParams(k=3, seed=8))
        b = kmeans_fit(ds, KMeansParams(k=3, seed=8))
        np.testing.assert_array_equal(a[1].labels, b[1].labels)
        np.testing.assert_array_equal(a[0].centers, b[0].centers)

    def test_tie_goes_to_lowest_center_index(self):
        # a point equidistant from both centers after a symmetric fit
        coords = np.array([[0.0, 0.0], [0.0, 2.0], [0.0, 1.0]])
        _, labeling = kmeans_fit(Dataset(coords), KMeansParams(k=2, seed=0, max_iter=1, tol_km=0.0))
        # whatever the centers ended up as, rerunning assignment must be stable
        a = kmeans_fit(Dataset(coords), KMeansParams(k=2, seed=0, max_iter=1, tol_km=0.0))[1]
        np.testing.assert_array_equal(labeling.labels, a.labels)

    def test_kmeanspp_permutation_inertia_stable(self, two_blobs):
        ds, _ = two_blobs
        rng = np.random.default_rng(0)
        perm = rng.permutation(ds.n)
        params = KMeansParams(k=2, seed=5, init="kmeanspp")
        a, _ = kmeans_fit(ds, params)
        b, _ = kmeans_fit(Dataset(ds.coords[perm], source=ds.source), params)
        assert a.inertia == pytest.approx(b.inertia, rel=1e-9)

    def test_empty_cluster_repair(self):
        # three far groups, two initial centers inside one group: without
        # repair one center can end up unused; k=3 must keep all clusters
        rng = np.random.default_rng(12)
        groups = [
            np.column_stack([rng.uniform(0, 0.01, 30), rng.uniform(0, 0.01, 30)]),
            np.column_stack([rng.uniform(5, 5.01, 30), rng.uniform(5, 5.01, 30)]),
            np.column_stack([rng.uniform(10, 10.01, 3), rng.uniform(10, 10.01, 3)]),
        ]
        ds = Dataset(np.concatenate(groups))
        for seed in range(10):
            model, labeling = kmeans_fit(ds, KMeansParams(k=3, seed=seed))
            assert labeling.n_clusters == 3
            assert np.all(np.isfinite(model.centers))


class TestMiniBatch:
    def test_full_batch_close_to_lloyd(self, two_blobs):
        ds, _ = two_blobs
        km, _ = kmeans_fit(ds, KMeansParams(k=2, seed=0))
        mb, _ = minibatch_kmeans_fit(ds, MiniBatchParams(k=2, batch_size=ds.n, n_iter=200, seed=0))
        assert mb.inertia <= km.inertia * 1.05

    def test_k_one_approaches_global_mean(self, two_blobs):
        ds, _ = two_blobs
        exact = ((ds.coords - ds.coords.mean(axis=0)) ** 2).sum()
        mb, _ = minibatch_kmeans_fit(ds, MiniBatchParams(k=1, batch_size=50, n_iter=300, seed=1))
        assert mb.inertia <= exact * 1.01

    def test_determinism(self, two_blobs):
        ds, _ = two_blobs
        params = MiniBatchParams(k=3, batch_size=40, n_iter=50, seed=6)
        a = minibatch_kmeans_fit(ds, params)
        b = minibatch_kmeans_fit(ds, params)
        np.testing.assert_array_equal(a[1].labels, b[1].labels)

    def test_converged_reported_false(self, two_blobs):
        ds, _ = two_blobs
        model, _ = minibatch_kmeans_fit(ds, MiniBatchParams(k=2, batch_size=20, n_iter=10, seed=0))
        assert model.converged is False

    def test_batch_size_larger_than_n(self):
        ds = Dataset([[0.0, 0.0], [1.0, 1.0]])
        with pytest.raises(PreconditionError):
            minibatch_kmeans_fit(ds, MiniBatchParams(k=1, batch_size=3, n_iter=1))


class TestSelectK:
    def test_elbow_on_five_blobs(self):
        ds, _ = synth_blobs(60, five_blob_centers(), 8.0, seed=0)
        chosen, curve = select_k_elbow(ds, 2, 10, seed=0)
        assert chosen == 5
        assert len(curve) == 9
        ks = [k for k, _ in curve]
        assert ks == list(range(2, 11))
        assert all(v >= 0 for _, v in curve)

    def test_silhouette_on_five_blobs(self):
        ds, _ = synth_blobs(60, five_blob_centers(), 8.0, seed=0)
        chosen, curve = select_k_silhouette(ds, 2, 10, seed=0)
        assert chosen == 5
        assert len(curve) == 9

    def test_silhouette_on_two_blobs(self, two_blobs):
        ds, _ = two_blobs
        chosen, _ = select_k_silhouette(ds, 2, 4, seed=0)
        assert chosen == 2

    def test_invalid_ranges(self, two_blobs):
        ds, _ = two_blobs
        with pytest.raises(PreconditionError):
            select_k_elbow(ds, 5, 5, seed=0)
        with pytest.raises(PreconditionError):
            select_k_elbow(ds, 0, 3, seed=0)
        with pytest.raises(PreconditionError):
            select_k_silhouette(ds, 1, 3, seed=0)

    def test_degenerate_duplicate_points(self):
        ds = Dataset(np.tile([1.0, 1.0], (10, 1)))
        with pytest.raises(PreconditionError):
            select_k_silhouette(ds, 2, 3, seed=0)

    def test_deterministic(self, two_blobs):
        ds, _ = two_blobs
        assert select_k_elbow(ds, 2, 6, seed=3) == select_k_elbow(ds, 2, 6, seed=3)
