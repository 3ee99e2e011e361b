import numpy as np
import pytest

from geoclust.errors import PreconditionError
from geoclust.ingest import Dataset
from geoclust.labeling import Labeling
from geoclust.validity import (
    calinski_harabasz,
    davies_bouldin,
    silhouette_samples,
    silhouette_score,
    validity_report,
)

from oracles import (
    brute_calinski_harabasz,
    brute_davies_bouldin,
    brute_silhouette,
    brute_silhouette_samples,
    random_dataset,
    random_labeling,
)


class TestSilhouette:
    def test_line_fixture_samples(self, line_fixture):
        ds, lab = line_fixture
        samples = silhouette_samples(ds, lab)
        assert samples[0].a == pytest.approx(1.0, abs=1e-12)
        assert samples[0].b == pytest.approx(10.5, abs=1e-12)
        expected = [0.904762, 0.894737, 0.894737, 0.904762]
        for sample, want in zip(samples, expected):
            assert sample.s == pytest.approx(want, abs=1e-6)

    def test_line_fixture_mean(self, line_fixture):
        ds, lab = line_fixture
        assert silhouette_score(ds, lab) == pytest.approx(0.899749, abs=1e-6)

    def test_bounded(self, line_fixture):
        ds, lab = line_fixture
        for sample in silhouette_samples(ds, lab):
            assert -1.0 <= sample.s <= 1.0

    def test_coincident_clusters_all_zero(self):
        # every point at one location, split into two labels: a = b = 0
        ds = Dataset(np.tile([35.0, -80.0], (6, 1)))
        lab = Labeling([0, 0, 0, 1, 1, 1])
        for sample in silhouette_samples(ds, lab):
            assert sample.s == 0.0

    def test_singleton_cluster_zero(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0], [0.0, 10.0]])
        lab = Labeling([0, 0, 1])
        samples = silhouette_samples(ds, lab)
        assert samples[2].s == 0.0

    def test_noise_excluded_by_default(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0], [0.0, 10.0], [0.0, 11.0], [0.0, 50.0]])
        lab = Labeling([0, 0, 1, 1, -1])
        with_noise = silhouette_score(ds, lab)
        clean = silhouette_score(
            Dataset(ds.coords[:4]), Labeling([0, 0, 1, 1])
        )
        assert with_noise == pytest.approx(clean, abs=1e-12)

    def test_noise_with_exclusion_disabled_errors(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0], [0.0, 10.0]])
        lab = Labeling([0, 1, -1])
        with pytest.raises(PreconditionError):
            silhouette_score(ds, lab, exclude_noise=False)

    def test_single_cluster_errors(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            silhouette_score(ds, Labeling([0, 0]))

    def test_all_noise_errors(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            silhouette_score(ds, Labeling([-1, -1]))

    def test_label_permutation_invariant(self, line_fixture):
        ds, lab = line_fixture
        swapped = Labeling(1 - lab.labels)
        assert silhouette_score(ds, lab) == silhouette_score(ds, swapped)

    def test_matches_brute_force(self):
        rng = np.random.default_rng(29)
        for _ in range(10):
            n = int(rng.integers(10, 80))
            k = int(rng.integers(2, 5))
            coords = random_dataset(rng, n)
            labels = random_labeling(rng, n, k)
            ds, lab = Dataset(coords), Labeling(labels)
            got = np.array([x.s for x in silhouette_samples(ds, lab)])
            np.testing.assert_allclose(got, brute_silhouette_samples(coords, labels), rtol=1e-9)
            assert silhouette_score(ds, lab) == pytest.approx(brute_silhouette(coords, labels), rel=1e-9)


class TestDaviesBouldin:
    def test_line_fixture_breakdown(self, line_fixture):
        ds, lab = line_fixture
        bd = davies_bouldin(ds, lab)
        np.testing.assert_allclose(bd.d_bar, [0.5, 0.5], atol=1e-12)
        assert bd.centroid_dist[0, 1] == pytest.approx(10.0, abs=1e-12)
        assert bd.similarity[0, 1] == pytest.approx(0.1, abs=1e-12)
        assert bd.score == pytest.approx(0.1, abs=1e-12)

    def test_half_coefficient_variant(self, line_fixture):
        ds, lab = line_fixture
        # with k=2 the 1/2 compatibility coefficient coincides with the mean
        assert davies_bouldin(ds, lab, half_coefficient=True).score == pytest.approx(0.1, abs=1e-12)
        ds3 = Dataset([[0.0, 0.0], [0.0, 1.0], [0.0, 10.0], [0.0, 11.0], [0.0, 30.0], [0.0, 31.0]])
        lab3 = Labeling([0, 0, 1, 1, 2, 2])
        mean_version = davies_bouldin(ds3, lab3).score
        half_version = davies_bouldin(ds3, lab3, half_coefficient=True).score
        assert half_version == pytest.approx(mean_version * 3 / 2, rel=1e-12)

    def test_tight_far_clusters_near_zero(self):
        ds = Dataset([[0.0, 0.0], [0.0, 0.001], [0.0, 150.0], [0.0, 150.001]])
        assert davies_bouldin(ds, Labeling([0, 0, 1, 1])).score < 1e-4

    def test_coincident_centroids_error(self):
        # both clusters sit centered on (0, 1)
        ds = Dataset([[0.0, 0.0], [0.0, 2.0], [0.0, 1.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            davies_bouldin(ds, Labeling([0, 0, 1, 1]))

    def test_single_cluster_errors(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            davies_bouldin(ds, Labeling([0, 0]))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(53)
        for _ in range(10):
            n = int(rng.integers(10, 80))
            k = int(rng.integers(2, 5))
            coords = random_dataset(rng, n)
            labels = random_labeling(rng, n, k)
            got = davies_bouldin(Dataset(coords), Labeling(labels)).score
            assert got == pytest.approx(brute_davies_bouldin(coords, labels), rel=1e-9)


class TestCalinskiHarabasz:
    def test_line_fixture_values(self, line_fixture):
        ds, lab = line_fixture
        stats = calinski_harabasz(ds, lab)
        assert stats.tss == pytest.approx(101.0, abs=1e-9)
        assert stats.ss_w == pytest.approx(1.0, abs=1e-9)
        assert stats.ss_b == pytest.approx(100.0, abs=1e-9)
        assert stats.chi == pytest.approx(200.0, abs=1e-9)
        assert stats.n == 4 and stats.k == 2

    def test_dispersion_identity(self):
        rng = np.random.default_rng(59)
        for _ in range(10):
            n = int(rng.integers(10, 60))
            k = int(rng.integers(2, 5))
            coords = random_dataset(rng, n)
            stats = calinski_harabasz(Dataset(coords), Labeling(random_labeling(rng, n, k)))
            assert stats.ss_b + stats.ss_w == pytest.approx(stats.tss, rel=1e-9)

    def test_k_one_errors(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            calinski_harabasz(ds, Labeling([0, 0]))

    def test_k_equals_n_errors(self):
        ds = Dataset([[0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            calinski_harabasz(ds, Labeling([0, 1]))

    def test_zero_within_dispersion_errors(self):
        ds = Dataset([[0.0, 0.0], [0.0, 0.0], [0.0, 1.0]])
        with pytest.raises(PreconditionError):
            calinski_harabasz(ds, Labeling([0, 0, 1]))

    def test_matches_brute_force(self):
        rng = np.random.default_rng(61)
        for _ in range(10):
            n = int(rng.integers(10, 80))
            k = int(rng.integers(2, 5))
            coords = random_dataset(rng, n)
            labels = random_labeling(rng, n, k)
            got = calinski_harabasz(Dataset(coords), Labeling(labels)).chi
            assert got == pytest.approx(brute_calinski_harabasz(coords, labels), rel=1e-9)


class TestValidityReport:
    def test_single_row(self, line_fixture):
        ds, lab = line_fixture
        report = validity_report(ds, {"kmeans": lab})
        assert len(report.rows) == 1
        row = report.rows[0]
        assert row.algorithm == "kmeans" and row.status == "ok"
        assert row.silhouette == pytest.approx(0.899749, abs=1e-6)

    def test_correct_beats_shuffled(self, two_blobs):
        ds, truth = two_blobs
        rng = np.random.default_rng(0)
        shuffled = truth.labels[rng.permutation(len(truth))]
        shuffled = Labeling(shuffled)
        report = validity_report(ds, {"correct": truth, "shuffled": shuffled})
        assert report.best["silhouette"] == "correct"
        assert report.best["davies_bouldin"] == "correct"
        assert report.best["calinski_harabasz"] == "correct"

    def test_not_scorable_row_survives(self, two_blobs):
        ds, truth = two_blobs
        single = Labeling(np.zeros(ds.n, dtype=np.int64))
        report = validity_report(ds, {"good": truth, "single": single})
        by_name = {row.algorithm: row for row in report.rows}
        assert by_name["single"].status.startswith("not-scorable")
        assert by_name["single"].silhouette is None
        assert by_name["good"].status == "ok"

    def test_empty_input_errors(self, two_blobs):
        ds, _ = two_blobs
        with pytest.raises(PreconditionError):
            validity_report(ds, {})

    def test_as_dict_shape(self, two_blobs):
        ds, truth = two_blobs
        payload = validity_report(ds, {"a": truth}).as_dict()
        row = payload["a"]
        for key in ("silhouette", "davies_bouldin", "calinski_harabasz", "n_clusters", "n_noise", "status", "best_for"):
            assert key in row
        assert sorted(row["best_for"]) == ["calinski_harabasz", "davies_bouldin", "silhouette"]
