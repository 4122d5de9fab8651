import numpy as np
import pytest

from convgen.data import DataError, Dataset
from convgen.neighborhood import knn_minority, majority_neighborhoods, proximal_majority


def all_minority(points):
    points = np.asarray(points, dtype=float)
    # one throwaway majority point far away keeps the Dataset two-class
    far = np.full((1, points.shape[1]), 1e6)
    feats = np.vstack([points, far])
    labels = np.array([1] * len(points) + [0])
    return Dataset(feats, labels, "min-only")


def brute_force_knn(points, k):
    """Independent quadratic oracle: full sort of (distance, index) pairs."""
    out = []
    for i, p in enumerate(points):
        ranked = sorted(
            range(len(points)),
            key=lambda j: (0.0 if j == i else float(np.sum((points[j] - p) ** 2)), j),
        )
        out.append(ranked[:k])
    return np.array(out)


class TestKnnMinority:
    def test_collinear_points(self):
        ds = all_minority([[0.0], [1.0], [10.0]])
        index = knn_minority(ds, 2)
        assert list(index.neighbors[0]) == [0, 1]

    def test_neighborhood_of_whole_minority(self):
        rng = np.random.default_rng(2)
        ds = all_minority(rng.normal(size=(8, 3)))
        index = knn_minority(ds, 8)
        for row in index.neighbors:
            assert sorted(row) == list(range(8))

    def test_matches_quadratic_oracle(self):
        rng = np.random.default_rng(3)
        points = rng.normal(size=(50, 4))
        ds = all_minority(points)
        index = knn_minority(ds, 5)
        assert np.array_equal(index.neighbors, brute_force_knn(points, 5))

    def test_self_is_first(self):
        rng = np.random.default_rng(4)
        points = rng.normal(size=(20, 2))
        points[7] = points[3]  # duplicate row must not displace self
        ds = all_minority(points)
        index = knn_minority(ds, 4)
        for i in range(20):
            assert index.neighbors[i][0] == i

    def test_neb_below_two_rejected(self):
        ds = all_minority([[0.0], [1.0], [2.0]])
        with pytest.raises(DataError, match="neb"):
            knn_minority(ds, 1)

    def test_neb_clamped_to_minority_size(self):
        ds = all_minority([[0.0], [1.0], [2.0]])
        assert knn_minority(ds, 10).neighbors.shape == (3, 3)


class TestProximalMajority:
    def test_single_minority_point(self):
        feats = np.vstack([[[0.0, 0.0]], np.arange(1, 11)[:, None] * [[1.0, 0.0]]])
        labels = np.array([1] + [0] * 10)
        ds = Dataset(feats, labels, "p")
        prox = proximal_majority(ds, 3)
        assert sorted(prox) == [1, 2, 3]

    def test_saturates_to_whole_majority(self, toy_dataset):
        prox = proximal_majority(toy_dataset, toy_dataset.majority_count + 5)
        assert sorted(prox) == sorted(toy_dataset.majority_indices)

    def test_matches_brute_force_union(self, toy_dataset):
        ds = toy_dataset
        neb = 4
        expected = set()
        for i in ds.minority_indices:
            ranked = sorted(
                ds.majority_indices,
                key=lambda j: (float(np.sum((ds.features[j] - ds.features[i]) ** 2)), j),
            )
            expected.update(ranked[:neb])
        assert set(proximal_majority(ds, neb)) == expected

    def test_monotone_in_neb(self, toy_dataset):
        previous = set()
        for neb in range(1, 8):
            current = set(proximal_majority(toy_dataset, neb))
            assert previous <= current
            previous = current

    def test_majority_neighborhood_rows_are_majority(self, toy_dataset):
        near = majority_neighborhoods(toy_dataset, 5)
        assert near.shape == (toy_dataset.minority_count, 5)
        assert set(near.reshape(-1)) <= set(toy_dataset.majority_indices)
