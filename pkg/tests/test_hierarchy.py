import numpy as np
import pytest
import scipy.cluster.hierarchy as sch

from loadseg.clustering import LINKAGES, agglomerative, build_dendrogram, cut_dendrogram
from loadseg.errors import ParameterError


def test_two_points_merge_at_euclidean_distance_under_every_linkage():
    X = np.array([[0.0, 0.0], [3.0, 4.0]])
    for linkage in LINKAGES:
        _, dendrogram = agglomerative(X, k=2, linkage=linkage)
        assert len(dendrogram.merges) == 1
        assert dendrogram.merges[0].distance == pytest.approx(5.0, abs=1e-12)


def test_ward_singleton_merge_cost_is_half_squared_distance():
    X = np.array([[1.0, 2.0], [4.0, 6.0]])
    dendrogram = build_dendrogram(X, "ward")
    variance_increase = dendrogram.merges[0].distance ** 2 / 2
    assert variance_increase == pytest.approx(np.sum((X[0] - X[1]) ** 2) / 2, abs=1e-12)


def test_single_joins_straggler_at_lower_height_than_complete():
    X = np.array([[0.0], [1.0], [9.0], [10.0], [4.5]])

    def join_height(linkage):
        dendrogram = build_dendrogram(X, linkage)
        for merge in dendrogram.merges:
            if 4 in (merge.cluster_a, merge.cluster_b):
                return merge.distance
        raise AssertionError("straggler never merged")

    assert join_height("single") == pytest.approx(3.5)
    assert join_height("complete") == pytest.approx(4.5)
    assert join_height("single") < join_height("complete")


def test_exactly_n_minus_one_merges_and_k_clusters():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(23, 3))
    for linkage in LINKAGES:
        labeling, dendrogram = agglomerative(X, k=4, linkage=linkage)
        assert len(dendrogram.merges) == 22
        assert labeling.n_clusters == 4
        for k in range(2, 10):
            assert len(set(cut_dendrogram(dendrogram, k).tolist())) == k


def test_merge_heights_non_decreasing():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(30, 4))
    for linkage in LINKAGES:
        dendrogram = build_dendrogram(X, linkage)
        heights = [merge.distance for merge in dendrogram.merges]
        assert all(b >= a - 1e-9 for a, b in zip(heights, heights[1:]))


@pytest.mark.parametrize("linkage", LINKAGES)
def test_matches_scipy_linkage(linkage):
    rng = np.random.default_rng(42)
    for _ in range(5):
        X = rng.normal(size=(18, 3))
        mine = build_dendrogram(X, linkage)
        reference = sch.linkage(X, method=linkage)
        np.testing.assert_allclose(
            [merge.distance for merge in mine.merges], reference[:, 2], rtol=1e-9, atol=1e-9
        )
        for k in (2, 3, 5):
            ref_labels = sch.fcluster(reference, t=k, criterion="maxclust")
            my_labels = cut_dendrogram(mine, k)
            pairs = {tuple(sorted((i, j))) for i in range(18) for j in range(18) if my_labels[i] == my_labels[j]}
            ref_pairs = {tuple(sorted((i, j))) for i in range(18) for j in range(18) if ref_labels[i] == ref_labels[j]}
            assert pairs == ref_pairs


def test_parameter_errors():
    X = np.zeros((4, 2))
    with pytest.raises(ParameterError):
        agglomerative(X, k=1)
    with pytest.raises(ParameterError):
        agglomerative(X, k=5)
    with pytest.raises(ParameterError):
        agglomerative(X, k=2, linkage="centroid")
