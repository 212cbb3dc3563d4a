import numpy as np
import pytest

from loadseg.clustering import Labeling
from loadseg.consensus import (
    AgreementReport,
    align,
    contingency,
    cross_compare,
    write_contingency_csv,
)

from .oracles import best_assignment_value

# Published cross-algorithm co-occurrence tables for a seven-cluster k-means
# reference on the London population (k-means rows, other algorithm columns).
KMEANS_VS_AGGLOMERATIVE = np.array(
    [
        [2442, 0, 0, 0, 0, 0, 0],
        [0, 0, 485, 0, 0, 0, 0],
        [0, 0, 0, 0, 417, 0, 0],
        [0, 0, 0, 0, 0, 239, 0],
        [111, 9, 6, 123, 0, 0, 0],
        [0, 399, 0, 0, 0, 0, 0],
        [0, 0, 0, 1, 0, 0, 206],
    ]
)
KMEANS_VS_KMEDOIDS = np.array(
    [
        [557, 223, 509, 660, 0, 242, 251],
        [0, 0, 0, 0, 475, 10, 0],
        [0, 0, 0, 0, 414, 3, 0],
        [0, 0, 0, 0, 235, 4, 0],
        [0, 0, 0, 0, 4, 245, 0],
        [0, 0, 0, 0, 396, 3, 0],
        [0, 0, 0, 0, 205, 2, 0],
    ]
)
KMEANS_VS_DBSCAN = np.array(
    [
        [2442, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 0, 0, 485],
        [0, 0, 416, 0, 0, 0, 1],
        [0, 0, 0, 238, 0, 0, 1],
        [192, 4, 0, 12, 7, 1, 33],
        [0, 122, 0, 0, 274, 0, 3],
        [0, 0, 0, 0, 0, 207, 0],
    ]
)


def labelings_from_counts(counts):
    """Build a pair of label vectors realizing a given contingency table."""
    a, b = [], []
    for i, row in enumerate(np.asarray(counts)):
        for j, count in enumerate(row):
            a.extend([i] * int(count))
            b.extend([j] * int(count))
    return np.array(a), np.array(b)


def test_contingency_identical_labelings():
    labels = np.array([0, 0, 0, 1, 1])
    table = contingency(labels, labels)
    assert table.counts.tolist() == [[3, 0], [0, 2]]


def test_contingency_antidiagonal():
    table = contingency([0, 0, 1, 1], [1, 1, 0, 0])
    assert table.counts.tolist() == [[0, 2], [2, 0]]


def test_contingency_excludes_noise_pairwise():
    table = contingency([0, 0, 1, -1], [0, -1, 1, 1])
    assert table.total == 2
    assert table.counts.tolist() == [[1, 0], [0, 1]]


def test_contingency_length_mismatch():
    with pytest.raises(ValueError):
        contingency([0, 1], [0, 1, 1])


def test_contingency_row_and_column_sums_match_cluster_sizes():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(5, 60))
        a = rng.integers(0, 4, size=n)
        b = rng.integers(0, 3, size=n)
        table = contingency(a, b)
        for i, label in enumerate(table.row_labels):
            assert table.counts[i].sum() == (a == label).sum()
        for j, label in enumerate(table.col_labels):
            assert table.counts[:, j].sum() == (b == label).sum()


def test_contingency_paper_cell():
    a, b = labelings_from_counts(KMEANS_VS_AGGLOMERATIVE)
    table = contingency(a, b, "kmeans", "agglomerative")
    assert table.counts[0, 0] == 2442
    assert table.counts.sum() == 4438


def test_align_recovers_permutation():
    labels = np.array([0, 0, 1, 1, 2, 2, 2])
    permuted = np.array([2, 2, 0, 0, 1, 1, 1])
    report = align(contingency(labels, permuted))
    assert report.alignment == {0: 2, 1: 0, 2: 1}
    assert report.overall_agreement == 1.0
    assert report.unstable == set()


def test_align_paper_row4_is_unstable():
    a, b = labelings_from_counts(KMEANS_VS_AGGLOMERATIVE)
    report = align(contingency(a, b))
    assert report.per_cluster_agreement[4] == pytest.approx(123 / 249, abs=1e-12)
    assert 4 in report.unstable


def test_align_tie_breaks_to_identity():
    table = contingency([0, 0, 1, 1], [0, 1, 0, 1])
    report = align(table)
    assert report.overall_agreement == 0.5
    assert report.alignment == {0: 0, 1: 1}


def test_align_matches_exhaustive_matching():
    rng = np.random.default_rng(11)
    for _ in range(30):
        rows = int(rng.integers(1, 7))
        cols = int(rng.integers(1, 7))
        counts = rng.integers(0, 20, size=(rows, cols))
        a, b = labelings_from_counts(counts)
        if len(a) == 0:
            continue
        table = contingency(a, b)
        report = align(table)
        matched_total = round(report.overall_agreement * table.total)
        assert matched_total == best_assignment_value(table.counts)


def test_overall_agreement_symmetric():
    rng = np.random.default_rng(3)
    a = rng.integers(0, 5, size=80)
    b = rng.integers(0, 3, size=80)
    forward = align(contingency(a, b)).overall_agreement
    backward = align(contingency(b, a)).overall_agreement
    assert forward == pytest.approx(backward, abs=1e-12)


def _labeling(name, labels):
    return Labeling(algorithm=name, labels=np.asarray(labels))


def test_cross_compare_perfect_consensus_has_no_flags():
    labels = np.array([0, 0, 1, 1, 2, 2])
    result = cross_compare(
        {
            "kmeans": _labeling("kmeans", labels),
            "agglomerative": _labeling("agglomerative", labels),
            "dbscan": _labeling("dbscan", (labels + 1) % 3),  # relabeled, same partition
        },
        reference="kmeans",
    )
    assert result.flagged == set()


def test_cross_compare_flags_paper_clusters_4_and_5():
    a1, b1 = labelings_from_counts(KMEANS_VS_AGGLOMERATIVE)
    a2, b2 = labelings_from_counts(KMEANS_VS_KMEDOIDS)
    a3, b3 = labelings_from_counts(KMEANS_VS_DBSCAN)
    # all three tables share the same k-means marginal, so reorder the other
    # labelings onto one canonical k-means vector
    order1, order2, order3 = np.argsort(a1, kind="stable"), np.argsort(a2, kind="stable"), np.argsort(a3, kind="stable")
    np.testing.assert_array_equal(a1[order1], a2[order2])
    np.testing.assert_array_equal(a1[order1], a3[order3])
    result = cross_compare(
        {
            "kmeans": _labeling("kmeans", a1[order1]),
            "agglomerative": _labeling("agglomerative", b1[order1]),
            "kmedoids": _labeling("kmedoids", b2[order2]),
            "dbscan": _labeling("dbscan", b3[order3]),
        },
        reference="kmeans",
    )
    assert result.flagged == {4, 5}


def test_cross_compare_adversarial_minority_does_not_flag():
    labels = np.array([0] * 5 + [1] * 5 + [2] * 5)
    adversarial = np.array([0, 1, 2] * 5)
    result = cross_compare(
        {
            "kmeans": _labeling("kmeans", labels),
            "a1": _labeling("a1", labels),
            "a2": _labeling("a2", labels),
            "a3": _labeling("a3", adversarial),
        },
        reference="kmeans",
    )
    assert result.flagged == set()


def test_cross_compare_requires_reference():
    with pytest.raises(ValueError):
        cross_compare({"kmeans": _labeling("kmeans", [0, 1])}, reference="dbscan")


def test_contingency_csv_layout(tmp_path):
    a, b = labelings_from_counts([[3, 0], [1, 2]])
    table = contingency(a, b, "kmeans", "dbscan")
    path = tmp_path / "table.csv"
    write_contingency_csv(table, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "kmeans\\dbscan,0,1"
    assert lines[1] == "0,3,0"
    assert lines[2] == "1,1,2"
