"""Cross-algorithm consensus: contingency tables, label alignment, flagging.

Two labelings are compared through their co-occurrence counts. An optimal
injective matching of one side's clusters onto the other turns the informal
"do the algorithms agree?" question into per-cluster agreement scores;
clusters that stay below the agreement threshold in a majority of pairwise
comparisons are flagged as unstable and become refinement candidates.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .clustering import NOISE, Labeling

DEFAULT_INSTABILITY_THRESHOLD = 0.7


@dataclass
class ContingencyMatrix:
    """Co-occurrence counts between two labelings; noise rows are excluded
    pairwise before counting."""

    algo_a: str
    algo_b: str
    counts: np.ndarray
    row_labels: list[int]
    col_labels: list[int]

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def contingency(
    labels_a: np.ndarray,
    labels_b: np.ndarray,
    algo_a: str = "a",
    algo_b: str = "b",
) -> ContingencyMatrix:
    """Exact co-occurrence counts over points labeled non-noise by both sides."""
    labels_a = np.asarray(labels_a, dtype=int)
    labels_b = np.asarray(labels_b, dtype=int)
    if len(labels_a) != len(labels_b):
        raise ValueError(f"labelings differ in length: {len(labels_a)} vs {len(labels_b)}")

    keep = (labels_a != NOISE) & (labels_b != NOISE)
    kept_a, kept_b = labels_a[keep], labels_b[keep]
    row_labels = sorted(set(kept_a.tolist()))
    col_labels = sorted(set(kept_b.tolist()))
    counts = np.zeros((len(row_labels), len(col_labels)), dtype=int)
    row_index = {label: i for i, label in enumerate(row_labels)}
    col_index = {label: j for j, label in enumerate(col_labels)}
    for a, b in zip(kept_a, kept_b):
        counts[row_index[a], col_index[b]] += 1
    return ContingencyMatrix(algo_a, algo_b, counts, row_labels, col_labels)


@dataclass
class AgreementReport:
    algo_a: str
    algo_b: str
    alignment: dict[int, int]
    overall_agreement: float
    per_cluster_agreement: dict[int, float]
    unstable: set[int]
    threshold: float


def align(matrix: ContingencyMatrix, threshold: float = DEFAULT_INSTABILITY_THRESHOLD) -> AgreementReport:
    """Optimal injective matching of A-clusters onto B-clusters by count mass.

    Per-cluster agreement is the matched count over the cluster's row sum;
    rows left unmatched (more A-clusters than B-clusters) score 0. Exact
    matching ties are broken toward mapping a label onto itself.
    """
    counts = matrix.counts
    if counts.size == 0:
        return AgreementReport(matrix.algo_a, matrix.algo_b, {}, 0.0, {}, set(), threshold)

    cost = -counts.astype(float)
    for i, row_label in enumerate(matrix.row_labels):
        for j, col_label in enumerate(matrix.col_labels):
            if row_label == col_label:
                cost[i, j] -= 1e-9  # nudge exact ties toward the identity map
    row_ind, col_ind = linear_sum_assignment(cost)

    alignment = {
        matrix.row_labels[i]: matrix.col_labels[j]
        for i, j in zip(row_ind, col_ind)
        if counts[i, j] > 0
    }
    matched = {matrix.row_labels[i]: int(counts[i, j]) for i, j in zip(row_ind, col_ind)}

    per_cluster = {}
    unstable = set()
    for i, row_label in enumerate(matrix.row_labels):
        row_sum = int(counts[i].sum())
        agreement = matched.get(row_label, 0) / row_sum if row_sum else 0.0
        per_cluster[row_label] = agreement
        if agreement < threshold:
            unstable.add(row_label)

    overall = sum(matched.values()) / matrix.total if matrix.total else 0.0
    return AgreementReport(
        matrix.algo_a, matrix.algo_b, alignment, overall, per_cluster, unstable, threshold
    )


@dataclass
class CrossCompareResult:
    reference: str
    reports: dict[str, AgreementReport] = field(default_factory=dict)
    flagged: set[int] = field(default_factory=set)


def cross_compare(
    labelings: Mapping[str, Labeling] | Iterable[Labeling],
    reference: str,
    threshold: float = DEFAULT_INSTABILITY_THRESHOLD,
) -> CrossCompareResult:
    """Compare the reference labeling against every other labeling.

    A reference cluster is flagged when it is unstable in a strict majority
    of the pairwise reports. Reference clusters absent from a comparison
    (all their points noise on the other side) count as unstable there:
    nothing in that comparison confirms them.
    """
    if not isinstance(labelings, Mapping):
        labelings = {labeling.algorithm: labeling for labeling in labelings}
    if reference not in labelings:
        raise ValueError(f"reference {reference!r} not among labelings {sorted(labelings)}")
    others = {name: labeling for name, labeling in labelings.items() if name != reference}
    if not others:
        raise ValueError("cross_compare needs at least 2 labelings")

    ref_labels = labelings[reference].labels
    ref_clusters = sorted(set(ref_labels.tolist()) - {NOISE})

    result = CrossCompareResult(reference=reference)
    votes = {cluster: 0 for cluster in ref_clusters}
    for name in sorted(others):
        table = contingency(ref_labels, others[name].labels, reference, name)
        report = align(table, threshold)
        result.reports[name] = report
        for cluster in ref_clusters:
            if cluster not in report.per_cluster_agreement or cluster in report.unstable:
                votes[cluster] += 1

    majority = len(result.reports)
    result.flagged = {cluster for cluster, count in votes.items() if 2 * count > majority}
    return result


def write_contingency_csv(matrix: ContingencyMatrix, path: str | Path) -> None:
    """Table layout: one row per A-cluster, one column per B-cluster."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"{matrix.algo_a}\\{matrix.algo_b}", *matrix.col_labels])
        for label, row in zip(matrix.row_labels, matrix.counts):
            writer.writerow([label, *[int(v) for v in row]])


def write_agreement_json(result: CrossCompareResult, path: str | Path) -> None:
    import json

    payload = {
        "reference": result.reference,
        "flagged": sorted(result.flagged),
        "reports": {
            name: {
                "algo_a": report.algo_a,
                "algo_b": report.algo_b,
                "alignment": {str(k): v for k, v in sorted(report.alignment.items())},
                "overall_agreement": report.overall_agreement,
                "per_cluster_agreement": {
                    str(k): v for k, v in sorted(report.per_cluster_agreement.items())
                },
                "unstable": sorted(report.unstable),
                "threshold": report.threshold,
            }
            for name, report in sorted(result.reports.items())
        },
    }
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
