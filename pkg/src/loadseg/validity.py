"""Cluster validity indices and the k-sweep that selects the cluster count.

Three indices are computed per labeling: mean silhouette (higher is better),
Davies-Bouldin (lower is better; centroid scatter over centroid separation),
and Calinski-Harabasz (higher is better; between/within dispersion ratio
scaled by (N-K)/(K-1)). The sweep selects a per-index optimum and a majority
winner, breaking ties toward the smallest k.
"""

from __future__ import annotations

import csv
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .errors import ParameterError, UndefinedIndexError

INDEX_NAMES = ("silhouette", "dbi", "chi")


def _check_labeled_matrix(matrix: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    matrix = np.asarray(matrix, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if matrix.ndim != 2:
        raise ParameterError("expected a 2-D matrix")
    if len(labels) != matrix.shape[0]:
        raise ParameterError("labels and matrix rows differ in length")
    if (labels < 0).any():
        raise ParameterError("noise rows must be excluded by the caller")
    return matrix, labels


def silhouette(matrix: np.ndarray, labels: np.ndarray) -> float:
    """Mean over points of (b - a) / max(a, b); singleton clusters score 0."""
    matrix, labels = _check_labeled_matrix(matrix, labels)
    unique = np.unique(labels)
    if len(unique) < 2:
        raise UndefinedIndexError("silhouette requires at least 2 clusters")

    distances = cdist(matrix, matrix)
    n = matrix.shape[0]
    members = {c: np.nonzero(labels == c)[0] for c in unique}
    scores = np.zeros(n)
    for i in range(n):
        own = members[labels[i]]
        if len(own) == 1:
            continue
        a = distances[i, own].sum() / (len(own) - 1)
        b = min(distances[i, members[c]].mean() for c in unique if c != labels[i])
        scores[i] = (b - a) / max(a, b)
    return float(scores.mean())


def davies_bouldin(matrix: np.ndarray, labels: np.ndarray) -> float:
    """Mean over clusters of the worst (S_i + S_j) / d_ij ratio.

    S_i is the mean Euclidean distance of cluster i's points to its centroid,
    d_ij the distance between centroids. Coincident centroids with nonzero
    scatter yield +inf rather than an error.
    """
    matrix, labels = _check_labeled_matrix(matrix, labels)
    unique = np.unique(labels)
    k = len(unique)
    if k < 2:
        raise UndefinedIndexError("Davies-Bouldin requires at least 2 clusters")

    centroids = np.vstack([matrix[labels == c].mean(axis=0) for c in unique])
    scatter = np.array(
        [
            np.linalg.norm(matrix[labels == c] - centroids[idx], axis=1).mean()
            for idx, c in enumerate(unique)
        ]
    )
    separation = cdist(centroids, centroids)

    worst = np.zeros(k)
    for i in range(k):
        ratios = []
        for j in range(k):
            if i == j:
                continue
            mixed = scatter[i] + scatter[j]
            if separation[i, j] == 0.0:
                ratios.append(np.inf if mixed > 0 else 0.0)
            else:
                ratios.append(mixed / separation[i, j])
        worst[i] = max(ratios)
    return float(worst.mean())


def calinski_harabasz(matrix: np.ndarray, labels: np.ndarray) -> float:
    """Between/within sum-of-squares ratio scaled by (N - K) / (K - 1)."""
    matrix, labels = _check_labeled_matrix(matrix, labels)
    unique = np.unique(labels)
    n, k = matrix.shape[0], len(unique)
    if not 2 <= k < n:
        raise UndefinedIndexError("Calinski-Harabasz requires 2 <= K < N")

    overall = matrix.mean(axis=0)
    between = 0.0
    within = 0.0
    for c in unique:
        cluster = matrix[labels == c]
        centroid = cluster.mean(axis=0)
        between += len(cluster) * float(((centroid - overall) ** 2).sum())
        within += float(((cluster - centroid) ** 2).sum())
    if within == 0.0:
        raise UndefinedIndexError("Calinski-Harabasz undefined for zero within-cluster scatter")
    return float(between / within * (n - k) / (k - 1))


@dataclass
class ValidityEntry:
    algorithm: str
    k: int
    silhouette: float | None = None
    dbi: float | None = None
    chi: float | None = None

    def value(self, index: str) -> float | None:
        return getattr(self, index)


@dataclass
class ValidityReport:
    """Per-k index values plus the per-index and majority-vote selections."""

    algorithm: str
    entries: list[ValidityEntry] = field(default_factory=list)
    chosen: dict[str, int] = field(default_factory=dict)

    @property
    def majority_k(self) -> int:
        return self.chosen["majority"]

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "entries": [
                {
                    "algorithm": e.algorithm,
                    "k": e.k,
                    "silhouette": e.silhouette,
                    "dbi": e.dbi,
                    "chi": e.chi,
                }
                for e in self.entries
            ],
            "chosen": dict(self.chosen),
        }


def choose_optima(entries: Sequence[ValidityEntry]) -> dict[str, int]:
    """Per-index optimum (max silhouette, min DBI, max CHI) and majority vote.

    All ties break toward the smaller k.
    """
    defined = [e for e in entries if e.silhouette is not None]
    if not defined:
        raise UndefinedIndexError("no sweep entry has defined indices")

    chosen: dict[str, int] = {}
    for index, prefer_max in (("silhouette", True), ("dbi", False), ("chi", True)):
        candidates = [e for e in entries if e.value(index) is not None]
        sign = -1.0 if prefer_max else 1.0
        best = min(candidates, key=lambda e: (sign * e.value(index), e.k))
        chosen[index] = best.k

    votes = Counter(chosen[index] for index in INDEX_NAMES)
    top = max(votes.values())
    chosen["majority"] = min(k for k, count in votes.items() if count == top)
    return chosen


def sweep(
    matrix: np.ndarray,
    algorithm: str,
    k_range: Sequence[int] | range = range(2, 31),
    seed: int = 0,
    restarts: int = 10,
    linkage: str = "ward",
) -> ValidityReport:
    """Run one algorithm across k values and score every labeling.

    Undefined indices become absent entries instead of aborting the sweep.
    """
    from .clustering import agglomerative, build_dendrogram, cut_dendrogram, kmeans, kmedoids

    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ParameterError("empty k range")
    if ks[0] < 2 or ks[-1] > n - 1:
        raise ParameterError(f"k range {ks[0]}..{ks[-1]} outside [2, {n - 1}]")

    dendrogram = build_dendrogram(matrix, linkage) if algorithm == "agglomerative" else None

    report = ValidityReport(algorithm=algorithm)
    for k in ks:
        if algorithm == "kmeans":
            labels = kmeans(matrix, k, seed=seed, restarts=restarts).labels
        elif algorithm == "kmedoids":
            labels = kmedoids(matrix, k, seed=seed).labels
        elif algorithm == "agglomerative":
            labels = cut_dendrogram(dendrogram, k)
        else:
            raise ParameterError(f"sweep does not support algorithm {algorithm!r}")

        entry = ValidityEntry(algorithm=algorithm, k=k)
        try:
            entry.silhouette = silhouette(matrix, labels)
            entry.dbi = davies_bouldin(matrix, labels)
            entry.chi = calinski_harabasz(matrix, labels)
        except UndefinedIndexError:
            entry.silhouette = entry.dbi = entry.chi = None
        report.entries.append(entry)

    report.chosen = choose_optima(report.entries)
    return report


def write_report_json(reports: Sequence[ValidityReport], path: str | Path) -> None:
    with open(path, "w") as handle:
        json.dump([r.to_dict() for r in reports], handle, indent=2, sort_keys=True)
        handle.write("\n")


def write_selection_csv(reports: Sequence[ValidityReport], path: str | Path) -> None:
    """One row per algorithm: the k chosen by each index and the majority."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["algorithm", "silhouette_k", "dbi_k", "chi_k", "majority_k"])
        for report in reports:
            writer.writerow(
                [report.algorithm]
                + [report.chosen[index] for index in INDEX_NAMES]
                + [report.chosen["majority"]]
            )


def write_curves_csv(reports: Sequence[ValidityReport], path: str | Path) -> None:
    """Long-format per-k index values for plotting."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["algorithm", "k", "silhouette", "dbi", "chi"])
        for report in reports:
            for entry in report.entries:
                writer.writerow(
                    [
                        entry.algorithm,
                        entry.k,
                        "" if entry.silhouette is None else str(entry.silhouette),
                        "" if entry.dbi is None else str(entry.dbi),
                        "" if entry.chi is None else str(entry.chi),
                    ]
                )
