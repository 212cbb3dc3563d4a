"""Bottom-up agglomerative clustering via Lance-Williams distance updates.

Supports single, complete, average, and ward linkage. Merge heights follow
the usual convention: the raw linkage distance for the first three, and for
ward the square root of twice the variance increase, so two singletons merge
at their Euclidean distance under every linkage (ward's variance increase is
recoverable as ``merge_distance**2 / 2``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..errors import ParameterError
from .labeling import Labeling

LINKAGES = ("single", "complete", "average", "ward")


@dataclass(frozen=True)
class Merge:
    cluster_a: int
    cluster_b: int
    distance: float
    size: int


@dataclass
class Dendrogram:
    """The n-1 merges of a full agglomeration, scipy id convention:
    originals are 0..n-1, the t-th merge creates cluster id n+t."""

    n_points: int
    merges: list[Merge]


def _lance_williams(
    linkage: str,
    d_ik: np.ndarray,
    d_jk: np.ndarray,
    d_ij: float,
    n_i: int,
    n_j: int,
    n_k: np.ndarray,
) -> np.ndarray:
    if linkage == "single":
        return np.minimum(d_ik, d_jk)
    if linkage == "complete":
        return np.maximum(d_ik, d_jk)
    if linkage == "average":
        return (n_i * d_ik + n_j * d_jk) / (n_i + n_j)
    # ward operates on squared distances
    total = n_i + n_j + n_k
    return ((n_i + n_k) * d_ik + (n_j + n_k) * d_jk - n_k * d_ij) / total


def build_dendrogram(matrix: np.ndarray, linkage: str = "ward") -> Dendrogram:
    """Agglomerate singletons into one cluster, recording every merge."""
    if linkage not in LINKAGES:
        raise ParameterError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ParameterError("agglomerative clustering requires at least 2 rows")
    if not np.isfinite(matrix).all():
        raise ParameterError("agglomerative clustering requires finite input")

    n = matrix.shape[0]
    working = squareform(pdist(matrix))
    if linkage == "ward":
        working = working**2
    np.fill_diagonal(working, np.inf)

    active = np.ones(n, dtype=bool)
    sizes = np.ones(n, dtype=int)
    cluster_ids = np.arange(n)
    merges: list[Merge] = []

    for step in range(n - 1):
        flat = int(np.argmin(working))
        i, j = divmod(flat, n)
        if i > j:
            i, j = j, i
        d_ij = float(working[i, j])
        height = float(np.sqrt(d_ij)) if linkage == "ward" else d_ij

        others = active.copy()
        others[[i, j]] = False
        working[i, others] = _lance_williams(
            linkage,
            working[i, others],
            working[j, others],
            d_ij,
            int(sizes[i]),
            int(sizes[j]),
            sizes[others],
        )
        working[others, i] = working[i, others]
        working[j, :] = np.inf
        working[:, j] = np.inf
        active[j] = False

        merges.append(
            Merge(int(cluster_ids[i]), int(cluster_ids[j]), height, int(sizes[i] + sizes[j]))
        )
        sizes[i] += sizes[j]
        cluster_ids[i] = n + step

    return Dendrogram(n_points=n, merges=merges)


def cut_dendrogram(dendrogram: Dendrogram, k: int) -> np.ndarray:
    """Labels for exactly k clusters: apply the first n-k merges.

    Clusters are numbered by their smallest member row index.
    """
    n = dendrogram.n_points
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} out of range for {n} points")

    parent = list(range(2 * n - 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for step, merge in enumerate(dendrogram.merges[: n - k]):
        new_id = n + step
        parent[find(merge.cluster_a)] = new_id
        parent[find(merge.cluster_b)] = new_id

    roots = [find(i) for i in range(n)]
    order: dict[int, int] = {}
    labels = np.empty(n, dtype=int)
    for i, root in enumerate(roots):
        if root not in order:
            order[root] = len(order)
        labels[i] = order[root]
    return labels


def agglomerative(matrix: np.ndarray, k: int, linkage: str = "ward") -> tuple[Labeling, Dendrogram]:
    """Cluster by cutting the full dendrogram at k clusters."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0] if matrix.ndim == 2 else 0
    if not 2 <= k <= n:
        raise ParameterError(f"k={k} out of range for {n} rows")
    dendrogram = build_dendrogram(matrix, linkage)
    labels = cut_dendrogram(dendrogram, k)
    labeling = Labeling(
        algorithm="agglomerative",
        params={"k": k, "linkage": linkage},
        labels=labels,
    )
    return labeling, dendrogram
