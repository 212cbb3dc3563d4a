"""DBSCAN with core/border/noise semantics plus an epsilon sweep.

Core points have at least ``min_pts`` neighbors (self included) within
``eps``; clusters are the connected components of the core-core neighbor
graph; border points attach to the cluster of their nearest core; everything
else is noise (label -1). The sweep scores each candidate labeling on the
non-noise rows with all three validity indices and keeps the labeling with
the best combined rank.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ParameterError, SweepFailureError, UndefinedIndexError
from .labeling import NOISE, Labeling

_CHUNK = 1024


def _neighbor_lists(matrix: np.ndarray, eps: float) -> list[np.ndarray]:
    neighbors: list[np.ndarray] = []
    for start in range(0, matrix.shape[0], _CHUNK):
        block = cdist(matrix[start : start + _CHUNK], matrix)
        for row in block:
            neighbors.append(np.nonzero(row <= eps)[0])
    return neighbors


def dbscan(matrix: np.ndarray, eps: float, min_pts: int = 5) -> Labeling:
    """Label density-connected clusters; the cluster count is emergent."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ParameterError("dbscan requires a non-empty 2-D matrix")
    if not np.isfinite(matrix).all():
        raise ParameterError("dbscan requires finite input")
    if eps <= 0:
        raise ParameterError("eps must be positive")
    if min_pts < 1:
        raise ParameterError("min_pts must be >= 1")

    n = matrix.shape[0]
    neighbors = _neighbor_lists(matrix, eps)
    is_core = np.array([len(nb) >= min_pts for nb in neighbors])

    labels = np.full(n, NOISE, dtype=int)
    cluster = 0
    for seed_point in range(n):
        if not is_core[seed_point] or labels[seed_point] != NOISE:
            continue
        frontier = [seed_point]
        labels[seed_point] = cluster
        while frontier:
            point = frontier.pop()
            for neighbor in neighbors[point]:
                if is_core[neighbor] and labels[neighbor] == NOISE:
                    labels[neighbor] = cluster
                    frontier.append(neighbor)
        cluster += 1

    # Border points: within eps of some core, assigned to the nearest core's
    # cluster so the result does not depend on traversal order.
    core_indices = np.nonzero(is_core)[0]
    if len(core_indices):
        for point in range(n):
            if labels[point] != NOISE or len(neighbors[point]) == 0:
                continue
            in_reach = neighbors[point][is_core[neighbors[point]]]
            if len(in_reach) == 0:
                continue
            gaps = np.linalg.norm(matrix[in_reach] - matrix[point], axis=1)
            labels[point] = labels[in_reach[int(gaps.argmin())]]

    labeling = Labeling(
        algorithm="dbscan",
        params={"eps": float(eps), "min_pts": int(min_pts)},
        labels=labels,
    )
    labeling.params["noise_fraction"] = labeling.noise_fraction
    return labeling


def default_eps_grid(matrix: np.ndarray, min_pts: int = 5, size: int = 20) -> np.ndarray:
    """Log-spaced grid between the 1st and 99th percentile of the distance to
    each point's min_pts-th neighbor (self included)."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    if n < 2:
        raise ParameterError("eps grid requires at least 2 rows")
    rank = min(min_pts, n) - 1
    knn = np.empty(n)
    for start in range(0, n, _CHUNK):
        block = cdist(matrix[start : start + _CHUNK], matrix)
        block.sort(axis=1)
        knn[start : start + block.shape[0]] = block[:, rank]
    lo, hi = np.percentile(knn, [1, 99])
    positive = knn[knn > 0]
    floor = positive.min() if len(positive) else 1e-12
    lo = max(lo, floor)
    hi = max(hi, lo * (1 + 1e-9))
    return np.geomspace(lo, hi, size)


@dataclass
class EpsCandidate:
    eps: float
    n_clusters: int
    noise_fraction: float
    silhouette: float | None = None
    dbi: float | None = None
    chi: float | None = None


@dataclass
class DbscanSweepResult:
    best: Labeling
    candidates: list[EpsCandidate]


def dbscan_sweep(
    matrix: np.ndarray,
    eps_grid: np.ndarray | list[float] | None = None,
    min_pts: int = 5,
    max_noise_fraction: float = 0.25,
) -> DbscanSweepResult:
    """Run dbscan per eps and keep the labeling with the best combined rank.

    Indices are computed over non-noise points only. Candidates shedding more
    than ``max_noise_fraction`` of the points as noise are disqualified;
    without that cap a tiny eps that keeps only a few dense cores scores
    near-perfectly on the surviving points and always wins. Ranks (higher
    silhouette, lower DBI, higher CHI) are summed across the three indices;
    ties break toward fewer clusters, then smaller eps. Raises
    :class:`SweepFailureError` when every labeling is degenerate.
    """
    from ..validity import calinski_harabasz, davies_bouldin, silhouette  # cycle guard

    matrix = np.asarray(matrix, dtype=float)
    if eps_grid is None:
        eps_grid = default_eps_grid(matrix, min_pts=min_pts)
    eps_values = [float(e) for e in np.asarray(eps_grid, dtype=float)]
    if not eps_values:
        raise ParameterError("eps grid must be non-empty")

    labelings: list[Labeling] = []
    candidates: list[EpsCandidate] = []
    for eps in eps_values:
        labeling = dbscan(matrix, eps, min_pts)
        candidate = EpsCandidate(
            eps=eps, n_clusters=labeling.n_clusters, noise_fraction=labeling.noise_fraction
        )
        keep = labeling.labels != NOISE
        if labeling.n_clusters >= 2 and labeling.noise_fraction <= max_noise_fraction:
            subset = matrix[keep]
            sub_labels = labeling.labels[keep]
            try:
                candidate.silhouette = silhouette(subset, sub_labels)
                candidate.dbi = davies_bouldin(subset, sub_labels)
                candidate.chi = calinski_harabasz(subset, sub_labels)
            except UndefinedIndexError:
                candidate.silhouette = candidate.dbi = candidate.chi = None
        labelings.append(labeling)
        candidates.append(candidate)

    scored = [i for i, c in enumerate(candidates) if c.silhouette is not None]
    if not scored:
        raise SweepFailureError(
            "no eps in the grid produced >= 2 non-noise clusters with defined indices "
            f"within the noise cap of {max_noise_fraction}"
        )

    def ranks(values: list[float], reverse: bool) -> dict[int, int]:
        ordered = sorted(scored, key=lambda i: values[i], reverse=reverse)
        return {i: rank for rank, i in enumerate(ordered)}

    sil_rank = ranks([candidates[i].silhouette for i in range(len(candidates))], reverse=True)
    dbi_rank = ranks([candidates[i].dbi for i in range(len(candidates))], reverse=False)
    chi_rank = ranks([candidates[i].chi for i in range(len(candidates))], reverse=True)

    best = min(
        scored,
        key=lambda i: (
            sil_rank[i] + dbi_rank[i] + chi_rank[i],
            candidates[i].n_clusters,
            candidates[i].eps,
        ),
    )
    return DbscanSweepResult(best=labelings[best], candidates=candidates)
