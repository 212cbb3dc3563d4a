"""Lloyd's k-means with k-means++ seeding and best-of-restarts selection.

The objective is the total squared Euclidean distance of points to their
assigned centroid; each restart runs assign/update to a fixed point and the
lowest-objective restart wins.
"""

from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from .labeling import Labeling


def _squared_distances(matrix: np.ndarray, centers: np.ndarray) -> np.ndarray:
    """n x k matrix of squared Euclidean distances, clipped at zero."""
    cross = matrix @ centers.T
    sq = (matrix * matrix).sum(axis=1)[:, None] - 2.0 * cross + (centers * centers).sum(axis=1)[None, :]
    return np.maximum(sq, 0.0)


def _plus_plus_init(matrix: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = matrix.shape[0]
    centers = np.empty((k, matrix.shape[1]))
    centers[0] = matrix[rng.integers(n)]
    closest = _squared_distances(matrix, centers[:1])[:, 0]
    for i in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # all remaining mass sits on chosen centers; fall back to uniform
            idx = rng.integers(n)
        else:
            idx = rng.choice(n, p=closest / total)
        centers[i] = matrix[idx]
        closest = np.minimum(closest, _squared_distances(matrix, centers[i : i + 1])[:, 0])
    return centers


def _lloyd(
    matrix: np.ndarray, centers: np.ndarray, max_iter: int
) -> tuple[np.ndarray, float, list[float]]:
    """Iterate assign/update until labels stabilize; returns the objective trace."""
    k = centers.shape[0]
    labels = np.full(matrix.shape[0], -1)
    trace: list[float] = []
    for _ in range(max_iter):
        sq = _squared_distances(matrix, centers)
        new_labels = sq.argmin(axis=1)

        # Re-seed empty clusters at the point farthest from their old centroid.
        for j in range(k):
            if not (new_labels == j).any():
                farthest = int(sq[:, j].argmax())
                centers[j] = matrix[farthest]
                new_labels[farthest] = j
        sq = _squared_distances(matrix, centers)
        new_labels = sq.argmin(axis=1)

        trace.append(float(sq[np.arange(len(new_labels)), new_labels].sum()))
        if (new_labels == labels).all():
            break
        labels = new_labels
        for j in range(k):
            members = matrix[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)

    sq = _squared_distances(matrix, centers)
    labels = sq.argmin(axis=1)
    objective = float(sq[np.arange(len(labels)), labels].sum())
    trace.append(objective)
    return labels, objective, trace


def kmeans(
    matrix: np.ndarray,
    k: int,
    seed: int = 0,
    restarts: int = 10,
    max_iter: int = 300,
) -> Labeling:
    """Best-of-``restarts`` k-means; deterministic given ``seed``."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ParameterError("k-means requires a non-empty 2-D matrix")
    if not np.isfinite(matrix).all():
        raise ParameterError("k-means requires finite input")
    n = matrix.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} out of range for {n} rows")
    if restarts < 1:
        raise ParameterError("restarts must be >= 1")

    best_labels: np.ndarray | None = None
    best_objective = np.inf
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        centers = _plus_plus_init(matrix, k, rng)
        labels, objective, _ = _lloyd(matrix, centers, max_iter)
        if objective < best_objective - 1e-12 or best_labels is None:
            best_labels = labels
            best_objective = objective

    # Relabel by cluster order of first appearance so runs are comparable.
    order: dict[int, int] = {}
    final = np.empty(n, dtype=int)
    for i, label in enumerate(best_labels):
        if int(label) not in order:
            order[int(label)] = len(order)
        final[i] = order[int(label)]

    return Labeling(
        algorithm="kmeans",
        params={"k": k, "seed": seed, "restarts": restarts},
        labels=final,
        objective=best_objective,
    )
