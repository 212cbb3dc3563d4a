"""PAM k-medoids: greedy BUILD then steepest-descent SWAP on Euclidean cost.

Medoids are data rows; the objective is the plain (not squared) Euclidean
distance of each point to its medoid. SWAP deltas are evaluated for all
(medoid, candidate) pairs per pass using the nearest/second-nearest caches,
and the single best improving swap is applied until none remains.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ..errors import ParameterError
from .labeling import Labeling

_EPS = 1e-12
_CHUNK = 512


def _distance_matrix(matrix: np.ndarray) -> np.ndarray:
    if matrix.shape[0] == 1:
        return np.zeros((1, 1))
    return squareform(pdist(matrix))


def _nearest_two(
    distances: np.ndarray, medoids: list[int]
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per point: index (into the medoid list) of the nearest medoid, its
    distance, and the second-nearest distance."""
    sub = distances[:, medoids]
    if len(medoids) == 1:
        nearest = np.zeros(distances.shape[0], dtype=int)
        return nearest, sub[:, 0], np.full(distances.shape[0], np.inf)
    order = np.argsort(sub, axis=1, kind="stable")
    nearest = order[:, 0]
    rows = np.arange(distances.shape[0])
    return nearest, sub[rows, nearest], sub[rows, order[:, 1]]


def _build(distances: np.ndarray, k: int) -> list[int]:
    medoids = [int(distances.sum(axis=0).argmin())]
    dnear = distances[:, medoids[0]].copy()
    for _ in range(1, k):
        # Gain of adding candidate h: total reduction of nearest distances.
        gains = np.maximum(dnear[:, None] - distances, 0.0).sum(axis=0)
        gains[medoids] = -np.inf
        chosen = int(gains.argmax())
        medoids.append(chosen)
        dnear = np.minimum(dnear, distances[:, chosen])
    return medoids


def _swap(distances: np.ndarray, medoids: list[int], max_passes: int = 500) -> list[int]:
    n = distances.shape[0]
    k = len(medoids)
    rows = np.arange(n)
    for _ in range(max_passes):
        nearest, dnear, dsecond = _nearest_two(distances, medoids)
        candidates = np.setdiff1d(rows, medoids)
        if len(candidates) == 0:
            break
        one_hot = np.zeros((k, n))
        one_hot[nearest, rows] = 1.0

        best_delta = np.inf
        best_pair: tuple[int, int] | None = None
        for start in range(0, len(candidates), _CHUNK):
            chunk = candidates[start : start + _CHUNK]
            sub = distances[:, chunk]
            # Points keeping their medoid can only improve by moving to the candidate.
            shared = np.minimum(sub - dnear[:, None], 0.0)
            # Points losing medoid i reassign to min(candidate, second nearest).
            loss = np.minimum(sub, dsecond[:, None]) - dnear[:, None] - shared
            deltas = one_hot @ loss + shared.sum(axis=0)[None, :]
            flat = int(deltas.argmin())
            i, h = divmod(flat, len(chunk))
            if deltas[i, h] < best_delta:
                best_delta = float(deltas[i, h])
                best_pair = (i, int(chunk[h]))

        if best_pair is None or best_delta >= -_EPS:
            break
        medoids[best_pair[0]] = best_pair[1]
    return medoids


def kmedoids(matrix: np.ndarray, k: int, seed: int = 0, restarts: int = 8) -> Labeling:
    """PAM clustering: deterministic BUILD+SWAP plus seeded random restarts.

    SWAP is a single-swap local search, so the greedy BUILD start can strand
    it in a local optimum; each restart re-runs SWAP from a random medoid set
    and the lowest-cost solution wins. Deterministic given ``seed``.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] == 0:
        raise ParameterError("k-medoids requires a non-empty 2-D matrix")
    if not np.isfinite(matrix).all():
        raise ParameterError("k-medoids requires finite input")
    n = matrix.shape[0]
    if not 1 <= k <= n:
        raise ParameterError(f"k={k} out of range for {n} rows")
    if restarts < 0:
        raise ParameterError("restarts must be >= 0")

    distances = _distance_matrix(matrix)

    def cost_of(medoids: list[int]) -> float:
        return float(distances[:, medoids].min(axis=1).sum())

    best = sorted(_swap(distances, _build(distances, k)))
    best_cost = cost_of(best)
    for restart in range(restarts):
        rng = np.random.default_rng([seed, restart])
        init = [int(i) for i in rng.choice(n, size=k, replace=False)]
        candidate = sorted(_swap(distances, init))
        candidate_cost = cost_of(candidate)
        if candidate_cost < best_cost - _EPS:
            best, best_cost = candidate, candidate_cost

    sub = distances[:, best]
    labels = sub.argmin(axis=1)

    return Labeling(
        algorithm="kmedoids",
        params={
            "k": k,
            "seed": seed,
            "restarts": restarts,
            "medoids": [int(m) for m in best],
        },
        labels=labels,
        objective=best_cost,
    )
