"""Exact (quadratic) t-SNE for 2-D separation reports.

Per-point Gaussian bandwidths are binary-searched to hit the target
perplexity, affinities are symmetrized, and the embedding is optimized by
momentum gradient descent on the KL divergence with an early-exaggeration
phase. No tree approximation: intended for desk-scale inputs.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import ParameterError

_P_FLOOR = 1e-12
_ENTROPY_TOL = 1e-5
_BISECTION_STEPS = 60


def _conditional_probabilities(sq_distances: np.ndarray, perplexity: float) -> np.ndarray:
    """Row-stochastic affinities whose entropy matches log(perplexity)."""
    n = sq_distances.shape[0]
    target = np.log(perplexity)
    conditional = np.zeros((n, n))
    for i in range(n):
        row = np.delete(sq_distances[i], i)
        beta, lo, hi = 1.0, 0.0, np.inf
        for _ in range(_BISECTION_STEPS):
            logits = -beta * row
            logits -= logits.max()
            weights = np.exp(logits)
            total = weights.sum()
            probabilities = weights / total
            entropy = -np.sum(probabilities * np.log(np.maximum(probabilities, _P_FLOOR)))
            error = entropy - target
            if abs(error) < _ENTROPY_TOL:
                break
            if error > 0:  # too flat: sharpen
                lo = beta
                beta = beta * 2 if hi == np.inf else (beta + hi) / 2
            else:
                hi = beta
                beta = (beta + lo) / 2
        conditional[i, np.arange(n) != i] = probabilities
    return conditional


def _kl_divergence(P: np.ndarray, Q: np.ndarray) -> float:
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


@dataclass
class TsneResult:
    embedding: np.ndarray
    kl_trace: list[tuple[int, float]]

    @property
    def final_kl(self) -> float:
        return self.kl_trace[-1][1]


def tsne_embed(
    matrix: np.ndarray,
    perplexity: float = 30.0,
    iterations: int = 1000,
    seed: int = 0,
    early_exaggeration: float = 12.0,
    exaggeration_iterations: int = 250,
    learning_rate: float | None = None,
) -> TsneResult:
    """Embed rows into 2-D; deterministic given ``seed``.

    The learning rate defaults to n / early_exaggeration. The KL divergence
    against the unexaggerated affinities is recorded every 10 iterations plus
    at the end of the exaggeration phase and the final iteration.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] < 4:
        raise ParameterError("t-SNE requires a 2-D matrix with at least 4 rows")
    if not np.isfinite(matrix).all():
        raise ParameterError("t-SNE requires finite input")
    n = matrix.shape[0]
    if perplexity <= 1:
        raise ParameterError("perplexity must exceed 1")
    if n <= 3 * perplexity:
        raise ParameterError(f"need n > 3*perplexity; got n={n}, perplexity={perplexity}")
    if iterations < 1:
        raise ParameterError("iterations must be >= 1")
    if learning_rate is None:
        learning_rate = n / early_exaggeration

    sq_distances = squareform(pdist(matrix, "sqeuclidean"))
    conditional = _conditional_probabilities(sq_distances, perplexity)
    P = (conditional + conditional.T) / (2.0 * n)
    P = np.maximum(P, _P_FLOOR)

    rng = np.random.default_rng(seed)
    Y = rng.normal(scale=1e-4, size=(n, 2))
    velocity = np.zeros_like(Y)
    gains = np.ones_like(Y)
    exaggeration_end = min(exaggeration_iterations, iterations)
    kl_trace: list[tuple[int, float]] = []

    for iteration in range(1, iterations + 1):
        exaggerate = iteration <= exaggeration_end
        P_eff = P * early_exaggeration if exaggerate else P

        sq_embed = squareform(pdist(Y, "sqeuclidean"))
        W = 1.0 / (1.0 + sq_embed)
        np.fill_diagonal(W, 0.0)
        Q = np.maximum(W / W.sum(), _P_FLOOR)

        PQ = (P_eff - Q) * W
        gradient = 4.0 * (np.diag(PQ.sum(axis=1)) - PQ) @ Y

        momentum = 0.5 if exaggerate else 0.8
        flipped = np.sign(gradient) != np.sign(velocity)
        gains = np.where(flipped, gains + 0.2, gains * 0.8)
        gains = np.maximum(gains, 0.01)
        velocity = momentum * velocity - learning_rate * gains * gradient
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)

        if iteration % 10 == 0 or iteration == exaggeration_end or iteration == iterations:
            kl_trace.append((iteration, _kl_divergence(P, Q)))

    return TsneResult(embedding=Y, kl_trace=kl_trace)


def write_embedding_csv(
    ids: Sequence[str],
    embedding: np.ndarray,
    labels: Sequence[int],
    path: str | Path,
) -> None:
    embedding = np.asarray(embedding)
    if not (len(ids) == embedding.shape[0] == len(labels)):
        raise ValueError("ids, embedding rows, and labels must align")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["household_id", "x", "y", "label"])
        for household_id, (x, y), label in zip(ids, embedding, labels):
            writer.writerow([household_id, str(float(x)), str(float(y)), int(label)])
