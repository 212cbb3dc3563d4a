"""Independent brute-force oracles used by the unit and acceptance tests.

Everything here is deliberately naive: exhaustive enumeration and direct
transcription of the index definitions, kept free of the package's own
implementations.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _one_hot_assignments(n: int, k: int) -> np.ndarray:
    """All k**n assignments as a (k**n, n, k) one-hot array."""
    combos = np.array(list(itertools.product(range(k), repeat=n)))
    one_hot = np.zeros((combos.shape[0], n, k))
    rows = np.arange(combos.shape[0])[:, None]
    cols = np.arange(n)[None, :]
    one_hot[rows, cols, combos] = 1.0
    return one_hot


def best_kmeans_objective(matrix: np.ndarray, k: int) -> float:
    """Exhaustive minimum of the sum of squared distances to cluster means."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    one_hot = _one_hot_assignments(n, k)
    counts = one_hot.sum(axis=1)  # (m, k)
    sums = np.einsum("mnk,nd->mkd", one_hot, matrix)
    total_sq = float((matrix**2).sum())
    safe_counts = np.where(counts == 0, 1.0, counts)
    reduction = ((sums**2).sum(axis=2) / safe_counts).sum(axis=1)
    return float((total_sq - reduction).min())


def best_kmedoids_objective(matrix: np.ndarray, k: int) -> tuple[float, tuple[int, ...]]:
    """Exhaustive minimum of summed Euclidean distance to the nearest medoid."""
    matrix = np.asarray(matrix, dtype=float)
    n = matrix.shape[0]
    distances = np.linalg.norm(matrix[:, None, :] - matrix[None, :, :], axis=2)
    best_cost = np.inf
    best_set: tuple[int, ...] = ()
    for medoids in itertools.combinations(range(n), k):
        cost = float(distances[:, medoids].min(axis=1).sum())
        if cost < best_cost - 1e-15:
            best_cost = cost
            best_set = medoids
    return best_cost, best_set


def direct_silhouette(matrix: np.ndarray, labels: np.ndarray) -> float:
    """Loop transcription of the silhouette definition; singletons score 0."""
    matrix = np.asarray(matrix, dtype=float)
    labels = np.asarray(labels)
    values = []
    for i in range(len(labels)):
        same = [j for j in range(len(labels)) if labels[j] == labels[i] and j != i]
        if not same:
            values.append(0.0)
            continue
        a = np.mean([np.linalg.norm(matrix[i] - matrix[j]) for j in same])
        b = min(
            np.mean([np.linalg.norm(matrix[i] - matrix[j]) for j in range(len(labels)) if labels[j] == other])
            for other in set(labels.tolist())
            if other != labels[i]
        )
        values.append((b - a) / max(a, b))
    return float(np.mean(values))


def direct_davies_bouldin(matrix: np.ndarray, labels: np.ndarray) -> float:
    matrix = np.asarray(matrix, dtype=float)
    labels = np.asarray(labels)
    clusters = sorted(set(labels.tolist()))
    centroids = {c: matrix[labels == c].mean(axis=0) for c in clusters}
    scatter = {
        c: np.mean([np.linalg.norm(x - centroids[c]) for x in matrix[labels == c]])
        for c in clusters
    }
    total = 0.0
    for i in clusters:
        worst = 0.0
        for j in clusters:
            if i == j:
                continue
            gap = np.linalg.norm(centroids[i] - centroids[j])
            mixed = scatter[i] + scatter[j]
            ratio = np.inf if gap == 0 and mixed > 0 else (0.0 if gap == 0 else mixed / gap)
            worst = max(worst, ratio)
        total += worst
    return float(total / len(clusters))


def direct_calinski_harabasz(matrix: np.ndarray, labels: np.ndarray) -> float:
    matrix = np.asarray(matrix, dtype=float)
    labels = np.asarray(labels)
    clusters = sorted(set(labels.tolist()))
    n, k = len(labels), len(clusters)
    overall = matrix.mean(axis=0)
    between = sum(
        (labels == c).sum() * float(np.linalg.norm(matrix[labels == c].mean(axis=0) - overall) ** 2)
        for c in clusters
    )
    within = sum(
        float(np.linalg.norm(x - matrix[labels == c].mean(axis=0)) ** 2)
        for c in clusters
        for x in matrix[labels == c]
    )
    return float(between / within * (n - k) / (k - 1))


def best_assignment_value(counts: np.ndarray) -> int:
    """Exhaustive maximum-sum injective matching value on a contingency table."""
    counts = np.asarray(counts)
    rows, cols = counts.shape
    if rows <= cols:
        return max(
            sum(int(counts[r, perm[r]]) for r in range(rows))
            for perm in itertools.permutations(range(cols), rows)
        )
    return max(
        sum(int(counts[perm[c], c]) for c in range(cols))
        for perm in itertools.permutations(range(rows), cols)
    )


def tree_conditional_expectation(tree, x, known: frozenset) -> float:
    """Path-dependent expected tree output with features in ``known`` fixed at x."""

    def walk(node: int) -> float:
        feature = int(tree.feature[node])
        if feature < 0:
            return float(tree.value[node])
        left, right = int(tree.left[node]), int(tree.right[node])
        if feature in known:
            child = left if x[feature] <= tree.threshold[node] else right
            return walk(child)
        weight_left = tree.cover[left] / tree.cover[node]
        weight_right = tree.cover[right] / tree.cover[node]
        return weight_left * walk(left) + weight_right * walk(right)

    return walk(0)


def shapley_bruteforce_tree(tree, x) -> dict[int, float]:
    """Exact Shapley values of one tree by subset enumeration over its own
    features (all other features are null players)."""
    import math

    used = sorted(set(int(f) for f in tree.feature if f >= 0))
    phi = {f: 0.0 for f in used}
    m = len(used)
    for f in used:
        rest = [g for g in used if g != f]
        for size in range(m):
            for subset in itertools.combinations(rest, size):
                weight = math.factorial(size) * math.factorial(m - size - 1) / math.factorial(m)
                with_f = tree_conditional_expectation(tree, x, frozenset(subset) | {f})
                without_f = tree_conditional_expectation(tree, x, frozenset(subset))
                phi[f] += weight * (with_f - without_f)
    return phi
