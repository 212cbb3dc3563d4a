"""Exact per-tree Shapley attributions via the path-weighting recursion.

Follows the polynomial-time TreeSHAP algorithm: the recursion tracks, for
every root-to-node path, the fraction of feature-subset weight flowing hot
(the instance's branch) and cold (the other branch, weighted by training
cover), and unwinds the path polynomial at each leaf. The background
distribution is the tree's own cover counts, so no explicit background
dataset is needed.

Rows sharing the same decision pattern over a tree's internal nodes receive
identical attributions, so the recursion runs once per distinct pattern and
results are scattered back to rows.
"""

from __future__ import annotations

import numpy as np

from .gbdt import GbdtModel, Tree

PathElement = list  # [feature, zero_fraction, one_fraction, pweight]


def _extend(path: list[PathElement], pz: float, po: float, pi: int) -> list[PathElement]:
    length = len(path)
    out = [element.copy() for element in path]
    out.append([pi, pz, po, 1.0 if length == 0 else 0.0])
    for i in range(length - 1, -1, -1):
        out[i + 1][3] += po * out[i][3] * (i + 1) / (length + 1)
        out[i][3] = pz * out[i][3] * (length - i) / (length + 1)
    return out


def _unwind(path: list[PathElement], index: int) -> list[PathElement]:
    last = len(path) - 1
    running = path[last][3]
    zero_fraction, one_fraction = path[index][1], path[index][2]
    out = [element.copy() for element in path[:last]]
    for j in range(last - 1, -1, -1):
        if one_fraction != 0.0:
            kept = out[j][3]
            out[j][3] = running * (last + 1) / ((j + 1) * one_fraction)
            running = kept - out[j][3] * zero_fraction * (last - j) / (last + 1)
        else:
            out[j][3] = out[j][3] * (last + 1) / (zero_fraction * (last - j))
    for j in range(index, last):
        out[j][0], out[j][1], out[j][2] = path[j + 1][0], path[j + 1][1], path[j + 1][2]
    return out


def _unwound_sum(path: list[PathElement], index: int) -> float:
    return sum(element[3] for element in _unwind(path, index))


def _recurse(
    tree: Tree,
    decisions: dict[int, bool],
    phi: np.ndarray,
    node: int,
    path: list[PathElement],
    pz: float,
    po: float,
    pi: int,
) -> None:
    path = _extend(path, pz, po, pi)
    if tree.feature[node] < 0:
        leaf_value = tree.value[node]
        for i in range(1, len(path)):
            weight = _unwound_sum(path, i)
            feature, zero_fraction, one_fraction, _ = path[i]
            phi[feature] += weight * (one_fraction - zero_fraction) * leaf_value
        return

    feature = int(tree.feature[node])
    left, right = int(tree.left[node]), int(tree.right[node])
    hot, cold = (left, right) if decisions[node] else (right, left)

    incoming_zero, incoming_one = 1.0, 1.0
    found = next((i for i in range(1, len(path)) if path[i][0] == feature), None)
    if found is not None:
        incoming_zero, incoming_one = path[found][1], path[found][2]
        path = _unwind(path, found)

    cover = tree.cover[node]
    _recurse(tree, decisions, phi, hot, path, incoming_zero * tree.cover[hot] / cover, incoming_one, feature)
    _recurse(tree, decisions, phi, cold, path, incoming_zero * tree.cover[cold] / cover, 0.0, feature)


def tree_expected_value(tree: Tree) -> float:
    """Cover-weighted mean leaf value."""
    leaves = tree.feature < 0
    return float((tree.value[leaves] * tree.cover[leaves]).sum() / tree.cover[0])


def shap_values_tree(tree: Tree, X: np.ndarray, n_features: int) -> np.ndarray:
    """Per-row SHAP values for a single tree, shape (rows, n_features)."""
    X = np.asarray(X, dtype=float)
    phi = np.zeros((X.shape[0], n_features))
    internal = np.nonzero(tree.feature >= 0)[0]
    if len(internal) == 0:
        return phi

    decision_matrix = X[:, tree.feature[internal]] <= tree.threshold[internal]
    patterns, inverse = np.unique(decision_matrix, axis=0, return_inverse=True)
    for pattern_id, pattern in enumerate(patterns):
        decisions = {int(node): bool(bit) for node, bit in zip(internal, pattern)}
        pattern_phi = np.zeros(n_features)
        _recurse(tree, decisions, pattern_phi, 0, [], 1.0, 1.0, -1)
        phi[inverse == pattern_id] = pattern_phi
    return phi


def shap_values(model: GbdtModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """SHAP values for every (row, class), plus per-class base values.

    Returns ``(phi, base)`` with ``phi`` of shape (rows, classes, features)
    and base such that ``base[c] + phi[i, c].sum()`` equals the raw margin of
    class c for row i.
    """
    X = np.asarray(X, dtype=float)
    n_features = X.shape[1]
    phi = np.zeros((X.shape[0], model.n_classes, n_features))
    base = np.array(model.base_margins, dtype=float, copy=True)
    for round_trees in model.trees:
        for c, tree in enumerate(round_trees):
            phi[:, c, :] += shap_values_tree(tree, X, n_features)
            base[c] += tree_expected_value(tree)
    return phi, base
