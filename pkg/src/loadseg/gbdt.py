"""Multiclass gradient-boosted regression trees with a softmax objective.

Per round, one regression tree per class is fitted to the gradient/hessian of
the multiclass cross-entropy (Newton boosting). Splits are exact greedy:
every feature's candidate thresholds are midpoints between consecutive
distinct sorted values, scored by the standard second-order gain. Training
is fully deterministic; the intended regime is near-perfect recall of the
training labels so the model mimics the clustering that produced them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParameterError


@dataclass
class Hyperparams:
    rounds: int = 200
    learning_rate: float = 0.1
    max_depth: int = 6
    min_leaf: int = 1
    reg_lambda: float = 1.0
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "rounds": self.rounds,
            "learning_rate": self.learning_rate,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "reg_lambda": self.reg_lambda,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperparams":
        return cls(**data)


@dataclass
class Tree:
    """Array-of-nodes regression tree; children are -1 at leaves."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    cover: np.ndarray  # training rows through each node

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, matrix: np.ndarray) -> np.ndarray:
        """Vectorized per-level routing; returns each row's leaf value."""
        nodes = np.zeros(matrix.shape[0], dtype=int)
        while True:
            internal = self.feature[nodes] >= 0
            if not internal.any():
                break
            idx = np.nonzero(internal)[0]
            at = nodes[idx]
            goes_left = matrix[idx, self.feature[at]] <= self.threshold[at]
            nodes[idx] = np.where(goes_left, self.left[at], self.right[at])
        return self.value[nodes]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "cover": self.cover.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Tree":
        return cls(
            feature=np.asarray(data["feature"], dtype=int),
            threshold=np.asarray(data["threshold"], dtype=float),
            left=np.asarray(data["left"], dtype=int),
            right=np.asarray(data["right"], dtype=int),
            value=np.asarray(data["value"], dtype=float),
            cover=np.asarray(data["cover"], dtype=float),
        )


class _TreeBuilder:
    def __init__(self, X: np.ndarray, grad: np.ndarray, hess: np.ndarray, params: Hyperparams):
        self.X = X
        self.grad = grad
        self.hess = hess
        self.params = params
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.cover: list[float] = []

    def _new_node(self, rows: np.ndarray) -> int:
        node = len(self.feature)
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        lam = self.params.reg_lambda
        g, h = self.grad[rows].sum(), self.hess[rows].sum()
        self.value.append(-self.params.learning_rate * g / (h + lam))
        self.cover.append(float(len(rows)))
        return node

    def _best_split(self, rows: np.ndarray) -> tuple[float, int, float] | None:
        X, min_leaf, lam = self.X[rows], self.params.min_leaf, self.params.reg_lambda
        m = len(rows)
        order = np.argsort(X, axis=0, kind="stable")
        sorted_vals = np.take_along_axis(X, order, axis=0)
        g_sorted = self.grad[rows][order]
        h_sorted = self.hess[rows][order]
        g_left = np.cumsum(g_sorted, axis=0)[:-1]
        h_left = np.cumsum(h_sorted, axis=0)[:-1]
        g_total, h_total = g_left[-1] + g_sorted[-1], h_left[-1] + h_sorted[-1]

        valid = sorted_vals[:-1] < sorted_vals[1:]
        counts = np.arange(1, m)[:, None]
        valid &= (counts >= min_leaf) & (m - counts >= min_leaf)
        if not valid.any():
            return None

        g_right = g_total[None, :] - g_left
        h_right = h_total[None, :] - h_left
        parent_score = (g_total**2) / (h_total + lam)
        gains = 0.5 * (
            g_left**2 / (h_left + lam) + g_right**2 / (h_right + lam) - parent_score[None, :]
        )
        gains[~valid] = -np.inf
        flat = int(gains.argmax())
        boundary, feat = divmod(flat, gains.shape[1])
        if gains[boundary, feat] <= 1e-12:
            return None
        cut = (sorted_vals[boundary, feat] + sorted_vals[boundary + 1, feat]) / 2.0
        return float(gains[boundary, feat]), int(feat), float(cut)

    def build(self) -> Tree:
        stack = [(self._new_node(np.arange(len(self.X))), np.arange(len(self.X)), 0)]
        while stack:
            node, rows, depth = stack.pop()
            if depth >= self.params.max_depth or len(rows) < 2 * self.params.min_leaf:
                continue
            found = self._best_split(rows)
            if found is None:
                continue
            _, feat, cut = found
            goes_left = self.X[rows, feat] <= cut
            left_rows, right_rows = rows[goes_left], rows[~goes_left]
            self.feature[node] = feat
            self.threshold[node] = cut
            left_id = self._new_node(left_rows)
            right_id = self._new_node(right_rows)
            self.left[node], self.right[node] = left_id, right_id
            stack.append((right_id, right_rows, depth + 1))
            stack.append((left_id, left_rows, depth + 1))
        return Tree(
            feature=np.asarray(self.feature, dtype=int),
            threshold=np.asarray(self.threshold, dtype=float),
            left=np.asarray(self.left, dtype=int),
            right=np.asarray(self.right, dtype=int),
            value=np.asarray(self.value, dtype=float),
            cover=np.asarray(self.cover, dtype=float),
        )


@dataclass
class GbdtModel:
    """Per-round, per-class trees plus base margins (log class priors).

    Raw score for class c = base_margin[c] + sum of c's tree outputs;
    probabilities are the softmax of the raw scores.
    """

    classes: list[int]
    base_margins: np.ndarray
    trees: list[list[Tree]]  # trees[round][class_index]
    hyperparams: Hyperparams
    feature_names: list[str] | None = None
    train_loss: list[float] = field(default_factory=list)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    def to_dict(self) -> dict:
        return {
            "classes": self.classes,
            "base_margins": self.base_margins.tolist(),
            "trees": [[tree.to_dict() for tree in round_trees] for round_trees in self.trees],
            "hyperparams": self.hyperparams.to_dict(),
            "feature_names": self.feature_names,
            "train_loss": self.train_loss,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GbdtModel":
        return cls(
            classes=[int(c) for c in data["classes"]],
            base_margins=np.asarray(data["base_margins"], dtype=float),
            trees=[[Tree.from_dict(t) for t in round_trees] for round_trees in data["trees"]],
            hyperparams=Hyperparams.from_dict(data["hyperparams"]),
            feature_names=data.get("feature_names"),
            train_loss=list(data.get("train_loss", [])),
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w") as handle:
            json.dump(self.to_dict(), handle, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "GbdtModel":
        with open(path) as handle:
            return cls.from_dict(json.load(handle))


def _softmax(margins: np.ndarray) -> np.ndarray:
    shifted = margins - margins.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def _log_loss(probabilities: np.ndarray, one_hot: np.ndarray) -> float:
    clipped = np.clip(probabilities, 1e-15, 1.0)
    return float(-(one_hot * np.log(clipped)).sum() / len(one_hot))


def train(
    X: np.ndarray,
    labels: np.ndarray,
    hyperparams: Hyperparams | None = None,
    feature_names: Sequence[str] | None = None,
) -> GbdtModel:
    """Fit the softmax boosting ensemble; deterministic given its inputs."""
    X = np.asarray(X, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ParameterError("training requires a non-empty 2-D matrix")
    if len(labels) != X.shape[0]:
        raise ParameterError("labels and matrix rows differ in length")
    params = hyperparams or Hyperparams()

    classes = sorted(set(labels.tolist()))
    class_index = {c: i for i, c in enumerate(classes)}
    n, C = X.shape[0], len(classes)
    names = list(feature_names) if feature_names is not None else None

    priors = np.array([(labels == c).sum() / n for c in classes])
    base = np.log(priors)
    model = GbdtModel(
        classes=classes,
        base_margins=base,
        trees=[],
        hyperparams=params,
        feature_names=names,
    )
    if C == 1:
        return model

    one_hot = np.zeros((n, C))
    one_hot[np.arange(n), [class_index[c] for c in labels]] = 1.0
    margins = np.tile(base, (n, 1))

    for _ in range(params.rounds):
        probabilities = _softmax(margins)
        round_trees: list[Tree] = []
        for c in range(C):
            grad = probabilities[:, c] - one_hot[:, c]
            hess = probabilities[:, c] * (1.0 - probabilities[:, c])
            tree = _TreeBuilder(X, grad, hess, params).build()
            margins[:, c] += tree.apply(X)
            round_trees.append(tree)
        model.trees.append(round_trees)
        model.train_loss.append(_log_loss(_softmax(margins), one_hot))
    return model


def predict_margins(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ParameterError("expected a 2-D matrix")
    margins = np.tile(model.base_margins, (X.shape[0], 1))
    for round_trees in model.trees:
        for c, tree in enumerate(round_trees):
            margins[:, c] += tree.apply(X)
    return margins


def predict_proba(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    """Softmax over raw margins; rows sum to 1 and entries are positive."""
    X = np.asarray(X, dtype=float)
    if model.n_classes == 1:
        return np.ones((X.shape[0], 1))
    expected = _expected_features(model)
    exact = model.feature_names is not None
    if (exact and X.shape[1] != expected) or (not exact and X.shape[1] < expected):
        raise ParameterError(f"model expects {expected} features, got {X.shape[1]}")
    return _softmax(predict_margins(model, X))


def predict(model: GbdtModel, X: np.ndarray) -> np.ndarray:
    """Class ids by argmax probability."""
    probabilities = predict_proba(model, X)
    return np.asarray(model.classes)[probabilities.argmax(axis=1)]


def _expected_features(model: GbdtModel) -> int:
    if model.feature_names is not None:
        return len(model.feature_names)
    top = 0
    for round_trees in model.trees:
        for tree in round_trees:
            if (tree.feature >= 0).any():
                top = max(top, int(tree.feature.max()) + 1)
    return top
