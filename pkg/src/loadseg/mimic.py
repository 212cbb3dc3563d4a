"""Classifier-mimic workflow: stratified splitting, per-class evaluation, and
SHAP attribution aggregation for the trained boosting model."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ParameterError
from .gbdt import GbdtModel, predict, predict_margins
from .treeshap import shap_values


@dataclass
class Split:
    train_idx: np.ndarray
    test_idx: np.ndarray
    unsplit_classes: list[int] = field(default_factory=list)


def split_train_test(labels: np.ndarray, ratio: float = 0.8, seed: int = 0) -> Split:
    """Stratified index split; deterministic given ``seed``.

    Per-class test counts follow largest-remainder rounding so the global
    test size is round(n * (1 - ratio)) while every class stays within one
    point of its exact proportion. Classes with fewer than 2 members cannot
    be stratified; they go wholly to train with a warning.
    """
    labels = np.asarray(labels, dtype=int)
    if not 0.0 < ratio < 1.0:
        raise ParameterError("ratio must lie in (0, 1)")
    n = len(labels)
    rng = np.random.default_rng(seed)
    classes = sorted(set(labels.tolist()))

    unsplit = [c for c in classes if (labels == c).sum() < 2]
    eligible = [c for c in classes if c not in unsplit]
    target = int(round(n * (1.0 - ratio)))

    raw = {c: (labels == c).sum() * (1.0 - ratio) for c in eligible}
    counts = {c: int(raw[c]) for c in eligible}
    capacity = {c: int((labels == c).sum()) - 1 for c in eligible}
    counts = {c: min(counts[c], capacity[c]) for c in eligible}
    leftover = target - sum(counts.values())
    by_remainder = sorted(
        eligible, key=lambda c: (-(raw[c] - int(raw[c])), -int((labels == c).sum()), c)
    )
    for c in by_remainder:
        if leftover <= 0:
            break
        if counts[c] < capacity[c]:
            counts[c] += 1
            leftover -= 1

    train_parts, test_parts = [], []
    for c in classes:
        members = np.nonzero(labels == c)[0]
        if c in unsplit:
            warnings.warn(f"class {c} has {len(members)} member(s); placed wholly in train")
            train_parts.append(members)
            continue
        order = rng.permutation(len(members))
        n_test = counts[c]
        test_parts.append(members[order[:n_test]])
        train_parts.append(members[order[n_test:]])

    train_idx = np.sort(np.concatenate(train_parts))
    test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.empty(0, dtype=int)
    return Split(train_idx=train_idx, test_idx=test_idx, unsplit_classes=unsplit)


@dataclass
class ClassScore:
    precision: float | None
    recall: float | None
    f1: float | None
    support: int


@dataclass
class ClassMetrics:
    classes: list[int]
    confusion: np.ndarray  # rows true, columns predicted
    per_class: dict[int, ClassScore]
    absent: list[int]

    @property
    def macro_f1(self) -> float:
        defined = [s.f1 for s in self.per_class.values() if s.f1 is not None]
        return float(np.mean(defined)) if defined else float("nan")

    @property
    def macro_precision(self) -> float:
        defined = [s.precision for s in self.per_class.values() if s.precision is not None]
        return float(np.mean(defined)) if defined else float("nan")

    @property
    def macro_recall(self) -> float:
        defined = [s.recall for s in self.per_class.values() if s.recall is not None]
        return float(np.mean(defined)) if defined else float("nan")

    @property
    def accuracy(self) -> float:
        total = self.confusion.sum()
        return float(np.trace(self.confusion) / total) if total else float("nan")


def metrics_from_predictions(
    y_true: np.ndarray, y_pred: np.ndarray, classes: Sequence[int]
) -> ClassMetrics:
    y_true = np.asarray(y_true, dtype=int)
    y_pred = np.asarray(y_pred, dtype=int)
    classes = sorted(classes)
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    for t, p in zip(y_true, y_pred):
        confusion[index[t], index[p]] += 1

    per_class: dict[int, ClassScore] = {}
    absent: list[int] = []
    for c in classes:
        i = index[c]
        support = int(confusion[i].sum())
        if support == 0:
            absent.append(c)
            continue
        tp = int(confusion[i, i])
        predicted = int(confusion[:, i].sum())
        precision = tp / predicted if predicted else None
        recall = tp / support
        f1 = None
        if precision is not None and (precision + recall) > 0:
            f1 = 2 * precision * recall / (precision + recall)
        elif precision is not None:
            f1 = 0.0
        per_class[c] = ClassScore(precision, recall, f1, support)
    return ClassMetrics(classes=classes, confusion=confusion, per_class=per_class, absent=absent)


def evaluate(model: GbdtModel, X_test: np.ndarray, y_test: np.ndarray) -> ClassMetrics:
    """Held-out per-class precision/recall/F1 from the confusion matrix."""
    y_test = np.asarray(y_test, dtype=int)
    if len(y_test) == 0:
        raise ParameterError("test set is empty")
    y_pred = predict(model, X_test)
    classes = sorted(set(model.classes) | set(y_test.tolist()))
    return metrics_from_predictions(y_test, y_pred, classes)


@dataclass
class Attribution:
    """Per-(point, class) SHAP vectors plus per-class mean-|value| rankings."""

    phi: np.ndarray  # (rows, classes, features)
    base: np.ndarray  # (classes,)
    classes: list[int]
    mean_abs: np.ndarray  # (classes, features)

    def ranking(self, class_index: int) -> np.ndarray:
        order = np.argsort(-self.mean_abs[class_index], kind="stable")
        return order

    def top_feature(self, class_index: int) -> int:
        return int(self.ranking(class_index)[0])


def shap_attribute(model: GbdtModel, X: np.ndarray) -> Attribution:
    """Exact tree-path SHAP for every point and class."""
    X = np.asarray(X, dtype=float)
    phi, base = shap_values(model, X)
    mean_abs = np.abs(phi).mean(axis=0)
    return Attribution(phi=phi, base=base, classes=list(model.classes), mean_abs=mean_abs)


def local_accuracy_error(model: GbdtModel, X: np.ndarray, attribution: Attribution) -> float:
    """Worst |base + sum(phi) - margin| over all (point, class) pairs."""
    margins = predict_margins(model, np.asarray(X, dtype=float))
    reconstructed = attribution.base[None, :] + attribution.phi.sum(axis=2)
    return float(np.abs(reconstructed - margins).max())


def fit_temperature(model: GbdtModel, X_val: np.ndarray, y_val: np.ndarray) -> float:
    """Optional calibration: temperature minimizing validation NLL (off by
    default in the pipeline; 1.0 means raw softmax)."""
    margins = predict_margins(model, np.asarray(X_val, dtype=float))
    index = {c: i for i, c in enumerate(model.classes)}
    targets = np.array([index[int(c)] for c in np.asarray(y_val)])

    def nll(log_t: float) -> float:
        scaled = margins / np.exp(log_t)
        shifted = scaled - scaled.max(axis=1, keepdims=True)
        log_probs = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
        return float(-log_probs[np.arange(len(targets)), targets].mean())

    result = minimize_scalar(nll, bounds=(np.log(0.05), np.log(20.0)), method="bounded")
    return float(np.exp(result.x))


def write_metrics_csv(metrics: ClassMetrics, path: str | Path) -> None:
    """Table of per-class precision/recall/F1 plus macro averages."""

    def fmt(value: float | None) -> str:
        return "" if value is None else str(value)

    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["class", "precision", "recall", "f1", "support"])
        for c in metrics.classes:
            if c in metrics.per_class:
                score = metrics.per_class[c]
                writer.writerow([c, fmt(score.precision), fmt(score.recall), fmt(score.f1), score.support])
            else:
                writer.writerow([c, "", "", "", 0])
        writer.writerow(
            ["macro", str(metrics.macro_precision), str(metrics.macro_recall), str(metrics.macro_f1), int(metrics.confusion.sum())]
        )


def write_attribution_csv(
    ids: Sequence[str],
    attribution: Attribution,
    feature_names: Sequence[str],
    path: str | Path,
) -> None:
    """Long format: one row per (household, class) with all feature columns."""
    n, n_classes, n_features = attribution.phi.shape
    if len(ids) != n or len(feature_names) != n_features:
        raise ValueError("ids/feature names do not match attribution shape")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["household_id", "class", "base", *feature_names])
        for i, household_id in enumerate(ids):
            for c in range(n_classes):
                writer.writerow(
                    [household_id, attribution.classes[c], str(float(attribution.base[c]))]
                    + [str(float(v)) for v in attribution.phi[i, c]]
                )


def write_ranking_json(
    attribution: Attribution, feature_names: Sequence[str], path: str | Path, top: int = 15
) -> None:
    payload = {}
    for c_index, c in enumerate(attribution.classes):
        order = attribution.ranking(c_index)[:top]
        payload[str(c)] = [
            {"feature": feature_names[f], "mean_abs_shap": float(attribution.mean_abs[c_index, f])}
            for f in order
        ]
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
