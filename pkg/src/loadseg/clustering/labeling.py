"""Cluster assignment container and persistence shared by all algorithms."""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

NOISE = -1


@dataclass
class Labeling:
    """One algorithm's cluster assignment for every matrix row.

    Non-noise labels are contiguous integers from 0; DBSCAN noise is -1.
    ``objective`` carries the cost J for the two objective-driven algorithms.
    """

    algorithm: str
    params: dict = field(default_factory=dict)
    labels: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    objective: float | None = None

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=int)

    @property
    def n_clusters(self) -> int:
        return int(len(set(self.labels.tolist()) - {NOISE}))

    @property
    def noise_fraction(self) -> float:
        if len(self.labels) == 0:
            return 0.0
        return float((self.labels == NOISE).sum() / len(self.labels))

    def params_hash(self) -> str:
        payload = json.dumps(self.params, sort_keys=True, default=str)
        return hashlib.sha256(f"{self.algorithm}:{payload}".encode()).hexdigest()[:12]


def canonicalize(labels: np.ndarray) -> np.ndarray:
    """Renumber non-noise labels to contiguous ints by order of first appearance."""
    labels = np.asarray(labels, dtype=int)
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, label in enumerate(labels):
        if label == NOISE:
            out[i] = NOISE
            continue
        if label not in mapping:
            mapping[label] = len(mapping)
        out[i] = mapping[label]
    return out


def write_labels_csv(
    ids: Sequence[str], labelings: Iterable[Labeling], path: str | Path
) -> None:
    """Long-format CSV: one row per (household, labeling)."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["household_id", "algorithm", "params_hash", "label"])
        for labeling in labelings:
            if len(labeling.labels) != len(ids):
                raise ValueError(
                    f"{labeling.algorithm} labeling has {len(labeling.labels)} labels "
                    f"for {len(ids)} ids"
                )
            digest = labeling.params_hash()
            for household_id, label in zip(ids, labeling.labels):
                writer.writerow([household_id, labeling.algorithm, digest, int(label)])


def write_run_manifest(labelings: Iterable[Labeling], path: str | Path) -> None:
    """JSON manifest of the clustering runs: params, seeds, objectives."""
    payload = [
        {
            "algorithm": labeling.algorithm,
            "params": labeling.params,
            "params_hash": labeling.params_hash(),
            "n_clusters": labeling.n_clusters,
            "noise_fraction": labeling.noise_fraction,
            "objective": labeling.objective,
        }
        for labeling in labelings
    ]
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, default=str)
        handle.write("\n")
