"""Feature extraction: 48 raw slots, six daily peak-period maxima, seven
statistical descriptors, for a fixed 61-column feature vector per household."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .ingest import SLOTS_PER_DAY, LoadProfile

# Half-open slot ranges [start, stop); slot = 2*hour + minute//30.
PEAK_PERIODS: dict[str, range] = {
    "early_morning": range(10, 20),  # 05:00-10:00
    "morning": range(20, 28),        # 10:00-14:00
    "noon": range(28, 34),           # 14:00-17:00
    "evening": range(34, 42),        # 17:00-21:00
    "night": range(42, 48),          # 21:00-24:00
    "late_night": range(0, 10),      # 00:00-05:00
}

STAT_NAMES = ("mean", "std", "min", "max", "p25", "p50", "p75")

SLOT_NAMES = tuple(f"slot_{i:02d}" for i in range(SLOTS_PER_DAY))
PEAK_NAMES = tuple(f"peak_{name}" for name in PEAK_PERIODS)
FEATURE_NAMES = SLOT_NAMES + PEAK_NAMES + tuple(f"stat_{name}" for name in STAT_NAMES)

N_FEATURES = len(FEATURE_NAMES)


def peak_features(slots: Sequence[float] | np.ndarray) -> np.ndarray:
    """Maximum slot value within each of the six daily periods."""
    values = np.asarray(slots, dtype=float)
    if values.shape != (SLOTS_PER_DAY,):
        raise ValueError(f"expected {SLOTS_PER_DAY} slots, got shape {values.shape}")
    return np.array([values[period].max() for period in PEAK_PERIODS.values()])


def stat_features(slots: Sequence[float] | np.ndarray) -> np.ndarray:
    """Population statistics over the 48 slots: mean, std, min, max, quartiles.

    Percentiles use linear interpolation between closest ranks.
    """
    values = np.asarray(slots, dtype=float)
    if values.shape != (SLOTS_PER_DAY,):
        raise ValueError(f"expected {SLOTS_PER_DAY} slots, got shape {values.shape}")
    p25, p50, p75 = np.percentile(values, [25, 50, 75])
    return np.array([values.mean(), values.std(), values.min(), values.max(), p25, p50, p75])


def feature_vector(profile: LoadProfile) -> np.ndarray:
    slots = np.asarray(profile.slots, dtype=float)
    return np.concatenate([slots, peak_features(slots), stat_features(slots)])


def assemble_matrix(profiles: Iterable[LoadProfile]) -> tuple[list[str], np.ndarray]:
    """Stack feature vectors into a households x 61 matrix.

    Rows follow sorted household id, so the same profile set always produces
    a bit-identical matrix. The matrix is raw; callers normalize afterwards.
    """
    ordered = sorted(profiles, key=lambda p: p.household_id)
    ids = [profile.household_id for profile in ordered]
    if not ordered:
        return ids, np.empty((0, N_FEATURES))
    return ids, np.vstack([feature_vector(profile) for profile in ordered])


def write_features_csv(ids: Sequence[str], matrix: np.ndarray, path: str | Path) -> None:
    """Persist the feature matrix with the documented 61-column header."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[1:] != (N_FEATURES,):
        raise ValueError(f"expected {N_FEATURES} feature columns, got {matrix.shape}")
    if len(ids) != matrix.shape[0]:
        raise ValueError("row ids and matrix rows differ in length")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["household_id", *FEATURE_NAMES])
        for household_id, row in zip(ids, matrix):
            writer.writerow([household_id] + [str(float(v)) for v in row])


def read_features_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, "r", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["household_id", *FEATURE_NAMES]:
            raise ValueError("feature CSV header does not match expected schema")
        ids = []
        rows = []
        for row in reader:
            if not row:
                continue
            ids.append(row[0])
            rows.append([float(v) for v in row[1:]])
    matrix = np.array(rows) if rows else np.empty((0, N_FEATURES))
    return ids, matrix
