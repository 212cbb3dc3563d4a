"""Synthetic smart-meter population with a planted 7-cluster structure.

The generated population mirrors the shape of real residential data:

* one dominant low-consumption group whose households differ mostly in
  overall level (a near-1-D "volume" filament in feature space),
* four distinct peak-pattern groups (morning / noon / evening / night),
* two smaller groups that are each a mixture of two sub-populations, with a
  few households interpolating between sub-populations of *different*
  mixtures, so density-based methods chain across the mixtures while
  centroid/medoid methods keep each mixture whole.

Sub-population ids are returned alongside the coarse planted labels so tests
can check both the 7-cluster consensus level and the 9-cluster refinement
level. All randomness is driven by one seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .ingest import SLOTS_PER_DAY

# coarse planted cluster ids
BULK = 0
MORNING = 1
NOON = 2
EVENING = 3
NIGHT = 4
MIX_A = 5
MIX_B = 6

MIXTURES = (MIX_A, MIX_B)


def _bump(center_slot: float, width: float) -> np.ndarray:
    slots = np.arange(SLOTS_PER_DAY)
    return np.exp(-0.5 * ((slots - center_slot) / width) ** 2)


def _base_shape() -> np.ndarray:
    # mild residual daily rhythm shared by everyone
    return 0.12 + 0.05 * _bump(36, 6.0) + 0.03 * _bump(15, 5.0)


@dataclass
class FixtureSpec:
    """Knobs for the planted population; defaults are the tuned fixture."""

    n_bulk: int = 385
    bulk_level_range: tuple[float, float] = (0.60, 1.00)
    bulk_noise: float = 0.008

    pattern_sizes: tuple[int, int, int, int] = (77, 60, 55, 53)
    pattern_noise: float = 0.02
    pattern_amplitude: float = 1.3

    mixture_size: int = 35  # per mixture; split into sub-populations
    sub_fraction: float = 18 / 35
    mixture_noise: float = 0.02
    tail_points: int = 3  # interpolants per cross-link, drawn from each side

    days: int = 10
    day_noise: float = 0.01
    seed: int = 7


@dataclass
class Fixture:
    ids: list[str]
    profiles: np.ndarray  # (n, 48) average daily slot kWh
    planted: np.ndarray  # coarse 7-cluster labels
    subpopulation: np.ndarray  # 9-level labels (mixtures resolved)
    spec: FixtureSpec = field(repr=False, default_factory=FixtureSpec)


def _pattern_archetypes(amplitude: float) -> dict[int, np.ndarray]:
    # distinct base levels keep the bulk filament short relative to the
    # normalized column ranges (peaky households also consume more overall)
    base = _base_shape()
    return {
        MORNING: 1.5 * base + amplitude * _bump(15, 2.6),   # ~07:30
        NOON: 1.8 * base + amplitude * _bump(27, 2.6),      # ~13:30
        EVENING: 1.4 * base + amplitude * _bump(37, 2.6),   # ~18:30
        NIGHT: 2.0 * base + amplitude * _bump(45, 2.6),     # ~22:30
    }


def _mixture_archetypes(amplitude: float) -> dict[tuple[int, int], np.ndarray]:
    """Two mixtures, two sub-populations each.

    Mixture A holds double-peak households (morning + evening emphasis
    variants); mixture B holds broad mid-day households (early vs late
    plateau variants). Within a mixture the two variants are close; across
    mixtures they are farther apart than within.
    """
    base = _base_shape()
    scale = 0.85 * amplitude
    return {
        (MIX_A, 0): 1.7 * base + scale * (1.00 * _bump(14, 2.6) + 0.40 * _bump(37, 2.6)),
        (MIX_A, 1): 1.7 * base + scale * (0.40 * _bump(14, 2.6) + 1.00 * _bump(37, 2.6)),
        (MIX_B, 0): 1.6 * base + scale * (1.00 * _bump(21, 2.8) + 0.40 * _bump(31, 2.8)),
        (MIX_B, 1): 1.6 * base + scale * (0.40 * _bump(21, 2.8) + 1.00 * _bump(31, 2.8)),
    }


def generate_fixture(spec: FixtureSpec | None = None) -> Fixture:
    spec = spec or FixtureSpec()
    rng = np.random.default_rng(spec.seed)

    rows: list[np.ndarray] = []
    planted: list[int] = []
    subpop: list[int] = []

    base = _base_shape()

    # bulk: level filament
    levels = np.linspace(*spec.bulk_level_range, spec.n_bulk)
    for level in levels:
        profile = level * base + rng.normal(0.0, spec.bulk_noise, SLOTS_PER_DAY)
        rows.append(np.maximum(profile, 0.0))
        planted.append(BULK)
        subpop.append(BULK)

    patterns = _pattern_archetypes(spec.pattern_amplitude)
    for cluster, size in zip((MORNING, NOON, EVENING, NIGHT), spec.pattern_sizes):
        for _ in range(size):
            profile = patterns[cluster] + rng.normal(0.0, spec.pattern_noise, SLOTS_PER_DAY)
            rows.append(np.maximum(profile, 0.0))
            planted.append(cluster)
            subpop.append(cluster)

    mixtures = _mixture_archetypes(spec.pattern_amplitude)
    sub_ids = {(MIX_A, 0): 5, (MIX_A, 1): 6, (MIX_B, 0): 7, (MIX_B, 1): 8}
    n_sub0 = int(round(spec.mixture_size * spec.sub_fraction))
    tail_fractions = np.linspace(0.25, 0.75, spec.tail_points)

    for mixture in MIXTURES:
        for variant in (0, 1):
            size = n_sub0 if variant == 0 else spec.mixture_size - n_sub0
            archetype = mixtures[(mixture, variant)]
            # cross-link: the last `tail_points` households of each
            # sub-population blend toward the OTHER mixture's same variant
            other = mixtures[(MIX_B if mixture == MIX_A else MIX_A, variant)]
            for i in range(size):
                shape = archetype
                if i >= size - spec.tail_points:
                    f = tail_fractions[size - 1 - i] * 0.5  # stay on own side
                    shape = (1 - f) * archetype + f * other
                profile = shape + rng.normal(0.0, spec.mixture_noise, SLOTS_PER_DAY)
                rows.append(np.maximum(profile, 0.0))
                planted.append(mixture)
                subpop.append(sub_ids[(mixture, variant)])

    matrix = np.vstack(rows)
    n = matrix.shape[0]
    width = len(str(n))
    ids = [f"H{i:0{width}d}" for i in range(n)]
    return Fixture(
        ids=ids,
        profiles=matrix,
        planted=np.array(planted),
        subpopulation=np.array(subpop),
        spec=spec,
    )


def write_readings_csv(fixture: Fixture, path: str | Path) -> None:
    """Materialize the fixture as raw half-hourly readings.

    Each household contributes ``spec.days`` days whose slot values are the
    profile plus seeded day-level noise, so the ingest stage has real work to
    do and averaging reproduces the intended profiles closely.
    """
    spec = fixture.spec
    rng = np.random.default_rng(spec.seed + 1)
    start = datetime(2013, 1, 1)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["household_id", "timestamp", "energy_kwh"])
        for household_id, profile in zip(fixture.ids, fixture.profiles):
            for day in range(spec.days):
                noise = rng.normal(0.0, spec.day_noise, SLOTS_PER_DAY)
                values = np.maximum(profile + noise, 0.0)
                day_start = start + timedelta(days=day)
                for slot in range(SLOTS_PER_DAY):
                    stamp = day_start + timedelta(minutes=30 * slot)
                    writer.writerow(
                        [household_id, stamp.strftime("%Y-%m-%d %H:%M:%S"), str(float(values[slot]))]
                    )
