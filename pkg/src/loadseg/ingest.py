"""Raw smart-meter ingestion: parsing, cleaning, profile building, scaling.

Readings arrive as delimited text with one row per (household, half-hour
timestamp). Households are condensed to an average daily profile of 48
half-hour slots. Assembled matrices are scaled per column to [0, 1] with
min-max bounds that can be frozen and re-applied to unseen households.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import date, datetime
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from .errors import SchemaError

SLOTS_PER_DAY = 48


@dataclass(frozen=True)
class MeterReading:
    """One half-hourly energy reading for one household."""

    household_id: str
    timestamp: datetime
    energy_kwh: float


@dataclass(frozen=True)
class LoadProfile:
    """A household's average daily consumption over 48 half-hour slots.

    Slot i covers local time [i*30min, (i+1)*30min), slot 0 starting at 00:00.
    """

    household_id: str
    slots: tuple[float, ...]
    day_count: int

    def __post_init__(self) -> None:
        if len(self.slots) != SLOTS_PER_DAY:
            raise ValueError(f"expected {SLOTS_PER_DAY} slots, got {len(self.slots)}")


@dataclass(frozen=True)
class ReadingSchema:
    """Maps raw file columns onto reading fields."""

    id_column: str = "household_id"
    timestamp_column: str = "timestamp"
    value_column: str = "energy_kwh"
    delimiter: str = ","


@dataclass
class ParseResult:
    readings: list[MeterReading] = field(default_factory=list)
    total_rows: int = 0
    rejected: int = 0
    reject_samples: list[str] = field(default_factory=list)


_MAX_REJECT_SAMPLES = 5


def _parse_timestamp(text: str) -> datetime | None:
    """Parse ISO-8601 or ``YYYY-MM-DD HH:MM:SS`` timestamps.

    Trailing fractional seconds (any width) are tolerated only when zero;
    sub-second precision is meaningless at half-hour resolution.
    """
    raw = text.strip()
    if "." in raw:
        raw, _, fraction = raw.partition(".")
        if fraction.strip("0"):
            return None
    try:
        return datetime.fromisoformat(raw)
    except ValueError:
        return None


def parse_readings(source: IO[str] | str | Path, schema: ReadingSchema | None = None) -> ParseResult:
    """Read delimited text with a header row into meter readings.

    Unparseable rows (bad timestamp, non-numeric value, missing fields) are
    counted and sampled in the result, never fatal. A missing required column
    raises :class:`SchemaError`; an empty body yields an empty result.
    """
    schema = schema or ReadingSchema()
    if isinstance(source, (str, Path)):
        with open(source, "r", newline="") as handle:
            return parse_readings(handle, schema)

    reader = csv.reader(source, delimiter=schema.delimiter)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("source has no header row") from None
    header = [column.strip() for column in header]

    indices = {}
    for column in (schema.id_column, schema.timestamp_column, schema.value_column):
        if column not in header:
            raise SchemaError(f"required column {column!r} not found in header {header}")
        indices[column] = header.index(column)
    id_idx = indices[schema.id_column]
    ts_idx = indices[schema.timestamp_column]
    value_idx = indices[schema.value_column]
    width = max(id_idx, ts_idx, value_idx) + 1

    result = ParseResult()

    def reject(row_number: int, reason: str) -> None:
        result.rejected += 1
        if len(result.reject_samples) < _MAX_REJECT_SAMPLES:
            result.reject_samples.append(f"row {row_number}: {reason}")

    for row_number, row in enumerate(reader, start=2):
        if not row:
            continue
        result.total_rows += 1
        if len(row) < width:
            reject(row_number, f"expected at least {width} fields, got {len(row)}")
            continue
        household_id = row[id_idx].strip()
        if not household_id:
            reject(row_number, "empty household id")
            continue
        timestamp = _parse_timestamp(row[ts_idx])
        if timestamp is None:
            reject(row_number, f"bad timestamp {row[ts_idx]!r}")
            continue
        try:
            energy = float(row[value_idx])
        except ValueError:
            reject(row_number, f"non-numeric value {row[value_idx]!r}")
            continue
        result.readings.append(MeterReading(household_id, timestamp, energy))

    return result


def _is_half_hour(ts: datetime) -> bool:
    return ts.minute in (0, 30) and ts.second == 0 and ts.microsecond == 0


def clean(readings: Iterable[MeterReading]) -> list[MeterReading]:
    """Drop erroneous readings and collapse duplicate (household, timestamp) pairs.

    Erroneous means non-finite, negative, or mistimed (not on a half-hour
    boundary). Duplicates collapse to their arithmetic mean. Output is sorted
    by (household, timestamp); the operation is idempotent.
    """
    groups: dict[tuple[str, datetime], list[float]] = {}
    for reading in readings:
        if not math.isfinite(reading.energy_kwh) or reading.energy_kwh < 0:
            continue
        if not _is_half_hour(reading.timestamp):
            continue
        groups.setdefault((reading.household_id, reading.timestamp), []).append(reading.energy_kwh)

    return [
        MeterReading(household_id, timestamp, sum(values) / len(values))
        for (household_id, timestamp), values in sorted(groups.items())
    ]


def filter_by_date(
    readings: Iterable[MeterReading],
    mode: str = "all",
    start: date | None = None,
    end: date | None = None,
) -> list[MeterReading]:
    """Restrict readings by calendar rule before profiling.

    ``mode`` is one of ``all``, ``weekday``, ``weekend``; ``start``/``end``
    bound the date range inclusively.
    """
    if mode not in ("all", "weekday", "weekend"):
        raise ValueError(f"unknown date filter mode {mode!r}")
    kept = []
    for reading in readings:
        day = reading.timestamp.date()
        if start is not None and day < start:
            continue
        if end is not None and day > end:
            continue
        weekday = day.weekday() < 5
        if mode == "weekday" and not weekday:
            continue
        if mode == "weekend" and weekday:
            continue
        kept.append(reading)
    return kept


def build_profiles(readings: Iterable[MeterReading]) -> tuple[list[LoadProfile], list[str]]:
    """Average each household's readings into a 48-slot daily profile.

    slots[i] is the mean over all days of the readings falling in slot i.
    Households with no data at all in some slot are dropped and returned in
    the second element. Insensitive to input order.
    """
    by_household: dict[str, list[MeterReading]] = {}
    for reading in readings:
        by_household.setdefault(reading.household_id, []).append(reading)

    profiles = []
    dropped = []
    for household in sorted(by_household):
        # accumulate in timestamp order so float sums are permutation-exact
        ordered = sorted(by_household[household], key=lambda r: r.timestamp)
        sums = np.zeros(SLOTS_PER_DAY)
        counts = np.zeros(SLOTS_PER_DAY, dtype=int)
        days: set[date] = set()
        for reading in ordered:
            slot = reading.timestamp.hour * 2 + reading.timestamp.minute // 30
            sums[slot] += reading.energy_kwh
            counts[slot] += 1
            days.add(reading.timestamp.date())
        if (counts == 0).any():
            dropped.append(household)
            continue
        slots = sums / counts
        profiles.append(LoadProfile(household, tuple(float(v) for v in slots), len(days)))
    return profiles, dropped


@dataclass(frozen=True)
class ColumnBounds:
    """Per-column min/max learned by :func:`normalize_columns`."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    def to_dict(self) -> dict:
        return {"mins": list(self.mins), "maxs": list(self.maxs)}

    @classmethod
    def from_dict(cls, data: dict) -> "ColumnBounds":
        return cls(tuple(data["mins"]), tuple(data["maxs"]))


def normalize_columns(
    matrix: np.ndarray, bounds: ColumnBounds | None = None
) -> tuple[np.ndarray, ColumnBounds]:
    """Min-max scale each column to [0, 1]; constant columns map to zero.

    When ``bounds`` is given the stored transform is applied unchanged, so
    unseen rows land in the training feature space (values outside the
    training range fall outside [0, 1] and are intentionally not clipped).
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.isfinite(matrix).all():
        raise ValueError("matrix contains non-finite values")

    if bounds is None:
        if matrix.shape[0] == 0:
            empty = tuple([0.0] * matrix.shape[1])
            return matrix.copy(), ColumnBounds(empty, empty)
        mins = matrix.min(axis=0)
        maxs = matrix.max(axis=0)
        bounds = ColumnBounds(tuple(float(v) for v in mins), tuple(float(v) for v in maxs))
    else:
        mins = np.asarray(bounds.mins)
        maxs = np.asarray(bounds.maxs)
        if len(bounds.mins) != matrix.shape[1]:
            raise ValueError(
                f"bounds cover {len(bounds.mins)} columns, matrix has {matrix.shape[1]}"
            )

    span = maxs - mins
    constant = span == 0
    safe_span = np.where(constant, 1.0, span)
    scaled = (matrix - mins) / safe_span
    scaled[:, constant] = 0.0
    return scaled, bounds


def write_profiles_csv(profiles: Iterable[LoadProfile], path: str | Path) -> None:
    """Persist profiles as CSV: household_id plus 48 slot columns."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["household_id"] + [f"slot_{i:02d}" for i in range(SLOTS_PER_DAY)])
        for profile in profiles:
            writer.writerow([profile.household_id] + [str(v) for v in profile.slots])


def read_profiles_csv(path: str | Path) -> list[LoadProfile]:
    """Load profiles written by :func:`write_profiles_csv`.

    The CSV carries no day_count; loaded profiles report 1. Raises
    :class:`SchemaError` when the header does not match.
    """
    expected = ["household_id"] + [f"slot_{i:02d}" for i in range(SLOTS_PER_DAY)]
    profiles = []
    with open(path, "r", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != expected:
            missing = set(expected) - set(header or [])
            detail = f"; missing columns: {sorted(missing)}" if missing else ""
            raise SchemaError(f"profile CSV header does not match expected schema{detail}")
        for row in reader:
            if not row:
                continue
            profiles.append(LoadProfile(row[0], tuple(float(v) for v in row[1:49]), 1))
    return profiles


def write_profiles_json(profiles: Iterable[LoadProfile], path: str | Path) -> None:
    payload = [
        {
            "household_id": profile.household_id,
            "slots": list(profile.slots),
            "day_count": profile.day_count,
        }
        for profile in profiles
    ]
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
