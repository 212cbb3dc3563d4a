import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from loadseg.features import (
    FEATURE_NAMES,
    N_FEATURES,
    PEAK_PERIODS,
    assemble_matrix,
    peak_features,
    read_features_csv,
    stat_features,
    write_features_csv,
)
from loadseg.ingest import LoadProfile

slots_strategy = st.lists(
    st.floats(0, 100, allow_nan=False), min_size=48, max_size=48
)


def test_periods_partition_the_day():
    covered = sorted(slot for period in PEAK_PERIODS.values() for slot in period)
    assert covered == list(range(48))


def test_peaks_constant_profile():
    assert peak_features([0.3] * 48).tolist() == [0.3] * 6


def test_peak_spike_in_early_morning():
    slots = np.full(48, 0.1)
    slots[14] = 5.0  # 07:00
    peaks = peak_features(slots)
    assert peaks.tolist() == [5.0, 0.1, 0.1, 0.1, 0.1, 0.1]


def test_peak_period_boundaries():
    slots = np.zeros(48)
    slots[19] = 2.0  # 09:30 -> early morning
    assert peak_features(slots).tolist() == [2.0, 0.0, 0.0, 0.0, 0.0, 0.0]
    slots = np.zeros(48)
    slots[20] = 2.0  # 10:00 -> morning
    assert peak_features(slots).tolist() == [0.0, 2.0, 0.0, 0.0, 0.0, 0.0]


@given(slots_strategy)
def test_peak_equals_bruteforce_max(slots):
    peaks = peak_features(slots)
    for value, period in zip(peaks, PEAK_PERIODS.values()):
        assert value == max(slots[i] for i in period)


def test_stats_constant_profile():
    stats = stat_features([2.5] * 48)
    assert stats[0] == 2.5  # mean
    assert stats[1] == 0.0  # std
    assert stats[2:].tolist() == [2.5] * 5


def test_stats_closed_form_ramp():
    stats = stat_features(np.arange(1.0, 49.0))
    assert stats[0] == 24.5
    assert stats[2] == 1.0
    assert stats[3] == 48.0


def test_stats_median_interpolates():
    slots = np.array([0.0, 1.0] * 24)
    assert stat_features(slots)[5] == 0.5


@given(slots_strategy)
def test_stats_quantile_chain(slots):
    stats = stat_features(slots)
    _, std, lo, hi, p25, p50, p75 = stats
    assert std >= 0.0
    assert lo <= p25 <= p50 <= p75 <= hi


def _profile(household_id, fill):
    return LoadProfile(household_id, tuple([fill] * 48), 1)


def test_assemble_shape_and_order():
    ids, matrix = assemble_matrix([_profile("B", 1.0), _profile("A", 0.5), _profile("C", 2.0)])
    assert ids == ["A", "B", "C"]
    assert matrix.shape == (3, 61)
    assert len(FEATURE_NAMES) == N_FEATURES == 61


def test_assemble_deterministic():
    profiles = [_profile("A", 0.5), _profile("B", 1.5)]
    first = assemble_matrix(profiles)[1]
    second = assemble_matrix(list(reversed(profiles)))[1]
    assert first.tobytes() == second.tobytes()


def test_assemble_empty():
    ids, matrix = assemble_matrix([])
    assert ids == []
    assert matrix.shape == (0, 61)


def test_features_csv_roundtrip(tmp_path):
    ids, matrix = assemble_matrix([_profile("A", 0.25), _profile("B", 0.75)])
    path = tmp_path / "features.csv"
    write_features_csv(ids, matrix, path)
    loaded_ids, loaded = read_features_csv(path)
    assert loaded_ids == ids
    np.testing.assert_array_equal(loaded, matrix)
    header = path.read_text().splitlines()[0].split(",")
    assert header == ["household_id", *FEATURE_NAMES]


def test_write_features_rejects_bad_shape(tmp_path):
    with pytest.raises(ValueError):
        write_features_csv(["A"], np.zeros((1, 60)), tmp_path / "x.csv")
