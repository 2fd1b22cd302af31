import io

import pytest
from hypothesis import given, settings, strategies as st

from crowdlens.ingest import (CallIndex, IngestError, inter_call_gap_histogram,
                              load_antennas, load_calls, load_calls_auto,
                              write_calls_csv)
from crowdlens.model import Call, TimeGrid, grid_index_of

GRID = TimeGrid(origin=1325462400, n_steps=48)

ANTENNAS = b"antenna_id,longitude,latitude\na1,-4.02,5.32\na2,-4.01,5.33\n"


def registry():
    return load_antennas(io.BytesIO(ANTENNAS))


def test_load_antennas_two_rows():
    reg = registry()
    assert len(reg) == 2
    assert reg["a1"].lon == -4.02


def test_latitude_out_of_range_is_an_error_with_line_number():
    data = b"antenna_id,longitude,latitude\na1,-4.02,95\n"
    with pytest.raises(IngestError, match="line 2"):
        load_antennas(io.BytesIO(data))


def test_header_only_file_is_rejected():
    with pytest.raises(IngestError, match="no antennas"):
        load_antennas(io.BytesIO(b"antenna_id,longitude,latitude\n"))


def test_duplicate_antenna_id_is_rejected():
    data = ANTENNAS + b"a1,-4.0,5.0\n"
    with pytest.raises(IngestError, match="a1"):
        load_antennas(io.BytesIO(data))


CALLS = (b"user_id,timestamp,antenna_id\n"
         b"u1,2012-01-02T00:10:00Z,a1\n"
         b"u2,2012-01-02T01:20:00Z,a2\n"
         b"u1,2012-01-02T02:05:00Z,a1\n")


def test_three_valid_rows_all_admitted():
    calls, index, report = load_calls(io.BytesIO(CALLS), registry(), GRID)
    assert report.admitted == 3
    assert len(calls) == 3
    assert index.total_observations == 3


def test_unknown_antenna_is_skipped_and_counted():
    data = CALLS + b"u3,2012-01-02T03:00:00Z,zz\n"
    calls, _, report = load_calls(io.BytesIO(data), registry(), GRID)
    assert report.admitted == 3
    assert report.unknown_antenna == 1
    assert all(c.antenna_id != "zz" for c in calls)


def test_malformed_rows_are_skipped_not_fatal():
    data = CALLS + b"u4,not-a-time,a1\nu5,2012-01-02T99:00:00Z,a1\n"
    _, _, report = load_calls(io.BytesIO(data), registry(), GRID)
    assert report.admitted == 3
    assert report.malformed == 2


def test_out_of_range_rows_are_counted():
    data = b"user_id,timestamp,antenna_id\nu1,2030-01-01T00:00:00Z,a1\n"
    _, _, report = load_calls(io.BytesIO(data), registry(), GRID)
    assert report.admitted == 0
    assert report.out_of_range == 1


def test_split_day_time_compatibility_form():
    data = (b"user_id,date,time,antenna_id\n"
            b"u1,2012-01-02,00:10:00,a1\n")
    calls, _, report = load_calls(io.BytesIO(data), registry(), GRID)
    assert report.admitted == 1
    assert calls[0].at == 1325462400 + 600


def test_boundary_call_is_indexed_under_both_windows():
    data = b"user_id,timestamp,antenna_id\nu1,2012-01-02T00:30:00Z,a1\n"
    _, index, report = load_calls(io.BytesIO(data), registry(), GRID)
    assert report.admitted == 1
    assert index.total_observations == 2
    assert index.observation_count(0, "a1", "u1") == 1
    assert index.observation_count(1, "a1", "u1") == 1


def test_round_trip_preserves_the_index():
    calls, index, _ = load_calls(io.BytesIO(CALLS), registry(), GRID)
    buf = io.BytesIO()
    write_calls_csv(calls, buf)
    calls2, index2, report2 = load_calls(io.BytesIO(buf.getvalue()), registry(), GRID)
    assert report2.admitted == len(calls)
    assert calls2 == calls
    assert index2 == index


def test_report_json_shape():
    _, _, report = load_calls(io.BytesIO(CALLS), registry(), GRID)
    import json
    payload = json.loads(report.to_json())
    assert payload == {"admitted": 3, "unknown_antenna": 0,
                       "out_of_range": 0, "malformed": 0}


def test_load_calls_auto_derives_a_covering_grid():
    calls, index, report, grid = load_calls_auto(io.BytesIO(CALLS), registry())
    assert report.admitted == 3
    assert grid.origin == 1325462400
    assert all(grid_index_of(c.at, grid) for c in calls)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["u1", "u2", "u3"]),
                          st.integers(min_value=0, max_value=47 * 3600),
                          st.sampled_from(["a1", "a2"])),
                max_size=40))
def test_observation_totals_identity(rows):
    grid = TimeGrid(origin=0, n_steps=48)
    index = CallIndex.empty(grid)
    calls = [Call(u, at, a) for u, at, a in rows]
    expected = 0
    for call in calls:
        indices = grid_index_of(call.at, grid)
        expected += len(indices)
        for t in indices:
            index.add(t, call.antenna_id, call.user_id, call.at)
    total = sum(count for per_t in index.per_t
                for users in per_t.values()
                for count, _ in users.values())
    assert total == expected == index.total_observations


def test_gap_histogram_regular_hourly_calls():
    calls = [Call("u1", h * 3600, "a1") for h in (0, 1, 2)]
    assert inter_call_gap_histogram(calls) == {1: 1.0}


def test_gap_histogram_two_buckets():
    calls = [Call("u1", h * 3600, "a1") for h in (0, 1, 3)]
    assert inter_call_gap_histogram(calls) == {1: 0.5, 2: 0.5}


def test_gap_histogram_empty_without_pairs():
    assert inter_call_gap_histogram([Call("u1", 0, "a1")]) == {}


def test_gap_histogram_fractions_sum_to_one():
    calls = [Call("u1", at, "a1") for at in (0, 100, 4000, 9000, 30000)]
    hist = inter_call_gap_histogram(calls)
    assert abs(sum(hist.values()) - 1.0) < 1e-9
