import datetime as dt
import json

import pytest

from landslide_risk import catalog as cat
from landslide_risk.errors import CatalogFormatError, SchemaError

HEADER = ",".join(cat.COLUMNS) + "\n"


def _row(**kw):
    base = dict(event_id="E1", event_date="2015-07-01", latitude="28.0", longitude="84.0")
    base.update(kw)
    return ",".join(str(base.get(c, "")) for c in cat.COLUMNS) + "\n"


def test_fixture_counts(parsed):
    records, diags = parsed
    assert len(records) == 58
    assert len(diags) == 2
    assert len(records) + len(diags) == 60


def test_fixture_rejections_carry_row_and_reason(parsed):
    _, diags = parsed
    reasons = {d.event_id: d for d in diags}
    assert reasons["GLC-9000"].reason == "latitude out of range"
    assert "invalid date" in reasons["GLC-9001"].reason
    assert all(d.row >= 1 for d in diags)


def test_fixture_region_filter(records):
    assert len(records) == 55


def test_header_only(tmp_path):
    p = tmp_path / "empty.csv"
    p.write_text(HEADER)
    assert cat.parse_catalog(p) == ([], [])


def test_latitude_out_of_range(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text(HEADER + _row(latitude="91.0"))
    records, diags = cat.parse_catalog(p)
    assert records == []
    assert diags[0].reason == "latitude out of range"
    assert diags[0].row == 1


def test_missing_mandatory_column(tmp_path):
    p = tmp_path / "nolon.csv"
    p.write_text("event_id,event_date,latitude\nE1,2015-01-01,28\n")
    with pytest.raises(SchemaError, match="longitude"):
        cat.parse_catalog(p)


def test_unknown_format(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text(HEADER)
    with pytest.raises(CatalogFormatError):
        cat.parse_catalog(p, "xml")


def test_unreadable_file(tmp_path):
    with pytest.raises(OSError):
        cat.parse_catalog(tmp_path / "missing.csv")


def test_header_case_insensitive(tmp_path):
    p = tmp_path / "upper.csv"
    p.write_text("EVENT_ID,Event_Date,LATITUDE,Longitude\nE1,2015-01-01,28,84\n")
    records, _ = cat.parse_catalog(p)
    assert records[0].event_id == "E1"


def test_date_formats_and_missing_counts(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text(HEADER + _row(event_date="07/04/2016", fatality_count="", injury_count="3"))
    (r,), _ = cat.parse_catalog(p)
    assert r.event_date == dt.date(2016, 7, 4)
    assert (r.fatality_count, r.fatality_missing) == (0, True)
    assert (r.injury_count, r.injury_missing) == (3, False)


def test_negative_count_rejected(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text(HEADER + _row(fatality_count="-1"))
    assert cat.parse_catalog(p)[1][0].reason == "fatality_count negative"


def test_duplicate_event_id_rejected(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text(HEADER + _row() + _row())
    records, diags = cat.parse_catalog(p)
    assert len(records) == 1 and diags[0].reason == "duplicate event_id"


def test_unknown_enums_kept():
    assert cat.parse_size("Huge") is cat.LandslideSize.UNKNOWN
    assert cat.parse_size("Very Large") is cat.LandslideSize.VERY_LARGE
    assert cat.parse_accuracy("") is cat.LocationAccuracy.UNKNOWN
    assert cat.parse_accuracy("5 km") is cat.LocationAccuracy.KM5


def test_json_format(tmp_path, records):
    p = tmp_path / "c.json"
    p.write_text(json.dumps([{"event_id": "J1", "event_date": "2010-05-05",
                              "latitude": 30.5, "longitude": 80.25, "fatality_count": 2}]))
    (r,), diags = cat.parse_catalog(p)
    assert diags == [] and r.latitude == 30.5 and r.fatality_count == 2


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_round_trip(tmp_path, parsed, fmt):
    records, _ = parsed
    p = tmp_path / f"rt.{fmt}"
    cat.write_catalog(records, p, fmt)
    again, diags = cat.parse_catalog(p)
    assert diags == []
    assert again == records


def test_filter_region_examples():
    a = cat.EventRecord("a", dt.date(2010, 1, 1), 28.0, 84.0)
    b = cat.EventRecord("b", dt.date(2010, 1, 1), 10.0, 84.0)
    assert cat.filter_region([a, b], cat.BBox(20, 40, 60, 105)) == [a]
    assert cat.filter_region([a, b], cat.GLOBE) == [a, b]


def test_filter_region_subset_and_order(parsed):
    records, _ = parsed
    box = cat.BBox(26, 32, 75, 90)
    kept = cat.filter_region(records, box)
    assert all(box.contains(r.latitude, r.longitude) for r in kept)
    positions = [records.index(r) for r in kept]
    assert positions == sorted(positions)


def test_inverted_bbox():
    with pytest.raises(ValueError):
        cat.BBox(40, 20, 60, 105)


def test_stats_empty_and_single():
    s = cat.compute_stats([])
    assert s.empty and s.n_events == 0 and s.bbox is None and s.date_range is None
    r = cat.EventRecord("a", dt.date(2010, 1, 2), 28.5, 84.5)
    s = cat.compute_stats([r])
    assert s.bbox == cat.BBox(28.5, 28.5, 84.5, 84.5)
    assert s.date_range == (dt.date(2010, 1, 2),) * 2
    assert s.n_sources == 0 and s.n_gazetteer == 1 and s.n_profiles == 1


def test_stats_consistent(records):
    s = cat.compute_stats(records)
    assert s.n_events == len(records)
    assert s.bbox.lat_min <= s.bbox.lat_max and s.bbox.lon_min <= s.bbox.lon_max
