import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from landslide_risk import features as feat
from landslide_risk import hotspot as hs
from landslide_risk.catalog import DEFAULT_HMA_BBOX, BBox

from conftest import oracle_haversine

CLUSTER_IDS = {f"GLC-{1000 + k}" for k in range(8)}


def test_grid_counts():
    assert len(hs.make_grid(hs.GridSpec(BBox(0, 10, 0, 10), 1.0))) == 100
    (only,) = hs.make_grid(hs.GridSpec(BBox(10, 10.3, 20, 20.2), 1.0))
    assert (only.lat, only.lon) == pytest.approx((10.15, 20.1))
    assert len(hs.make_grid(hs.GridSpec(BBox(0, 2.5, 0, 2), 1.0))) == 6
    assert hs.GridSpec(BBox(0, 10, 0, 10), 0.1).shape == (100, 100)


def test_grid_row_major_midpoints():
    cells = hs.make_grid(hs.GridSpec(BBox(0, 2, 0, 3), 1.0))
    assert [(c.i, c.j) for c in cells][:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]
    assert (cells[4].lat, cells[4].lon) == (1.5, 1.5)


def test_invalid_spec():
    with pytest.raises(ValueError):
        hs.GridSpec(BBox(0, 1, 0, 1), 0.0)
    with pytest.raises(ValueError):
        hs.GridSpec(BBox(0, 0, 0, 1), 0.5)


@settings(max_examples=200)
@given(st.floats(24, 46), st.floats(60, 106), st.sampled_from([0.3, 0.5, 0.7, 1.0]))
def test_every_point_has_one_cell(lat, lon, cell):
    spec = hs.GridSpec(DEFAULT_HMA_BBOX, cell)
    i, j = spec.cell_index(lat, lon)
    n_lat, n_lon = spec.shape
    assert 0 <= i < n_lat and 0 <= j < n_lon
    lo, hi, wlo, whi = spec.cell_bounds(i, j)
    assert lo <= lat <= hi + 1e-9 and wlo <= lon <= whi + 1e-9


def test_score_cell_examples():
    c = (30.0, 80.0)
    assert hs.score_cell(c, [(40.0, 90.0)], [(0, 0, 1)]).risk == 0.0
    assert hs.score_cell(c, np.zeros((0, 2)), np.zeros((0, 3))).event_count == 0
    assert hs.score_cell(c, [c], [(0, 0, 1)]).risk == 1.0
    assert hs.score_cell(c, [c], [(0, 1, 0)]).risk == 0.5


def test_score_cell_weighting():
    c = (30.0, 80.0)
    near, far = (30.0, 80.1), (30.0, 80.3)
    d1, d2 = oracle_haversine(c, near), oracle_haversine(c, far)
    w1, w2 = 1 / (1 + d1), 1 / (1 + d2)
    cell = hs.score_cell(c, [near, far], [(0, 0, 1), (1, 0, 0)], event_ids=["a", "b"])
    assert cell.risk == pytest.approx(w1 / (w1 + w2), rel=1e-12)
    assert cell.event_ids == ("a", "b") and cell.event_count == 2


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**31))
def test_risk_bounded_and_monotone(n, seed):
    rng = np.random.default_rng(seed)
    pts = np.column_stack([30 + rng.uniform(-0.3, 0.3, n), 80 + rng.uniform(-0.3, 0.3, n)])
    probs = rng.dirichlet(np.ones(3), size=n)
    base = hs.score_cell((30, 80), pts, probs).risk
    assert 0.0 <= base <= 1.0
    k = rng.integers(n)
    moved = probs.copy()
    shift = moved[k, 0] * rng.uniform()
    moved[k, 0] -= shift
    moved[k, 2] += shift
    assert hs.score_cell((30, 80), pts, moved).risk >= base - 1e-15


def test_detect_examples():
    cells = [hs.HotspotCell(0, j, 0.0, float(j), 1, 0.0) for j in range(4)]
    assert hs.detect_hotspots(cells, 0.5)[0] == []
    cells += [hs.HotspotCell(1, 0, 1.0, 0.0, 0, 0.0)]
    hot, _ = hs.detect_hotspots(cells, 0.0)
    assert len(hot) == 4  # empty cell excluded


def test_detect_ordering_and_truncation():
    cells = [hs.HotspotCell(0, 0, 0, 0, 2, 0.7), hs.HotspotCell(0, 1, 0, 1, 5, 0.9),
             hs.HotspotCell(0, 2, 0, 2, 9, 0.7), hs.HotspotCell(0, 3, 0, 3, 1, 0.95)]
    hot, geo = hs.detect_hotspots(cells, 0.6, top_n=3)
    assert [(c.j) for c in hot] == [3, 1, 2]
    assert [f["properties"]["rank"] for f in geo["features"]] == [1, 2, 3]
    with pytest.raises(ValueError):
        hs.detect_hotspots(cells, 1.5)


def test_geojson_valid():
    spec = hs.GridSpec(BBox(0, 1, 10, 11), 0.5)
    cells = hs.score_grid(spec, [(0.25, 10.25)], [(0, 0, 1)], ["a"])
    hot, geo = hs.detect_hotspots(cells, 0.1)
    doc = json.loads(hs.dumps_geojson(geo))
    assert doc["type"] == "FeatureCollection"
    for feature in doc["features"]:
        assert feature["type"] == "Feature" and feature["geometry"]["type"] == "Polygon"
        ring = feature["geometry"]["coordinates"][0]
        assert ring[0] == ring[-1] and len(ring) == 5
        assert all(10 <= lon <= 11 and 0 <= lat <= 1 for lon, lat in ring)
        assert set(feature["properties"]) == {"risk", "event_count", "rank"}


def test_empty_region():
    spec = hs.GridSpec(BBox(40, 42, 100, 102), 0.5)
    cells = hs.score_grid(spec, [(28.0, 85.0)], [(0, 0, 1)], ["a"])
    assert all(c.risk == 0.0 and c.event_count == 0 for c in cells)
    assert hs.detect_hotspots(cells, 0.6)[0] == []


def _oracle_rank(records, probs, cell_deg=0.5, radius=50.0):
    """Hand-rolled scoring: loop over cells holding events, score by brute force."""
    b = DEFAULT_HMA_BBOX
    scored = []
    n_lat = math.ceil((b.lat_max - b.lat_min) / cell_deg)
    n_lon = math.ceil((b.lon_max - b.lon_min) / cell_deg)
    for i in range(n_lat):
        for j in range(n_lon):
            c = (b.lat_min + (i + 0.5) * cell_deg, b.lon_min + (j + 0.5) * cell_deg)
            num = den = 0.0
            ids = []
            for r, p in zip(records, probs):
                d = oracle_haversine(c, (r.latitude, r.longitude))
                if d <= radius:
                    w = 1 / (1 + d)
                    num += w * (p[2] + 0.5 * p[1])
                    den += w
                    ids.append(r.event_id)
            if ids:
                scored.append((-round(num / den, 9), -len(ids), i, j, set(ids)))
    return sorted(scored, key=lambda t: t[:4])


def test_cluster_ranks_first_with_label_probabilities(records):
    labels = feat.labels_from_scores(feat.risk_scores(records))
    probs = np.eye(3)[labels]
    coords = [(r.latitude, r.longitude) for r in records]
    cells = hs.score_grid(hs.GridSpec(), coords, probs, [r.event_id for r in records])
    hot, _ = hs.detect_hotspots(cells)
    oracle = _oracle_rank(records, probs)
    assert (hot[0].i, hot[0].j) == oracle[0][2:4] == (8, 50)
    assert set(hot[0].event_ids) == oracle[0][4] == CLUSTER_IDS
