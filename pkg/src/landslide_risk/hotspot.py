"""Grid sampling of model risk and hotspot ranking."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .catalog import DEFAULT_HMA_BBOX, BBox
from .spatial_graph import distance_matrix

DEFAULT_CELL_DEG = 0.5
DEFAULT_RADIUS_KM = 50.0
DEFAULT_THRESHOLD = 0.6
DEFAULT_TOP_N = 20
MEDIUM_WEIGHT = 0.5


@dataclass(frozen=True)
class GridSpec:
    bbox: BBox = DEFAULT_HMA_BBOX
    cell_deg: float = DEFAULT_CELL_DEG

    def __post_init__(self):
        b = self.bbox
        if not (b.lat_min < b.lat_max and b.lon_min < b.lon_max):
            raise ValueError("grid bbox must have lat_min < lat_max and lon_min < lon_max")
        if not self.cell_deg > 0:
            raise ValueError("cell_deg must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        b = self.bbox
        # round first so 10/0.1 does not become 101 cells
        n_lat = math.ceil(round((b.lat_max - b.lat_min) / self.cell_deg, 9))
        n_lon = math.ceil(round((b.lon_max - b.lon_min) / self.cell_deg, 9))
        return max(n_lat, 1), max(n_lon, 1)

    def cell_bounds(self, i: int, j: int) -> tuple[float, float, float, float]:
        """(lat_lo, lat_hi, lon_lo, lon_hi); the last row/column is clipped to the bbox."""
        b, c = self.bbox, self.cell_deg
        return (b.lat_min + i * c, min(b.lat_min + (i + 1) * c, b.lat_max),
                b.lon_min + j * c, min(b.lon_min + (j + 1) * c, b.lon_max))

    def cell_index(self, lat: float, lon: float) -> tuple[int, int]:
        """Cell holding a point inside the bbox (upper edges belong to the last cell)."""
        b = self.bbox
        if not b.contains(lat, lon):
            raise ValueError(f"point ({lat}, {lon}) outside grid bbox")
        n_lat, n_lon = self.shape
        i = min(int((lat - b.lat_min) // self.cell_deg), n_lat - 1)
        j = min(int((lon - b.lon_min) // self.cell_deg), n_lon - 1)
        return i, j


@dataclass(frozen=True)
class GridCell:
    i: int
    j: int
    lat: float
    lon: float
    bounds: tuple[float, float, float, float]


def make_grid(spec: GridSpec) -> list[GridCell]:
    """Cell centres in row-major (latitude-major) order."""
    n_lat, n_lon = spec.shape
    cells = []
    for i in range(n_lat):
        for j in range(n_lon):
            lo, hi, wlo, whi = spec.cell_bounds(i, j)
            cells.append(GridCell(i, j, (lo + hi) / 2, (wlo + whi) / 2, (lo, hi, wlo, whi)))
    return cells


@dataclass(frozen=True)
class HotspotCell:
    i: int
    j: int
    lat: float
    lon: float
    event_count: int
    risk: float
    event_ids: tuple[str, ...] = ()
    bounds: tuple[float, float, float, float] | None = field(default=None, compare=False)


def _cell_risk(dist_km, probs, radius_km):
    inside = dist_km <= radius_km
    if not inside.any():
        return 0.0, inside
    w = 1.0 / (1.0 + dist_km[inside])
    p = probs[inside]
    risk = float(np.sum(w * (p[:, 2] + MEDIUM_WEIGHT * p[:, 1])) / np.sum(w))
    return min(1.0, max(0.0, risk)), inside


def score_cell(center, events, probs, influence_radius_km: float = DEFAULT_RADIUS_KM,
               event_ids: Sequence[str] | None = None, cell=(0, 0), bounds=None) -> HotspotCell:
    """Inverse-distance-weighted High + half Medium probability within the radius.

    ``events`` is an ``(n, 2)`` array of (lat, lon); ``probs`` is ``(n, 3)``
    in Low/Medium/High order.
    """
    events = np.asarray(events, dtype=np.float64).reshape(-1, 2)
    probs = np.asarray(probs, dtype=np.float64).reshape(-1, 3)
    ids = list(event_ids) if event_ids is not None else [str(k) for k in range(len(events))]
    d = distance_matrix([center[0]], [center[1]], events[:, 0], events[:, 1])[0]
    risk, inside = _cell_risk(d, probs, influence_radius_km)
    chosen = tuple(ids[k] for k in np.flatnonzero(inside))
    return HotspotCell(cell[0], cell[1], float(center[0]), float(center[1]),
                       len(chosen), risk, chosen, bounds)


def score_grid(spec: GridSpec, events, probs, event_ids: Sequence[str],
               influence_radius_km: float = DEFAULT_RADIUS_KM) -> list[HotspotCell]:
    """Score every grid cell; empty cells are kept with risk 0."""
    cells = make_grid(spec)
    events = np.asarray(events, dtype=np.float64).reshape(-1, 2)
    probs = np.asarray(probs, dtype=np.float64).reshape(-1, 3)
    if not cells:
        return []
    lat = np.array([c.lat for c in cells])
    lon = np.array([c.lon for c in cells])
    dist = distance_matrix(lat, lon, events[:, 0], events[:, 1])
    out = []
    for c, d in zip(cells, dist):
        risk, inside = _cell_risk(d, probs, influence_radius_km)
        chosen = tuple(event_ids[k] for k in np.flatnonzero(inside))
        out.append(HotspotCell(c.i, c.j, c.lat, c.lon, len(chosen), risk, chosen, c.bounds))
    return out


RISK_DECIMALS = 12


def rank_key(cell: HotspotCell):
    """Risk (rounded, so summation noise cannot outrank a larger cell), then
    event count, then cell index."""
    return (-round(cell.risk, RISK_DECIMALS), -cell.event_count, cell.i, cell.j)


def detect_hotspots(cells: Sequence[HotspotCell], risk_threshold: float = DEFAULT_THRESHOLD,
                    top_n: int = DEFAULT_TOP_N) -> tuple[list[HotspotCell], dict]:
    """Nonempty cells with ``risk >= risk_threshold``, best first, plus a GeoJSON export."""
    if not 0.0 <= risk_threshold <= 1.0:
        raise ValueError("risk_threshold must be in [0, 1]")
    hot = [c for c in cells if c.event_count > 0 and c.risk >= risk_threshold]
    hot.sort(key=rank_key)
    hot = hot[:top_n]
    return hot, to_geojson(hot)


def to_geojson(hotspots: Sequence[HotspotCell]) -> dict:
    """FeatureCollection with one closed lon/lat polygon ring per hotspot."""
    features = []
    for rank, c in enumerate(hotspots, start=1):
        lo, hi, wlo, whi = c.bounds if c.bounds is not None else (c.lat, c.lat, c.lon, c.lon)
        ring = [[wlo, lo], [whi, lo], [whi, hi], [wlo, hi], [wlo, lo]]
        features.append({
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {"risk": c.risk, "event_count": c.event_count, "rank": rank},
        })
    return {"type": "FeatureCollection", "features": features}


def dumps_geojson(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"
