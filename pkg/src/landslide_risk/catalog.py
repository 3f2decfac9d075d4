"""Landslide catalog ingestion: parsing, validation, regional filtering, stats."""
from __future__ import annotations

import csv
import datetime as dt
import enum
import io
import json
import os
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import CatalogFormatError, SchemaError

COLUMNS = (
    "event_id", "event_date", "submitted_date", "latitude", "longitude",
    "location_description", "location_accuracy", "fatality_count", "injury_count",
    "event_title", "event_description", "landslide_size", "trigger",
    "source_name", "source_link",
)
MANDATORY = ("event_id", "event_date", "latitude", "longitude")


class LocationAccuracy(str, enum.Enum):
    EXACT = "exact"
    KM1 = "1km"
    KM5 = "5km"
    KM10 = "10km"
    KM25 = "25km"
    KM50 = "50km"
    UNKNOWN = "unknown"


class LandslideSize(str, enum.Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"
    VERY_LARGE = "very_large"
    CATASTROPHIC = "catastrophic"
    UNKNOWN = "unknown"

    @property
    def rank(self) -> int:
        """Ordinal 0..4 for known sizes; ``unknown`` ranks 0."""
        return _SIZE_RANK[self]


_SIZE_RANK = {
    LandslideSize.SMALL: 0, LandslideSize.MEDIUM: 1, LandslideSize.LARGE: 2,
    LandslideSize.VERY_LARGE: 3, LandslideSize.CATASTROPHIC: 4, LandslideSize.UNKNOWN: 0,
}


@dataclass(frozen=True)
class BBox:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def __post_init__(self):
        if self.lat_min > self.lat_max or self.lon_min > self.lon_max:
            raise ValueError(f"inverted bounding box: {self}")

    def contains(self, lat: float, lon: float) -> bool:
        return self.lat_min <= lat <= self.lat_max and self.lon_min <= lon <= self.lon_max


DEFAULT_HMA_BBOX = BBox(24.0, 46.0, 60.0, 106.0)
GLOBE = BBox(-90.0, 90.0, -180.0, 180.0)


@dataclass(frozen=True)
class EventRecord:
    event_id: str
    event_date: dt.date
    latitude: float
    longitude: float
    submitted_date: dt.date | None = None
    location_description: str = ""
    location_accuracy: LocationAccuracy = LocationAccuracy.UNKNOWN
    fatality_count: int = 0
    injury_count: int = 0
    fatality_missing: bool = False
    injury_missing: bool = False
    event_title: str = ""
    event_description: str = ""
    landslide_size: LandslideSize = LandslideSize.UNKNOWN
    trigger: str = ""
    source_name: str = ""
    source_link: str = ""

    def to_row(self) -> dict[str, str]:
        """Flat string mapping in catalog column order."""
        return {
            "event_id": self.event_id,
            "event_date": self.event_date.isoformat(),
            "submitted_date": self.submitted_date.isoformat() if self.submitted_date else "",
            "latitude": repr(self.latitude),
            "longitude": repr(self.longitude),
            "location_description": self.location_description,
            "location_accuracy": self.location_accuracy.value,
            "fatality_count": "" if self.fatality_missing else str(self.fatality_count),
            "injury_count": "" if self.injury_missing else str(self.injury_count),
            "event_title": self.event_title,
            "event_description": self.event_description,
            "landslide_size": self.landslide_size.value,
            "trigger": self.trigger,
            "source_name": self.source_name,
            "source_link": self.source_link,
        }


@dataclass(frozen=True)
class Diagnostic:
    row: int
    reason: str
    event_id: str | None = None


@dataclass(frozen=True)
class CatalogStats:
    n_events: int
    n_sources: int
    n_gazetteer: int
    n_profiles: int
    date_range: tuple[dt.date, dt.date] | None
    bbox: BBox | None

    @property
    def empty(self) -> bool:
        return self.n_events == 0

    def to_dict(self) -> dict:
        return {
            "n_events": self.n_events,
            "n_sources": self.n_sources,
            "n_gazetteer": self.n_gazetteer,
            "n_profiles": self.n_profiles,
            "date_range": [d.isoformat() for d in self.date_range] if self.date_range else None,
            "bbox": asdict(self.bbox) if self.bbox else None,
        }


class RowError(ValueError):
    pass


# -- field parsers ----------------------------------------------------------

def parse_date(text: str) -> dt.date:
    """Parse ISO-8601 (date or datetime) or ``MM/DD/YYYY``."""
    text = text.strip()
    if "/" in text:
        try:
            return dt.datetime.strptime(text.split()[0], "%m/%d/%Y").date()
        except ValueError:
            raise RowError(f"invalid date {text!r}") from None
    try:
        return dt.date.fromisoformat(text[:10])
    except ValueError:
        raise RowError(f"invalid date {text!r}") from None


def _parse_float(name, text, lo, hi):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise RowError(f"{name} not numeric: {text!r}") from None
    if value != value:
        raise RowError(f"{name} not numeric: {text!r}")
    if not lo <= value <= hi:
        raise RowError(f"{name} out of range")
    return value


def _parse_count(name, text):
    """Returns (count, missing)."""
    if text is None or str(text).strip() == "":
        return 0, True
    try:
        value = float(text)
    except ValueError:
        raise RowError(f"{name} not numeric: {text!r}") from None
    if value != int(value):
        raise RowError(f"{name} not an integer: {text!r}")
    if value < 0:
        raise RowError(f"{name} negative")
    return int(value), False


def _norm_token(text):
    return str(text).strip().lower().replace(" ", "_").replace("-", "_")


def parse_accuracy(text) -> LocationAccuracy:
    key = _norm_token(text or "").replace("_", "")
    for member in LocationAccuracy:
        if key == member.value:
            return member
    return LocationAccuracy.UNKNOWN


def parse_size(text) -> LandslideSize:
    key = _norm_token(text or "")
    for member in LandslideSize:
        if key == member.value:
            return member
    return LandslideSize.UNKNOWN


def _text(row, key):
    value = row.get(key)
    return "" if value is None else str(value).strip()


def record_from_row(row: dict) -> EventRecord:
    """Build a validated record from a lower-cased column mapping."""
    event_id = _text(row, "event_id")
    if not event_id:
        raise RowError("empty event_id")
    event_date_text = _text(row, "event_date")
    if not event_date_text:
        raise RowError("empty event_date")
    submitted = _text(row, "submitted_date")
    fat, fat_missing = _parse_count("fatality_count", row.get("fatality_count"))
    inj, inj_missing = _parse_count("injury_count", row.get("injury_count"))
    return EventRecord(
        event_id=event_id,
        event_date=parse_date(event_date_text),
        submitted_date=parse_date(submitted) if submitted else None,
        latitude=_parse_float("latitude", row.get("latitude"), -90.0, 90.0),
        longitude=_parse_float("longitude", row.get("longitude"), -180.0, 180.0),
        location_description=_text(row, "location_description"),
        location_accuracy=parse_accuracy(row.get("location_accuracy")),
        fatality_count=fat,
        injury_count=inj,
        fatality_missing=fat_missing,
        injury_missing=inj_missing,
        event_title=_text(row, "event_title"),
        event_description=_text(row, "event_description"),
        landslide_size=parse_size(row.get("landslide_size")),
        trigger=_text(row, "trigger"),
        source_name=_text(row, "source_name"),
        source_link=_text(row, "source_link"),
    )


# -- parsing -----------------------------------------------------------------

def _rows_from_csv(text):
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        raise SchemaError(MANDATORY[0])
    header = [h.strip().lower() for h in reader.fieldnames]
    for col in MANDATORY:
        if col not in header:
            raise SchemaError(col)
    reader.fieldnames = header
    return list(reader)


def _rows_from_json(text):
    data = json.loads(text) if text.strip() else []
    if not isinstance(data, list):
        raise CatalogFormatError("JSON catalog must be an array of objects")
    rows = []
    for obj in data:
        rows.append({str(k).strip().lower(): v for k, v in obj.items()} if isinstance(obj, dict) else None)
    present = set().union(*(r.keys() for r in rows if r)) if rows else set(MANDATORY)
    for col in MANDATORY:
        if col not in present:
            raise SchemaError(col)
    return rows


def parse_catalog(path: str | os.PathLike, format: str | None = None
                  ) -> tuple[list[EventRecord], list[Diagnostic]]:
    """Parse a catalog file into validated records and rejected-row diagnostics.

    ``format`` is ``"csv"`` or ``"json"``; when omitted it is inferred from the
    file suffix. Rows are numbered from 1 (the first data row).
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".")).lower()
    if fmt not in ("csv", "json"):
        raise CatalogFormatError(f"unknown catalog format: {fmt!r}")
    text = path.read_text(encoding="utf-8-sig")
    rows = _rows_from_csv(text) if fmt == "csv" else _rows_from_json(text)
    return records_from_rows(rows)


def records_from_rows(rows: Iterable[dict | None]) -> tuple[list[EventRecord], list[Diagnostic]]:
    records, diagnostics, seen = [], [], set()
    for n, row in enumerate(rows, start=1):
        if row is None:
            diagnostics.append(Diagnostic(n, "row is not an object"))
            continue
        try:
            rec = record_from_row(row)
        except RowError as exc:
            diagnostics.append(Diagnostic(n, str(exc), _text(row, "event_id") or None))
            continue
        if rec.event_id in seen:
            diagnostics.append(Diagnostic(n, "duplicate event_id", rec.event_id))
            continue
        seen.add(rec.event_id)
        records.append(rec)
    return records, diagnostics


def write_catalog(records: Sequence[EventRecord], path: str | os.PathLike,
                  format: str = "csv") -> None:
    path = Path(path)
    rows = [r.to_row() for r in records]
    if format == "csv":
        with path.open("w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    elif format == "json":
        path.write_text(json.dumps(rows, indent=1, ensure_ascii=False), encoding="utf-8")
    else:
        raise CatalogFormatError(f"unknown catalog format: {format!r}")


def filter_region(records: Sequence[EventRecord], bbox: BBox) -> list[EventRecord]:
    """Records inside ``bbox`` (inclusive), input order preserved."""
    if bbox.lat_min > bbox.lat_max or bbox.lon_min > bbox.lon_max:
        raise ValueError("inverted bounding box")
    return [r for r in records if bbox.contains(r.latitude, r.longitude)]


# -- dedup keys shared with the graph builder ---------------------------------

def source_key(rec: EventRecord) -> tuple[str, str] | None:
    if not rec.source_name and not rec.source_link:
        return None
    return (rec.source_name, rec.source_link)


def gazetteer_key(rec: EventRecord) -> tuple[float, float]:
    return (round(rec.latitude, 4), round(rec.longitude, 4))


def profile_key(rec: EventRecord) -> tuple[str, str]:
    return (rec.landslide_size.value, rec.trigger.lower())


def compute_stats(records: Sequence[EventRecord]) -> CatalogStats:
    if not records:
        return CatalogStats(0, 0, 0, 0, None, None)
    sources = {k for k in map(source_key, records) if k is not None}
    dates = [r.event_date for r in records]
    lats = [r.latitude for r in records]
    lons = [r.longitude for r in records]
    return CatalogStats(
        n_events=len(records),
        n_sources=len(sources),
        n_gazetteer=len(set(map(gazetteer_key, records))),
        n_profiles=len(set(map(profile_key, records))),
        date_range=(min(dates), max(dates)),
        bbox=BBox(min(lats), max(lats), min(lons), max(lons)),
    )


def fixture_path(name: str = "hma_mini.csv") -> Path:
    """Path to a bundled fixture file."""
    return Path(__file__).parent / "fixtures" / name
