"""Event feature vectors, synthetic risk labels and dataset splits."""
from __future__ import annotations

import datetime as dt
import enum
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .catalog import EventRecord, LandslideSize, LocationAccuracy

FEATURE_NAMES = (
    "lat_norm", "lon_norm", "month_sin", "month_cos", "doy_sin", "doy_cos",
    "severity", "accuracy_code",
    "size_small", "size_medium", "size_large", "size_very_large", "size_catastrophic",
)
FEATURE_DIM = len(FEATURE_NAMES)

# coarser reported precision -> larger code; unknown is the worst case
_ACCURACY_CODE = {
    LocationAccuracy.EXACT: 0.0, LocationAccuracy.KM1: 1 / 6, LocationAccuracy.KM5: 2 / 6,
    LocationAccuracy.KM10: 3 / 6, LocationAccuracy.KM25: 4 / 6, LocationAccuracy.KM50: 5 / 6,
    LocationAccuracy.UNKNOWN: 1.0,
}
_ONEHOT_SIZES = (LandslideSize.SMALL, LandslideSize.MEDIUM, LandslideSize.LARGE,
                 LandslideSize.VERY_LARGE, LandslideSize.CATASTROPHIC)


class RiskClass(enum.IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2


@dataclass(frozen=True)
class RiskLabel:
    label: RiskClass
    risk_score: float


@dataclass(frozen=True)
class LabelingConfig:
    w_casualty: float = 0.5
    w_magnitude: float = 0.3
    w_seasonal: float = 0.2
    monsoon_months: frozenset = field(default_factory=lambda: frozenset({6, 7, 8, 9}))

    def __post_init__(self):
        weights = (self.w_casualty, self.w_magnitude, self.w_seasonal)
        if any(w < 0 for w in weights):
            raise ValueError("label weights must be nonnegative")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise ValueError(f"label weights must sum to 1, got {sum(weights)!r}")
        months = frozenset(int(m) for m in self.monsoon_months)
        if not all(1 <= m <= 12 for m in months):
            raise ValueError("monsoon months must be in 1..12")
        object.__setattr__(self, "monsoon_months", months)

    @classmethod
    def from_dict(cls, d: dict) -> "LabelingConfig":
        known = {"w_casualty", "w_magnitude", "w_seasonal", "monsoon_months"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown labeling keys: {sorted(unknown)}")
        kw = dict(d)
        if "monsoon_months" in kw:
            kw["monsoon_months"] = frozenset(kw["monsoon_months"])
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "LabelingConfig":
        from .config import load_document

        return cls.from_dict(load_document(path))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["monsoon_months"] = sorted(self.monsoon_months)
        return d


class CoordNorm(NamedTuple):
    lat: np.ndarray
    lon: np.ndarray
    lat_range: tuple[float, float]
    lon_range: tuple[float, float]


def _minmax(values: np.ndarray):
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return np.full(values.shape, 0.5), (lo, hi)
    return np.clip((values - lo) / (hi - lo), 0.0, 1.0), (lo, hi)


def normalize_coordinates(records: Sequence[EventRecord]) -> CoordNorm:
    """Min-max scale latitudes and longitudes over the dataset."""
    if not records:
        raise ValueError("need at least one record")
    lat, lat_range = _minmax(np.array([r.latitude for r in records], dtype=np.float64))
    lon, lon_range = _minmax(np.array([r.longitude for r in records], dtype=np.float64))
    return CoordNorm(lat, lon, lat_range, lon_range)


def encode_temporal(date: dt.date) -> tuple[float, float, float, float]:
    """Cyclic month (period 12) and day-of-year (period 366) encodings."""
    m = 2 * math.pi * (date.month - 1) / 12
    d = 2 * math.pi * (date.timetuple().tm_yday - 1) / 366
    return (math.sin(m), math.cos(m), math.sin(d), math.cos(d))


def raw_severity(fatalities: int, injuries: int) -> float:
    if fatalities < 0 or injuries < 0:
        raise ValueError("counts must be nonnegative")
    return math.log1p(fatalities) + 0.5 * math.log1p(injuries)


def severity_score(fatalities: int, injuries: int, max_raw: float) -> float:
    """Log-scaled impact divided by the dataset maximum (0 when that is 0)."""
    if max_raw <= 0:
        return 0.0
    return min(1.0, raw_severity(fatalities, injuries) / max_raw)


def severity_scores(records: Sequence[EventRecord]) -> np.ndarray:
    raw = np.array([raw_severity(r.fatality_count, r.injury_count) for r in records])
    if raw.size == 0 or raw.max() <= 0:
        return np.zeros(raw.shape)
    return raw / raw.max()


def accuracy_code(acc: LocationAccuracy) -> float:
    return _ACCURACY_CODE[acc]


def size_onehot(size: LandslideSize) -> np.ndarray:
    out = np.zeros(len(_ONEHOT_SIZES))
    if size in _ONEHOT_SIZES:
        out[_ONEHOT_SIZES.index(size)] = 1.0
    return out


def feature_matrix(records: Sequence[EventRecord]) -> np.ndarray:
    """``(n, 13)`` feature matrix in the documented column layout."""
    n = len(records)
    x = np.zeros((n, FEATURE_DIM))
    if n == 0:
        return x
    cn = normalize_coordinates(records)
    x[:, 0], x[:, 1] = cn.lat, cn.lon
    x[:, 2:6] = [encode_temporal(r.event_date) for r in records]
    x[:, 6] = severity_scores(records)
    x[:, 7] = [accuracy_code(r.location_accuracy) for r in records]
    x[:, 8:] = [size_onehot(r.landslide_size) for r in records]
    return x


def risk_scores(records: Sequence[EventRecord], config: LabelingConfig | None = None) -> np.ndarray:
    config = config or LabelingConfig()
    sev = severity_scores(records)
    size = np.array([r.landslide_size.rank / 4 for r in records], dtype=np.float64)
    season = np.array([float(r.event_date.month in config.monsoon_months) for r in records])
    scores = config.w_casualty * sev + config.w_magnitude * size + config.w_seasonal * season
    return np.clip(scores, 0.0, 1.0)


def tertile_thresholds(scores: np.ndarray) -> tuple[float, float]:
    """Upper bounds of the Low and Medium classes (inclusive)."""
    s = np.sort(np.asarray(scores, dtype=np.float64))
    n = s.size
    return float(s[math.ceil(n / 3) - 1]), float(s[math.ceil(2 * n / 3) - 1])


def labels_from_scores(scores: np.ndarray) -> np.ndarray:
    if len(scores) == 0:
        return np.zeros(0, dtype=np.int64)
    t_low, t_med = tertile_thresholds(scores)
    return np.where(scores <= t_low, 0, np.where(scores <= t_med, 1, 2)).astype(np.int64)


def synthesize_labels(records: Sequence[EventRecord],
                      config: LabelingConfig | None = None) -> list[RiskLabel]:
    """Weighted casualty/magnitude/seasonal score, cut at the dataset tertiles.

    A score equal to a threshold falls in the lower class.
    """
    scores = risk_scores(records, config)
    labels = labels_from_scores(scores)
    return [RiskLabel(RiskClass(int(c)), float(s)) for c, s in zip(labels, scores)]


def label_array(labels: Sequence[RiskLabel]) -> np.ndarray:
    return np.array([int(l.label) for l in labels], dtype=np.int64)


class Split(NamedTuple):
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def _allocate(n: int, ratios: Sequence[float]) -> list[int]:
    """Largest-remainder allocation of ``n`` items; ties go to the earlier split."""
    exact = [r * n for r in ratios]
    counts = [math.floor(e + 1e-9) for e in exact]
    rem = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda k: (-(exact[k] - counts[k]), k))
    for k in order[:rem]:
        counts[k] += 1
    return counts


def _stratum_counts(sizes: Sequence[int], ratios: Sequence[float]) -> list[list[int]]:
    """Per-stratum split sizes whose column sums hit the overall allocation.

    Each stratum gets the floor of its share; leftovers go, one per split, to
    the splits still furthest below their overall target (earlier split on ties).
    """
    target = _allocate(sum(sizes), ratios)
    rows = [[math.floor(m * r + 1e-9) for r in ratios] for m in sizes]
    deficit = [t - sum(row[k] for row in rows) for k, t in enumerate(target)]
    for m, row in zip(sizes, rows):
        left = m - sum(row)
        for k in sorted(range(len(ratios)), key=lambda k: (-deficit[k], k))[:left]:
            row[k] += 1
            deficit[k] -= 1
    return rows


def split_dataset(labels, ratios=(0.6, 0.2, 0.2), seed: int = 0) -> Split:
    """Disjoint train/val/test index sets, stratified by label when possible.

    ``labels`` is either a label sequence or an int ``n`` (no stratification).
    Falls back to an unstratified split, with a warning, when some class has
    fewer members than there are splits.
    """
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must be three positive numbers summing to 1")
    rng = np.random.default_rng(seed)
    if isinstance(labels, (int, np.integer)):
        groups = [np.arange(int(labels))]
    else:
        labels = np.asarray(labels)
        classes, counts = np.unique(labels, return_counts=True)
        if np.any(counts < len(ratios)):
            warnings.warn("class too small to stratify; using an unstratified split",
                          RuntimeWarning, stacklevel=2)
            groups = [np.arange(labels.size)]
        else:
            groups = [np.flatnonzero(labels == c) for c in classes]
    parts: list[list[int]] = [[], [], []]
    for members, counts in zip(groups, _stratum_counts([g.size for g in groups], ratios)):
        members = rng.permutation(members)
        start = 0
        for k, c in enumerate(counts):
            parts[k].extend(members[start:start + c].tolist())
            start += c
    return Split(*(np.array(sorted(p), dtype=np.int64) for p in parts))
