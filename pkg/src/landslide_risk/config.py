"""Pipeline configuration: one document with a section per stage.

Precedence is CLI flag > config file > built-in default; ``apply_overrides``
handles the first step.
"""
from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .catalog import DEFAULT_HMA_BBOX, BBox, fixture_path
from .features import LabelingConfig
from .gnn.model import ModelConfig
from .gnn.train import TrainConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


def load_document(path) -> dict:
    """Read a TOML or JSON document (chosen by suffix; TOML otherwise)."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        return json.loads(text)
    return tomllib.loads(text)


def _bbox(value) -> BBox:
    if isinstance(value, BBox):
        return value
    if isinstance(value, dict):
        return BBox(**value)
    return BBox(*map(float, value))


@dataclass(frozen=True)
class CatalogSection:
    path: str = str(fixture_path())
    format: str | None = None
    bbox: BBox = DEFAULT_HMA_BBOX


@dataclass(frozen=True)
class GraphSection:
    near_km: float | None = 50.0
    embedding_dim: int = 256


@dataclass(frozen=True)
class SplitSection:
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2)


@dataclass(frozen=True)
class SpatialSection:
    threshold_km: float = 50.0


@dataclass(frozen=True)
class HotspotSection:
    cell_deg: float = 0.5
    influence_radius_km: float = 50.0
    threshold: float = 0.6
    top_n: int = 20
    bbox: BBox | None = None  # defaults to the catalog bbox


@dataclass(frozen=True)
class RetrievalSection:
    k: int = 5
    expand: bool = True
    top_events: int = 3


@dataclass(frozen=True)
class OutputSection:
    dir: str = "landslide_risk_out"
    checkpoint: str | None = None  # load instead of training when set


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 7
    catalog: CatalogSection = field(default_factory=CatalogSection)
    graph: GraphSection = field(default_factory=GraphSection)
    labels: LabelingConfig = field(default_factory=LabelingConfig)
    split: SplitSection = field(default_factory=SplitSection)
    spatial: SpatialSection = field(default_factory=SpatialSection)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    hotspot: HotspotSection = field(default_factory=HotspotSection)
    retrieval: RetrievalSection = field(default_factory=RetrievalSection)
    output: OutputSection = field(default_factory=OutputSection)

    @classmethod
    def from_dict(cls, doc: dict, base_dir: Path | None = None) -> "PipelineConfig":
        doc = dict(doc)
        unknown = set(doc) - {f.name for f in fields(cls)}
        if unknown:
            raise ValueError(f"unknown config sections: {sorted(unknown)}")
        kw: dict = {}
        if "seed" in doc:
            kw["seed"] = int(doc["seed"])
        cat = dict(doc.get("catalog", {}))
        if "bbox" in cat:
            cat["bbox"] = _bbox(cat["bbox"])
        if "path" in cat and base_dir is not None and not Path(cat["path"]).is_absolute():
            cat["path"] = str(base_dir / cat["path"])
        kw["catalog"] = CatalogSection(**cat)
        kw["graph"] = GraphSection(**doc.get("graph", {}))
        kw["labels"] = LabelingConfig.from_dict(doc.get("labels", {}))
        split = dict(doc.get("split", {}))
        if "ratios" in split:
            split["ratios"] = tuple(float(r) for r in split["ratios"])
        kw["split"] = SplitSection(**split)
        kw["spatial"] = SpatialSection(**doc.get("spatial", {}))
        kw["model"] = ModelConfig.from_dict(doc.get("model", {}))
        train = dict(doc.get("train", {}))
        train.setdefault("seed", kw.get("seed", cls.seed))
        kw["train"] = TrainConfig.from_dict(train)
        hot = dict(doc.get("hotspot", {}))
        if hot.get("bbox") is not None:
            hot["bbox"] = _bbox(hot["bbox"])
        kw["hotspot"] = HotspotSection(**hot)
        kw["retrieval"] = RetrievalSection(**doc.get("retrieval", {}))
        out = dict(doc.get("output", {}))
        if base_dir is not None:
            for key in ("dir", "checkpoint"):
                if out.get(key) and not Path(out[key]).is_absolute():
                    out[key] = str(base_dir / out[key])
        kw["output"] = OutputSection(**out)
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        """Load a config file; relative paths resolve against its directory."""
        path = Path(path)
        return cls.from_dict(load_document(path), base_dir=path.parent)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["labels"] = self.labels.to_dict()
        return d

    @property
    def hotspot_bbox(self) -> BBox:
        return self.hotspot.bbox or self.catalog.bbox


def apply_overrides(cfg: PipelineConfig, *, seed=None, catalog=None, fmt=None, bbox=None,
                    out_dir=None, checkpoint=None, threshold=None, cell_deg=None,
                    k=None, expand=None) -> PipelineConfig:
    """Apply CLI flags (``None`` means not given)."""
    if seed is not None:
        cfg = replace(cfg, seed=seed, train=replace(cfg.train, seed=seed))
    cat = {key: v for key, v in (("path", catalog), ("format", fmt), ("bbox", bbox)) if v is not None}
    if "bbox" in cat:
        cat["bbox"] = _bbox(cat["bbox"])
    if cat:
        cfg = replace(cfg, catalog=replace(cfg.catalog, **cat))
    out = {key: v for key, v in (("dir", out_dir), ("checkpoint", checkpoint)) if v is not None}
    if out:
        cfg = replace(cfg, output=replace(cfg.output, **out))
    hot = {key: v for key, v in (("threshold", threshold), ("cell_deg", cell_deg)) if v is not None}
    if hot:
        cfg = replace(cfg, hotspot=replace(cfg.hotspot, **hot))
    ret = {key: v for key, v in (("k", k), ("expand", expand)) if v is not None}
    if ret:
        cfg = replace(cfg, retrieval=replace(cfg.retrieval, **ret))
    return cfg
