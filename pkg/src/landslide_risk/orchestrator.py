"""Prediction -> Planning -> Execution pipeline.

The three agents are sequential stages that pass values to each other:

* Prediction: ingest, knowledge graph, features and labels, proximity graph,
  train (or load a checkpoint), per-event risk probabilities.
* Planning: grid hotspot detection over the predictions and retrieval of
  graph context for every hotspot.
* Execution: the response plan and the on-disk artifacts.
"""
from __future__ import annotations

import enum
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import catalog as cat
from . import features as feat
from . import hotspot as hs
from . import retrieval as rt
from .config import PipelineConfig
from .embedding import HashingEmbedder
from .errors import PipelineError
from .gnn import metrics as gm
from .gnn import model as gmodel
from .gnn.train import train
from .graph_store import PropertyGraph, build_knowledge_graph
from .spatial_graph import ProximityGraph, build_proximity_graph

log = logging.getLogger(__name__)

NO_RISK_SENTINEL = "no elevated risk detected"


class Agent(str, enum.Enum):
    PREDICTION = "Prediction"
    PLANNING = "Planning"
    EXECUTION = "Execution"


class MessageKind(str, enum.Enum):
    RISK_PREDICTIONS = "RiskPredictions"
    CONTEXT_BUNDLE = "ContextBundle"
    RESPONSE_PLAN = "ResponsePlan"


OWNER = {
    MessageKind.RISK_PREDICTIONS: Agent.PREDICTION,
    MessageKind.CONTEXT_BUNDLE: Agent.PLANNING,
    MessageKind.RESPONSE_PLAN: Agent.EXECUTION,
}
PIPELINE_ORDER = tuple(MessageKind)


@dataclass(frozen=True)
class AgentMessage:
    sender: Agent
    kind: MessageKind
    payload: Any
    timestamp: float
    seq: int

    def __post_init__(self):
        if OWNER[self.kind] is not self.sender:
            raise ValueError(f"{self.kind.value} must be sent by {OWNER[self.kind].value}")


@dataclass
class PipelineRun:
    config: PipelineConfig
    messages: list[AgentMessage] = field(default_factory=list)
    artifacts: dict[str, str] = field(default_factory=dict)
    complete: bool = False

    def post(self, sender: Agent, kind: MessageKind, payload) -> AgentMessage:
        expected = PIPELINE_ORDER[len(self.messages)] if len(self.messages) < 3 else None
        if kind is not expected:
            raise RuntimeError(f"out-of-order message {kind.value}")
        msg = AgentMessage(sender, kind, payload, time.time(), len(self.messages))
        self.messages.append(msg)
        return msg

    @property
    def message_kinds(self) -> list[str]:
        return [m.kind.value for m in self.messages]


# -- stage payloads -------------------------------------------------------------

@dataclass
class PreparedData:
    records: list[cat.EventRecord]
    diagnostics: list[cat.Diagnostic]
    graph: PropertyGraph
    x: np.ndarray
    labels: np.ndarray
    risk_scores: np.ndarray
    proximity: ProximityGraph
    split: feat.Split


@dataclass
class RiskPredictions:
    event_ids: list[str]
    coords: np.ndarray
    probabilities: np.ndarray
    predicted: np.ndarray
    confidence: np.ndarray
    test_metrics: gm.Metrics
    params_source: str


@dataclass
class HotspotContext:
    hotspot: hs.HotspotCell
    query: str
    retrieval: rt.RetrievalResult
    prompt: str
    top_events: list[dict]
    coherence: rt.CoherenceReport


@dataclass
class ContextBundle:
    hotspots: list[hs.HotspotCell]
    geojson: dict
    contexts: list[HotspotContext]


# -- stages -----------------------------------------------------------------------

def prepare(cfg: PipelineConfig) -> PreparedData:
    """Ingest, build the knowledge graph, features, labels and proximity graph."""
    records, diagnostics = _stage("ingest", lambda: cat.parse_catalog(cfg.catalog.path, cfg.catalog.format))
    records = cat.filter_region(records, cfg.catalog.bbox)
    if not records:
        raise PipelineError("ingest", ValueError("no records inside the configured bbox"))
    graph = _stage("graph", lambda: build_knowledge_graph(
        records, HashingEmbedder(cfg.graph.embedding_dim), cfg.graph.near_km))

    def _features():
        x = feat.feature_matrix(records)
        scores = feat.risk_scores(records, cfg.labels)
        labels = feat.labels_from_scores(scores)
        split = feat.split_dataset(labels, cfg.split.ratios, cfg.seed)
        return x, scores, labels, split

    x, scores, labels, split = _stage("features", _features)
    prox = _stage("proximity", lambda: build_proximity_graph(records, cfg.spatial.threshold_km))
    return PreparedData(records, diagnostics, graph, x, labels, scores, prox, split)


def _stage(name, fn):
    try:
        return fn()
    except PipelineError:
        raise
    except Exception as exc:
        raise PipelineError(name, exc) from exc


def fit_or_load(cfg: PipelineConfig, data: PreparedData, out_dir: Path | None = None):
    """Train (writing checkpoint and log under ``out_dir``) or load ``output.checkpoint``."""
    if cfg.output.checkpoint:
        model_cfg, params, _ = _stage("train", lambda: gmodel.load_checkpoint(cfg.output.checkpoint))
        return model_cfg, params, None, f"checkpoint:{Path(cfg.output.checkpoint).name}"
    result = _stage("train", lambda: train(cfg.model, cfg.train, data.x, data.proximity,
                                           data.labels, data.split))
    log.info("model parameters: %d", result.param_count)
    if out_dir is not None:
        gmodel.save_checkpoint(out_dir / "checkpoint.json", cfg.model, result.params,
                               {"best_epoch": result.best_epoch, "param_count": result.param_count})
        (out_dir / "train_log.csv").write_text(result.log_csv(), encoding="utf-8")
    return cfg.model, result.params, result, "trained"


def predict_risk(cfg, data: PreparedData, model_cfg, params, source: str) -> RiskPredictions:
    pred, conf, probs = gmodel.predict(model_cfg, params, data.x, data.proximity)
    metrics = gm.evaluate(pred[data.split.test], data.labels[data.split.test])
    coords = np.array([(r.latitude, r.longitude) for r in data.records])
    return RiskPredictions([r.event_id for r in data.records], coords, probs, pred, conf,
                           metrics, source)


def _locale_query(events: list[cat.EventRecord]) -> str:
    places = sorted({e.location_description for e in events if e.location_description})
    return "landslide risk near " + ("; ".join(places) if places else "this area")


def plan_context(cfg: PipelineConfig, data: PreparedData, preds: RiskPredictions) -> ContextBundle:
    """Detect hotspots and gather retrieval context for each."""
    spec = hs.GridSpec(cfg.hotspot_bbox, cfg.hotspot.cell_deg)
    cells = hs.score_grid(spec, preds.coords, preds.probabilities, preds.event_ids,
                          cfg.hotspot.influence_radius_km)
    hot, geojson = hs.detect_hotspots(cells, cfg.hotspot.threshold, cfg.hotspot.top_n)
    by_id = {r.event_id: (k, r) for k, r in enumerate(data.records)}
    provider = HashingEmbedder(data.graph.dim)
    contexts = []
    for cell in hot:
        members = [by_id[e] for e in cell.event_ids]
        members.sort(key=lambda kr: (-preds.probabilities[kr[0], 2], kr[1].event_id))
        top = [{"event_id": r.event_id, "title": r.event_title,
                "p_high": float(preds.probabilities[k, 2])}
               for k, r in members[:cfg.retrieval.top_events]]
        query = _locale_query([r for _, r in members])
        res = rt.retrieve(data.graph, query, cfg.retrieval.k, cfg.retrieval.expand, provider)
        prompt = rt.render_prompt(query, res, data.graph)
        truth = " ".join(r.event_description for _, r in members)
        texts = [rt.node_text(data.graph.node(n)) for n in res.node_ids]
        contexts.append(HotspotContext(cell, query, res, prompt, top,
                                       rt.coherence(texts, truth, provider)))
    return ContextBundle(hot, geojson, contexts)


def build_response_plan(hotspots, bundle: ContextBundle | None) -> dict:
    """One entry per hotspot, highest risk first; a sentinel entry when there are none."""
    contexts = {(c.hotspot.i, c.hotspot.j): c for c in (bundle.contexts if bundle else [])}
    ordered = sorted(hotspots, key=hs.rank_key)
    entries = []
    for rank, cell in enumerate(ordered, start=1):
        ctx = contexts.get((cell.i, cell.j))
        entries.append({
            "rank": rank,
            "cell": [cell.i, cell.j],
            "center": {"lat": cell.lat, "lon": cell.lon},
            "risk": cell.risk,
            "event_count": cell.event_count,
            "top_events": ctx.top_events if ctx else [],
            "query": ctx.query if ctx else "",
            "prompt": ctx.prompt if ctx else "",
        })
    if not entries:
        entries.append({"rank": 0, "status": NO_RISK_SENTINEL})
    return {"entries": entries, "n_hotspots": len(ordered)}


def _dump(path: Path, doc) -> str:
    path.write_text(json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n",
                    encoding="utf-8")
    return str(path)


def run_pipeline(cfg: PipelineConfig) -> PipelineRun:
    """Execute the full pipeline and write artifacts under ``cfg.output.dir``."""
    run = PipelineRun(cfg)
    out_dir = Path(cfg.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        # Prediction agent
        data = prepare(cfg)
        model_cfg, params, result, source = fit_or_load(cfg, data, out_dir)
        if result is not None:
            run.artifacts["checkpoint"] = str(out_dir / "checkpoint.json")
            run.artifacts["train_log"] = str(out_dir / "train_log.csv")
        preds = _stage("predict", lambda: predict_risk(cfg, data, model_cfg, params, source))
        run.post(Agent.PREDICTION, MessageKind.RISK_PREDICTIONS, preds)

        # Planning agent
        bundle = _stage("planning", lambda: plan_context(cfg, data, preds))
        run.post(Agent.PLANNING, MessageKind.CONTEXT_BUNDLE, bundle)

        # Execution agent
        def _execute():
            plan = build_response_plan(bundle.hotspots, bundle)
            run.artifacts["hotspots"] = str(out_dir / "hotspots.geojson")
            (out_dir / "hotspots.geojson").write_text(hs.dumps_geojson(bundle.geojson), encoding="utf-8")
            run.artifacts["response_plan"] = _dump(out_dir / "response_plan.json", plan)
            reports = [c.coherence for c in bundle.contexts]
            run.artifacts["coherence"] = _dump(out_dir / "coherence.json", {
                "reports": [r.to_dict() for r in reports],
                "aggregate": rt.aggregate_reports(reports)})
            run.artifacts["metrics"] = _dump(out_dir / "metrics.json", {
                "test": preds.test_metrics.to_dict(), "params": source,
                "param_count": gmodel.param_count(model_cfg)})
            return plan

        plan = _stage("execution", _execute)
        run.post(Agent.EXECUTION, MessageKind.RESPONSE_PLAN, plan)
        run.complete = True
    finally:
        _write_manifest(run, out_dir)
    return run


def _write_manifest(run: PipelineRun, out_dir: Path) -> None:
    manifest = {
        "complete": run.complete,
        "status": "complete" if run.complete else "incomplete",
        "config": run.config.to_dict(),
        "messages": [{"seq": m.seq, "sender": m.sender.value, "kind": m.kind.value,
                      "timestamp": m.timestamp} for m in run.messages],
        "artifacts": run.artifacts,
    }
    (out_dir / "run.json").write_text(json.dumps(manifest, indent=1, sort_keys=True, default=str),
                                      encoding="utf-8")
