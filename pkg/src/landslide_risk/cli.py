"""Command-line interface: ``landslide-risk <command> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import catalog as cat
from . import hotspot as hs
from . import retrieval as rt
from .config import PipelineConfig, apply_overrides
from .errors import LandslideRiskError
from .gnn import metrics as gm
from .gnn import model as gmodel
from .graph_store import EdgeKind, NodeKind, PropertyGraph, build_knowledge_graph
from .orchestrator import fit_or_load, predict_risk, prepare, run_pipeline
from .spatial_graph import graph_summary

log = logging.getLogger("landslide_risk")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False, default=str) + "\n")


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig.load(args.config) if getattr(args, "config", None) else PipelineConfig()
    return apply_overrides(
        cfg,
        seed=getattr(args, "seed", None),
        catalog=getattr(args, "catalog", None),
        fmt=getattr(args, "format", None),
        bbox=getattr(args, "bbox", None),
        out_dir=getattr(args, "out_dir", None),
        checkpoint=getattr(args, "checkpoint", None),
        threshold=getattr(args, "threshold", None),
        cell_deg=getattr(args, "cell_deg", None),
        k=getattr(args, "k", None),
        expand=getattr(args, "expand", None),
    )


# -- commands ---------------------------------------------------------------------

def cmd_ingest(args):
    records, diags = cat.parse_catalog(args.path, args.format)
    bbox = cat.BBox(*args.bbox) if args.bbox else cat.DEFAULT_HMA_BBOX
    kept = cat.filter_region(records, bbox)
    if args.out:
        cat.write_catalog(kept, args.out, "json" if args.out.endswith(".json") else "csv")
    _emit({
        "parsed": len(records),
        "rejected": [{"row": d.row, "reason": d.reason, "event_id": d.event_id} for d in diags],
        "in_region": len(kept),
        "stats": cat.compute_stats(kept).to_dict(),
    })


def _graph_summary_doc(g: PropertyGraph) -> dict:
    return {
        "nodes": {k.value: g.count(k) for k in NodeKind},
        "edges": {k.value: g.count(k) for k in EdgeKind},
        "total_nodes": len(g),
    }


def _load_graph(args, cfg) -> PropertyGraph:
    if getattr(args, "graph", None):
        return PropertyGraph.from_json(Path(args.graph).read_text(encoding="utf-8"))
    records, _ = cat.parse_catalog(cfg.catalog.path, cfg.catalog.format)
    records = cat.filter_region(records, cfg.catalog.bbox)
    return build_knowledge_graph(records, near_km=cfg.graph.near_km)


def cmd_graph(args):
    cfg = _config(args)
    if args.action == "build":
        g = _load_graph(argparse.Namespace(graph=None), cfg)
        if args.out:
            Path(args.out).write_text(g.to_json(), encoding="utf-8")
        _emit(_graph_summary_doc(g))
        return
    g = _load_graph(args, cfg)
    doc = _graph_summary_doc(g)
    if not getattr(args, "graph", None):
        data = prepare(cfg)
        doc["proximity"] = graph_summary(data.proximity)._asdict()
        doc["catalog"] = cat.compute_stats(data.records).to_dict()
    _emit(doc)


def cmd_train(args):
    cfg = _config(args)
    out_dir = Path(cfg.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = prepare(cfg)
    # always train here, even if the config names a checkpoint to load
    cfg = replace(cfg, output=replace(cfg.output, checkpoint=None))
    model_cfg, params, result, source = fit_or_load(cfg, data, out_dir)
    preds = predict_risk(cfg, data, model_cfg, params, source)
    _emit({
        "checkpoint": str(out_dir / "checkpoint.json"),
        "param_count": result.param_count,
        "initial_train_loss": result.initial_loss,
        "final_train_loss": result.final_loss,
        "best_epoch": result.best_epoch,
        "test": preds.test_metrics.to_dict(),
    })


def cmd_evaluate(args):
    cfg = _config(args)
    data = prepare(cfg)
    model_cfg, params, _ = gmodel.load_checkpoint(args.checkpoint)
    pred = gmodel.predict(model_cfg, params, data.x, data.proximity)[0]
    _emit({name: gm.evaluate(pred[idx], data.labels[idx]).to_dict()
           for name, idx in zip(("train", "val", "test"), data.split)})


def cmd_hotspots(args):
    cfg = _config(args)
    out_dir = Path(cfg.output.dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data = prepare(cfg)
    model_cfg, params, _, source = fit_or_load(cfg, data, out_dir)
    preds = predict_risk(cfg, data, model_cfg, params, source)
    spec = hs.GridSpec(cfg.hotspot_bbox, cfg.hotspot.cell_deg)
    cells = hs.score_grid(spec, preds.coords, preds.probabilities, preds.event_ids,
                          cfg.hotspot.influence_radius_km)
    hot, geo = hs.detect_hotspots(cells, cfg.hotspot.threshold, cfg.hotspot.top_n)
    if args.out:
        Path(args.out).write_text(hs.dumps_geojson(geo), encoding="utf-8")
    _emit([{"rank": r, "cell": [c.i, c.j], "lat": c.lat, "lon": c.lon, "risk": c.risk,
            "event_count": c.event_count, "event_ids": list(c.event_ids)}
           for r, c in enumerate(hot, start=1)])


def cmd_query(args):
    cfg = _config(args)
    g = _load_graph(args, cfg)
    res = rt.retrieve(g, args.text, cfg.retrieval.k, bool(args.expand))
    if args.prompt:
        sys.stdout.write(rt.render_prompt(args.text, res, g))
        return
    _emit({"query": res.query, "items": [
        {"node_id": it.node_id, "kind": g.node(it.node_id).kind.value,
         "similarity": None if np.isnan(it.similarity) else it.similarity,
         "provenance": it.provenance, "text": rt.node_text(g.node(it.node_id))}
        for it in res.items]})


def cmd_coherence(args):
    cfg = _config(args)
    g = _load_graph(args, cfg)
    items = json.loads(Path(args.batch).read_text(encoding="utf-8"))
    if not isinstance(items, list):
        raise ValueError("batch file must hold a JSON array of {query, ground_truth}")
    doc = rt.evaluate_batch(g, items, cfg.retrieval.k, bool(args.expand))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    _emit(doc)


def cmd_run(args):
    cfg = _config(args)
    run = run_pipeline(cfg)
    _emit({"complete": run.complete, "messages": run.message_kinds, "artifacts": run.artifacts})


# -- parser ---------------------------------------------------------------------------

def _common(p, catalog=True):
    p.add_argument("--config", help="TOML or JSON pipeline config")
    if catalog:
        p.add_argument("--catalog", help="catalog file (overrides config)")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="landslide-risk", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and filter a catalog, print stats")
    p.add_argument("path")
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--bbox", type=float, nargs=4, metavar=("LAT_MIN", "LAT_MAX", "LON_MIN", "LON_MAX"))
    p.add_argument("--out", help="write the in-region records (csv or json)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("graph", help="build or summarise the knowledge graph")
    p.add_argument("action", choices=("build", "stats"))
    _common(p)
    p.add_argument("--graph", help="graph JSON to summarise (stats)")
    p.add_argument("--out", help="write graph JSON (build)")
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("train", help="train the risk model")
    _common(p)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on the splits")
    _common(p)
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("hotspots", help="grid hotspot detection")
    _common(p)
    p.add_argument("--checkpoint", help="use a trained checkpoint instead of training")
    p.add_argument("--threshold", type=float)
    p.add_argument("--cell-deg", type=float)
    p.add_argument("--out", help="GeoJSON output path")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_hotspots)

    p = sub.add_parser("query", help="hybrid retrieval over the knowledge graph")
    p.add_argument("text")
    _common(p)
    p.add_argument("--graph", help="graph JSON instead of building from the catalog")
    p.add_argument("--k", type=int)
    p.add_argument("--expand", action="store_true", default=None)
    p.add_argument("--prompt", action="store_true", help="print the assembled prompt")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("coherence", help="semantic coherence over a query batch")
    _common(p)
    p.add_argument("--batch", required=True, help="JSON array of {query, ground_truth}")
    p.add_argument("--graph")
    p.add_argument("--k", type=int)
    p.add_argument("--expand", action="store_true", default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("run", help="full pipeline")
    _common(p)
    p.add_argument("--out-dir")
    p.add_argument("--checkpoint", help="skip training and load this checkpoint")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (LandslideRiskError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
