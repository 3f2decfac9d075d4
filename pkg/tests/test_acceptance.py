"""Acceptance criteria, one test per criterion.

Each test prints a single ``AC<n> PASS|FAIL <summary>`` line (shown even
under output capture) and then asserts. Run alone with
``pytest tests/test_acceptance.py -v``.
"""
import json
import math
import time

import numpy as np
import pytest

from landslide_risk import _kernels
from landslide_risk import features as feat
from landslide_risk import hotspot as hs
from landslide_risk import retrieval as rt
from landslide_risk.catalog import DEFAULT_HMA_BBOX, BBox, filter_region, fixture_path, parse_catalog
from landslide_risk.cli import main as cli_main
from landslide_risk.config import PipelineConfig
from landslide_risk.gnn import model as M
from landslide_risk.gnn.metrics import evaluate
from landslide_risk.gnn.train import train
from landslide_risk.graph_store import NodeKind, build_knowledge_graph
from landslide_risk.orchestrator import prepare
from landslide_risk.spatial_graph import build_proximity_graph, haversine_km

from conftest import (finite_difference_check, gradcheck_problem, oracle_edges, oracle_haversine,
                      path_graph, random_coords)

CLUSTER_IDS = {f"GLC-{1000 + k}" for k in range(8)}


@pytest.fixture
def report(capsys):
    def _report(n, ok, summary):
        with capsys.disabled():
            print(f"\nAC{n} {'PASS' if ok else 'FAIL'} {summary}")
        assert ok, f"AC{n}: {summary}"
    return _report


@pytest.fixture(scope="module")
def trained():
    cfg = PipelineConfig()
    data = prepare(cfg)
    t0 = time.perf_counter()
    result = train(cfg.model, cfg.train, data.x, data.proximity, data.labels, data.split)
    elapsed = time.perf_counter() - t0
    return cfg, data, result, elapsed


def test_ac01_ingestion(report):
    t0 = time.perf_counter()
    records, diags = parse_catalog(fixture_path())
    kept = filter_region(records, DEFAULT_HMA_BBOX)
    g = build_knowledge_graph(kept)
    elapsed = time.perf_counter() - t0
    sources = {(r.source_name, r.source_link) for r in kept if r.source_name or r.source_link}
    points = {("%.4f" % r.latitude, "%.4f" % r.longitude) for r in kept}
    profiles = {(r.landslide_size.value, r.trigger.lower()) for r in kept}
    got = (g.count(NodeKind.EVENT), g.count(NodeKind.SOURCE),
           g.count(NodeKind.GAZETTEER_POINT), g.count(NodeKind.LANDSLIDE_PROFILE))
    want = (len(kept), len(sources), len(points), len(profiles))
    ok = (len(records), len(diags), len(kept)) == (58, 2, 55) and got == want and elapsed < 1.0
    report(1, ok, f"records={len(records)} rejected={len(diags)} in_region={len(kept)} "
                  f"nodes={got} oracle={want} time={elapsed:.3f}s")


def test_ac02_haversine(report):
    rng = np.random.default_rng(2024)
    lat = rng.uniform(-90, 90, size=(1000, 2))
    lon = rng.uniform(-180, 180, size=(1000, 2))
    worst = 0.0
    for k in range(1000):
        a, b = (lat[k, 0], lon[k, 0]), (lat[k, 1], lon[k, 1])
        want = oracle_haversine(a, b)
        worst = max(worst, abs(haversine_km(a, b) - want) / want)
    anchors = (haversine_km((28.0, 84.0), (28.0, 84.0)),
               haversine_km((0, 0), (0, 1)), haversine_km((0, 0), (0, 180)))
    ok = (worst < 1e-9 and anchors[0] == 0.0 and abs(anchors[1] - 111.1949) <= 1e-3
          and abs(anchors[2] - 20015.09) <= 0.01)
    report(2, ok, f"max_rel_err={worst:.2e} anchors=({anchors[0]}, {anchors[1]:.4f}, {anchors[2]:.2f})")


def test_ac03_proximity(report):
    rng = np.random.default_rng(33)
    coords = random_coords(rng, 500)
    coords[:120] = coords[0] + rng.uniform(-1.0, 1.0, size=(120, 2))  # a dense patch
    thresholds = rng.uniform(5.0, 400.0, size=5)
    mismatches = 0
    for t in thresholds:
        want = oracle_edges(coords.tolist(), t)
        for impl in _kernels.available_backends().values():
            i, j, _ = _kernels.threshold_pairs(coords[:, 0], coords[:, 1], t, 6371.0, impl=impl)
            mismatches += set(zip(i.tolist(), j.tolist())) != want
        got = {(i, j) for i, j, _ in build_proximity_graph(coords, t).edges}
        mismatches += got != want
    small = coords[:150]
    violations = 0
    for t1, t2 in np.sort(rng.uniform(1.0, 600.0, size=(100, 2)), axis=1):
        e1 = {(i, j) for i, j, _ in build_proximity_graph(small, t1).edges}
        e2 = {(i, j) for i, j, _ in build_proximity_graph(small, t2).edges}
        violations += not e1 <= e2
    report(3, mismatches == 0 and violations == 0,
           f"n=500 thresholds={np.round(thresholds, 1).tolist()} backends="
           f"{sorted(_kernels.available_backends())} mismatches={mismatches} "
           f"monotonicity_violations={violations}/100")


def test_ac04_gradient_check(report):
    t0 = time.perf_counter()
    errors = [finite_difference_check(*gradcheck_problem(seed)) for seed in (0, 1, 2)]
    elapsed = time.perf_counter() - t0
    ok = max(errors) < 1e-4 and elapsed < 30.0
    report(4, ok, f"worst_rel_err per seed={[f'{e:.1e}' for e in errors]} time={elapsed:.2f}s")


def test_ac05_structural(report, records):
    cfg = M.ModelConfig()
    params = M.init_params(cfg, 5)
    x = feat.feature_matrix(records)
    g = build_proximity_graph(records, 50.0)
    logits, probs = M.model_forward(cfg, params, x, g)
    a1, a2 = M.attention_weights(cfg, params, x, g)
    row_err = max(np.abs(probs.sum(1) - 1).max(), np.abs(a1.sum(-1) - 1).max(),
                  np.abs(a2.sum(-1) - 1).max())

    perm = np.random.default_rng(5).permutation(len(records))
    logits_p = M.model_forward(cfg, params, x[perm], g.permuted(np.argsort(perm)))[0]
    perm_err = np.abs(logits_p - logits[perm]).max()

    n = 12
    pg = path_graph(n)
    xp = np.random.default_rng(6).normal(size=(n, cfg.in_dim))
    base = M.model_forward(cfg, params, xp, pg)[0]
    bumped = xp.copy()
    bumped[0] += 2.0
    moved = M.model_forward(cfg, params, bumped, pg)[0]
    far_err = np.abs(moved[4:] - base[4:]).max()  # > 3 hops from node 0
    near_change = np.abs(moved[3] - base[3]).max()
    ok = row_err <= 1e-9 and perm_err <= 1e-9 and far_err <= 1e-9 and near_change > 1e-9
    report(5, ok, f"row_sum_err={row_err:.1e} perm_err={perm_err:.1e} "
                  f"beyond_3_hops={far_err:.1e} at_3_hops={near_change:.1e}")


def test_ac06_param_budget(report):
    n = M.param_count(M.ModelConfig())
    report(6, n < 100_000, f"param_count={n} budget=100000")


def test_ac07_learnability(report, trained):
    cfg, data, result, elapsed = trained
    pred = M.predict(cfg.model, result.params, data.x, data.proximity)[0]
    test = evaluate(pred[data.split.test], data.labels[data.split.test])
    ratio = result.final_loss / result.initial_loss
    ok = ratio <= 0.7 and test.macro_f1 >= 0.60 and elapsed < 60.0
    report(7, ok, f"train_loss {result.initial_loss:.4f} -> {result.final_loss:.4f} "
                  f"(ratio {ratio:.3f}) test_macro_f1={test.macro_f1:.4f} "
                  f"best_epoch={result.best_epoch} time={elapsed:.2f}s")


def test_ac08_metrics(report):
    one_class = evaluate([2, 2, 2], [0, 1, 2]).macro_f1
    perfect = evaluate([0, 1, 2, 2, 0], [0, 1, 2, 2, 0]).macro_f1
    ok = abs(one_class - 1 / 6) <= 1e-12 and perfect == 1.0
    report(8, ok, f"all_high_macro_f1={one_class!r} perfect={perfect}")


def test_ac09_coherence(report):
    self_rep = rt.coherence(["debris flow blocked the highway"], "debris flow blocked the highway")
    self_ok = (all(abs(v - 1.0) <= 1e-12 for v in (self_rep.avg_similarity, self_rep.weighted_similarity,
                                                   self_rep.max_similarity, self_rep.min_similarity))
               and self_rep.diversity == 0.0)
    rng = np.random.default_rng(9)
    violations = 0
    for _ in range(1000):
        k = int(rng.integers(1, 11))
        vecs = rng.normal(size=(k, 32))
        vecs /= np.linalg.norm(vecs, axis=1, keepdims=True)
        truth = rng.normal(size=32)
        r = rt.coherence_from_vectors(vecs, truth / np.linalg.norm(truth))
        violations += not (r.min_similarity <= r.avg_similarity <= r.max_similarity
                           and r.weighted_similarity <= r.max_similarity
                           and r.min_similarity <= r.weighted_similarity)
    e = np.eye(4)
    two = rt.coherence_from_vectors(np.stack([e[0], e[1]]), e[0]).weighted_similarity
    expected = 1 / (1 + 1 / math.log2(3))
    ok = self_ok and violations == 0 and abs(two - expected) <= 1e-9
    report(9, ok, f"self_identity={self_ok} bound_violations={violations}/1000 "
                  f"two_item_weighted={two:.10f} expected={expected:.10f}")


def test_ac10_hotspots(report, trained, records):
    counts = [len(hs.make_grid(hs.GridSpec(BBox(0, 10, 0, 10), 1.0))),
              len(hs.make_grid(hs.GridSpec(BBox(5, 5.4, 5, 5.3), 1.0))),
              len(hs.make_grid(hs.GridSpec(BBox(0, 2.5, 0, 2), 1.0)))]
    cfg, data, result, _ = trained
    probs = M.predict(cfg.model, result.params, data.x, data.proximity)[2]
    coords = np.array([(r.latitude, r.longitude) for r in data.records])
    ids = [r.event_id for r in data.records]
    empty_cells = hs.score_grid(hs.GridSpec(BBox(44, 46, 60, 62), 0.5), coords, probs, ids)
    n_empty = len(hs.detect_hotspots(empty_cells, 0.6)[0])

    hot, geo = hs.detect_hotspots(hs.score_grid(hs.GridSpec(), coords, probs, ids))
    # hand scoring: cell (8, 50) centred at (28.25, 85.25) holds exactly the cluster
    centre = (24 + 8.5 * 0.5, 60 + 50.5 * 0.5)
    num = den = 0.0
    inside = set()
    for r, p in zip(data.records, probs):
        d = oracle_haversine(centre, (r.latitude, r.longitude))
        if d <= 50.0:
            w = 1 / (1 + d)
            num, den = num + w * (p[2] + 0.5 * p[1]), den + w
            inside.add(r.event_id)
    oracle_risk = num / den
    top = hot[0]
    rival = max((c.risk for c in hot[1:] if c.event_count >= top.event_count), default=0.0)
    doc = json.loads(hs.dumps_geojson(geo))
    geo_ok = (doc["type"] == "FeatureCollection" and len(doc["features"]) == len(hot)
              and all(f["geometry"]["type"] == "Polygon"
                      and f["geometry"]["coordinates"][0][0] == f["geometry"]["coordinates"][0][-1]
                      for f in doc["features"]))
    ok = (counts == [100, 1, 6] and n_empty == 0 and (top.i, top.j) == (8, 50)
          and inside == CLUSTER_IDS == set(top.event_ids)
          and abs(top.risk - oracle_risk) <= 1e-12 and rival <= top.risk + 1e-12 and geo_ok)
    report(10, ok, f"grid_counts={counts} empty_region_hotspots={n_empty} top_cell=({top.i},{top.j}) "
                   f"events={top.event_count} risk={top.risk:.6f} oracle={oracle_risk:.6f} "
                   f"n_hotspots={len(hot)} geojson_ok={geo_ok}")


def test_ac11_end_to_end(report, tmp_path, capsys):
    times, outs = [], []
    for k in range(2):
        out = tmp_path / f"run{k}"
        t0 = time.perf_counter()
        code = cli_main(["run", "--seed", "7", "--out-dir", str(out)])
        times.append(time.perf_counter() - t0)
        outs.append(out)
        assert code == 0
    capsys.readouterr()
    same = {name: (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
            for name in ("hotspots.geojson", "response_plan.json")}
    ok = all(same.values()) and max(times) < 90.0
    report(11, ok, f"identical={same} runtimes={[round(t, 2) for t in times]}s")
