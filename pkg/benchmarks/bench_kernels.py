"""Compare the compiled and numpy haversine kernels.

    python3 benchmarks/bench_kernels.py --sizes 500 2000 5000 --repeat 5
"""
import argparse
import json
import sys
import timeit

import numpy as np

from landslide_risk import _kernels
from landslide_risk.catalog import DEFAULT_HMA_BBOX
from landslide_risk.spatial_graph import EARTH_RADIUS_KM


def _coords(n, seed):
    rng = np.random.default_rng(seed)
    b = DEFAULT_HMA_BBOX
    return rng.uniform(b.lat_min, b.lat_max, n), rng.uniform(b.lon_min, b.lon_max, n)


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def run(sizes, threshold, repeat, seed=0):
    backends = _kernels.available_backends()
    rows = []
    for n in sizes:
        lat, lon = _coords(n, seed)
        ref = None
        for name, impl in sorted(backends.items()):
            pairs = _best(lambda: _kernels.threshold_pairs(lat, lon, threshold, EARTH_RADIUS_KM,
                                                           impl=impl), repeat)
            matrix = _best(lambda: _kernels.haversine_matrix(lat, lon, lat, lon, EARTH_RADIUS_KM,
                                                             impl=impl), repeat)
            i, j, _ = _kernels.threshold_pairs(lat, lon, threshold, EARTH_RADIUS_KM, impl=impl)
            if ref is None:
                ref = (i, j)
            same = np.array_equal(ref[0], i) and np.array_equal(ref[1], j)
            rows.append({"n": n, "backend": name, "pairs_s": pairs, "matrix_s": matrix,
                         "edges": int(i.size), "agrees": bool(same)})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000, 5000])
    ap.add_argument("--threshold", type=float, default=50.0, help="km")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", action="store_true", help="print rows as JSON")
    args = ap.parse_args(argv)

    if "cython" not in _kernels.available_backends():
        print("compiled kernels not built; timing the numpy fallback only", file=sys.stderr)
    rows = run(args.sizes, args.threshold, args.repeat)
    if args.json:
        print(json.dumps(rows, indent=1))
        return 0
    print(f"{'n':>6} {'backend':>8} {'pairs (ms)':>11} {'matrix (ms)':>12} {'edges':>8} agrees")
    for r in rows:
        print(f"{r['n']:>6} {r['backend']:>8} {1e3 * r['pairs_s']:>11.2f} "
              f"{1e3 * r['matrix_s']:>12.2f} {r['edges']:>8} {r['agrees']}")
    by_n = {}
    for r in rows:
        by_n.setdefault(r["n"], {})[r["backend"]] = r
    for n, d in by_n.items():
        if {"cython", "python"} <= set(d):
            print(f"n={n}: threshold_pairs speedup {d['python']['pairs_s'] / d['cython']['pairs_s']:.1f}x, "
                  f"haversine_matrix speedup {d['python']['matrix_s'] / d['cython']['matrix_s']:.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
