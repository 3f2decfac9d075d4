"""Distance-thresholded proximity graphs over event coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels

EARTH_RADIUS_KM = 6371.0
DEFAULT_THRESHOLD_KM = 50.0


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lat, lon) points in degrees."""
    p1, p2 = math.radians(a[0]), math.radians(b[0])
    sdp = math.sin((p2 - p1) / 2)
    sdl = math.sin(math.radians(b[1] - a[1]) / 2)
    h = min(1.0, sdp * sdp + math.cos(p1) * math.cos(p2) * sdl * sdl)
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def distance_matrix(lat_a, lon_a, lat_b, lon_b) -> np.ndarray:
    return _kernels.haversine_matrix(lat_a, lon_a, lat_b, lon_b, EARTH_RADIUS_KM)


@dataclass(frozen=True)
class ProximityGraph:
    n: int
    threshold_km: float
    src: np.ndarray  # i < j
    dst: np.ndarray
    dist: np.ndarray
    _adj: tuple = field(repr=False, compare=False, default=())

    @property
    def edges(self) -> list[tuple[int, int, float]]:
        return [(int(i), int(j), float(d)) for i, j, d in zip(self.src, self.dst, self.dist)]

    @property
    def n_edges(self) -> int:
        return int(self.src.shape[0])

    def neighbors(self, i: int) -> list[int]:
        return self._adj[i]

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        np.add.at(deg, self.src, 1)
        np.add.at(deg, self.dst, 1)
        return deg

    def adjacency(self) -> np.ndarray:
        """Dense symmetric 0/1 adjacency without self-loops."""
        a = np.zeros((self.n, self.n))
        a[self.src, self.dst] = 1.0
        a[self.dst, self.src] = 1.0
        return a

    def to_edge_list(self) -> str:
        return "".join(f"{i} {j} {d:.6f}\n" for i, j, d in self.edges)

    def permuted(self, perm: Sequence[int]) -> "ProximityGraph":
        """Relabel node ``k`` as ``perm[k]``."""
        perm = np.asarray(perm)
        a, b = perm[self.src], perm[self.dst]
        return from_edges(self.n, np.minimum(a, b), np.maximum(a, b), self.dist, self.threshold_km)


def from_edges(n, src, dst, dist, threshold_km=math.inf) -> ProximityGraph:
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    dist = np.asarray(dist, dtype=np.float64)
    if np.any(src == dst):
        raise ValueError("self-loops are not allowed")
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    order = np.lexsort((hi, lo))
    lo, hi, dist = lo[order], hi[order], dist[order]
    if lo.size and np.any((np.diff(lo) == 0) & (np.diff(hi) == 0)):
        raise ValueError("duplicate edge")
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in zip(lo.tolist(), hi.tolist()):
        adj[i].append(j)
        adj[j].append(i)
    for nb in adj:
        nb.sort()
    return ProximityGraph(n, threshold_km, lo, hi, dist, tuple(adj))


def build_proximity_graph(coords, threshold_km: float = DEFAULT_THRESHOLD_KM) -> ProximityGraph:
    """Connect every pair of points at most ``threshold_km`` apart.

    ``coords`` is an ``(n, 2)`` array-like of (lat, lon) degrees, or a sequence
    of objects with ``latitude``/``longitude`` attributes.
    """
    if not threshold_km > 0:
        raise ValueError("threshold_km must be positive")
    coords = _coords(coords)
    i, j, d = _kernels.threshold_pairs(coords[:, 0], coords[:, 1], threshold_km, EARTH_RADIUS_KM)
    return from_edges(coords.shape[0], i, j, d, float(threshold_km))


def _coords(items) -> np.ndarray:
    items = list(items) if not isinstance(items, np.ndarray) else items
    if len(items) and hasattr(items[0], "latitude"):
        return np.array([(r.latitude, r.longitude) for r in items], dtype=np.float64)
    return np.asarray(items, dtype=np.float64).reshape(-1, 2)


class GraphSummary(NamedTuple):
    n_edges: int
    mean_degree: float
    max_degree: int
    n_isolated: int
    n_components: int


def connected_components(g: ProximityGraph) -> np.ndarray:
    """Component label per node (labels ordered by smallest member)."""
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in zip(g.src.tolist(), g.dst.tolist()):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    roots = [find(x) for x in range(g.n)]
    relabel = {r: k for k, r in enumerate(dict.fromkeys(roots))}
    return np.array([relabel[r] for r in roots], dtype=np.int64)


def graph_summary(g: ProximityGraph) -> GraphSummary:
    deg = g.degrees()
    return GraphSummary(
        n_edges=g.n_edges,
        mean_degree=float(deg.mean()) if g.n else 0.0,
        max_degree=int(deg.max()) if g.n else 0,
        n_isolated=int(np.sum(deg == 0)),
        n_components=int(connected_components(g).max() + 1) if g.n else 0,
    )
