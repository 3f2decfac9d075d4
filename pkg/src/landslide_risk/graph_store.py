"""In-memory property graph with typed nodes/edges and an exact vector index."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .catalog import EventRecord, gazetteer_key, profile_key, source_key
from .embedding import DEFAULT_DIM, EmbeddingProvider, HashingEmbedder
from .errors import GraphConstructionError, NodeLookupError
from .spatial_graph import build_proximity_graph

NodeId = int


class NodeKind(str, enum.Enum):
    EVENT = "Event"
    SOURCE = "Source"
    GAZETTEER_POINT = "GazetteerPoint"
    LANDSLIDE_PROFILE = "LandslideProfile"


class EdgeKind(str, enum.Enum):
    HAS_SOURCE = "HAS_SOURCE"
    LOCATED_AT = "LOCATED_AT"
    HAS_PROFILE = "HAS_PROFILE"
    NEAR = "NEAR"


@dataclass(frozen=True)
class Node:
    id: NodeId
    kind: NodeKind
    properties: dict[str, Any]
    embedding: np.ndarray | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Edge:
    src: NodeId
    dst: NodeId
    kind: EdgeKind
    weight: float | None = None


class PropertyGraph:
    """Append-only typed graph.

    Nodes get consecutive integer ids. NEAR edges are always inserted in both
    directions; other edge kinds are directed but reported by ``neighbors``
    from either endpoint.
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim
        self._nodes: list[Node] = []
        self._edges: list[Edge] = []
        self._adj: list[list[tuple[NodeId, Edge]]] = []
        self._index_cache: dict = {}

    # -- construction ---------------------------------------------------------

    def add_node(self, kind: NodeKind, properties: dict | None = None,
                 embedding=None) -> NodeId:
        if embedding is not None:
            embedding = np.asarray(embedding, dtype=np.float64)
            if embedding.shape != (self.dim,):
                raise ValueError(f"embedding must have dimension {self.dim}")
            if abs(np.linalg.norm(embedding) - 1.0) > 1e-6:
                raise ValueError("embedding must be unit length")
            embedding.setflags(write=False)
        nid = len(self._nodes)
        self._nodes.append(Node(nid, NodeKind(kind), dict(properties or {}), embedding))
        self._adj.append([])
        self._index_cache.clear()
        return nid

    def add_edge(self, src: NodeId, dst: NodeId, kind: EdgeKind, weight: float | None = None):
        self._check(src)
        self._check(dst)
        kind = EdgeKind(kind)
        if weight is not None and weight < 0:
            raise ValueError("edge weight must be nonnegative")
        if kind is EdgeKind.NEAR:
            if src == dst:
                raise ValueError("NEAR self-loop")
            for a, b in ((src, dst), (dst, src)):
                e = Edge(a, b, kind, weight)
                self._edges.append(e)
                self._adj[a].append((b, e))
        else:
            e = Edge(src, dst, kind, weight)
            self._edges.append(e)
            self._adj[src].append((dst, e))
            if dst != src:
                self._adj[dst].append((src, e))

    # -- queries -------------------------------------------------------------

    def _check(self, nid):
        if not isinstance(nid, (int, np.integer)) or not 0 <= nid < len(self._nodes):
            raise NodeLookupError(f"unknown node id: {nid!r}")

    def node(self, nid: NodeId) -> Node:
        self._check(nid)
        return self._nodes[nid]

    @property
    def nodes(self) -> Sequence[Node]:
        return tuple(self._nodes)

    @property
    def edges(self) -> Sequence[Edge]:
        return tuple(self._edges)

    def __len__(self):
        return len(self._nodes)

    def nodes_of_kind(self, kind: NodeKind) -> list[Node]:
        return [n for n in self._nodes if n.kind is NodeKind(kind)]

    def count(self, kind: NodeKind | EdgeKind) -> int:
        if isinstance(kind, EdgeKind):
            return sum(e.kind is kind for e in self._edges)
        return sum(n.kind is NodeKind(kind) for n in self._nodes)

    def neighbors(self, nid: NodeId, kind: EdgeKind | None = None) -> list[tuple[NodeId, Edge]]:
        """Incident edges of ``nid`` (optionally of one kind), sorted by neighbor id."""
        self._check(nid)
        kind = EdgeKind(kind) if kind is not None else None
        out = [(other, e) for other, e in self._adj[nid] if kind is None or e.kind is kind]
        return sorted(out, key=lambda t: (t[0], t[1].kind.value))

    def event_by_id(self, event_id: str) -> Node:
        for n in self._nodes:
            if n.kind is NodeKind.EVENT and n.properties.get("event_id") == event_id:
                return n
        raise NodeLookupError(f"unknown event_id: {event_id!r}")

    def _index(self, kind):
        key = None if kind is None else NodeKind(kind)
        if key not in self._index_cache:
            ids = [n.id for n in self._nodes
                   if n.embedding is not None and (key is None or n.kind is key)]
            mat = (np.stack([self._nodes[i].embedding for i in ids])
                   if ids else np.zeros((0, self.dim)))
            self._index_cache[key] = (np.array(ids, dtype=np.int64), mat)
        return self._index_cache[key]

    def top_k_similar(self, query, k: int, kind: NodeKind | None = None
                      ) -> list[tuple[NodeId, float]]:
        """Exhaustive cosine search; ties broken by ascending node id."""
        query = np.asarray(query, dtype=np.float64)
        if query.shape != (self.dim,):
            raise ValueError(f"query must have dimension {self.dim}, got {query.shape}")
        if k < 1:
            raise ValueError("k must be >= 1")
        ids, mat = self._index(kind)
        if ids.size == 0:
            return []
        sims = np.clip(mat @ query, -1.0, 1.0)
        order = np.lexsort((ids, -sims))[:k]
        return [(int(ids[i]), float(sims[i])) for i in order]

    # -- interchange -----------------------------------------------------------

    def to_dict(self) -> dict:
        nodes = []
        for n in self._nodes:
            d = {"id": n.id, "kind": n.kind.value, "properties": n.properties}
            if n.embedding is not None:
                d["embedding"] = n.embedding.tolist()
            nodes.append(d)
        edges = [{"src": e.src, "dst": e.dst, "kind": e.kind.value, "weight": e.weight}
                 for e in self._edges]
        return {"dim": self.dim, "nodes": nodes, "edges": edges}

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    @classmethod
    def from_dict(cls, doc: dict) -> "PropertyGraph":
        g = cls(dim=int(doc.get("dim", DEFAULT_DIM)))
        for k, n in enumerate(doc["nodes"]):
            if int(n["id"]) != k:
                raise GraphConstructionError("node ids must be consecutive from 0")
            g.add_node(NodeKind(n["kind"]), n.get("properties"), n.get("embedding"))
        seen_near = set()
        for e in doc["edges"]:
            kind = EdgeKind(e["kind"])
            if kind is EdgeKind.NEAR:
                pair = (min(e["src"], e["dst"]), max(e["src"], e["dst"]))
                if pair in seen_near:
                    continue
                seen_near.add(pair)
            g.add_edge(int(e["src"]), int(e["dst"]), kind, e.get("weight"))
        return g

    @classmethod
    def from_json(cls, text: str) -> "PropertyGraph":
        return cls.from_dict(json.loads(text))


def event_properties(rec: EventRecord) -> dict:
    return {
        "event_id": rec.event_id,
        "event_date": rec.event_date.isoformat(),
        "latitude": rec.latitude,
        "longitude": rec.longitude,
        "location_description": rec.location_description,
        "location_accuracy": rec.location_accuracy.value,
        "fatality_count": rec.fatality_count,
        "injury_count": rec.injury_count,
        "event_title": rec.event_title,
        "event_description": rec.event_description,
        "landslide_size": rec.landslide_size.value,
        "trigger": rec.trigger,
    }


def build_knowledge_graph(records: Iterable[EventRecord],
                          embedder: EmbeddingProvider | None = None,
                          near_km: float | None = 50.0) -> PropertyGraph:
    """Build the event knowledge graph.

    One Event node per record (embedded from its description); Source,
    GazetteerPoint and LandslideProfile nodes are deduplicated by
    ``catalog.source_key`` / ``gazetteer_key`` / ``profile_key``. When
    ``near_km`` is set, events within that distance are joined by NEAR edges.
    """
    records = list(records)
    embedder = embedder or HashingEmbedder()
    g = PropertyGraph(dim=embedder.dim)
    seen_ids = set()
    for r in records:
        if r.event_id in seen_ids:
            raise GraphConstructionError(f"duplicate event_id: {r.event_id}")
        seen_ids.add(r.event_id)

    sources: dict = {}
    points: dict = {}
    profiles: dict = {}
    event_nodes = []
    for r in records:
        eid = g.add_node(NodeKind.EVENT, event_properties(r), embedder.embed(r.event_description))
        event_nodes.append(eid)

        skey = source_key(r)
        if skey is not None:
            if skey not in sources:
                sources[skey] = g.add_node(
                    NodeKind.SOURCE, {"source_name": skey[0], "source_link": skey[1]},
                    embedder.embed(f"{skey[0]} {skey[1]}"))
            g.add_edge(eid, sources[skey], EdgeKind.HAS_SOURCE)

        gkey = gazetteer_key(r)
        if gkey not in points:
            points[gkey] = g.add_node(
                NodeKind.GAZETTEER_POINT,
                {"latitude": gkey[0], "longitude": gkey[1], "name": r.location_description},
                embedder.embed(r.location_description))
        g.add_edge(eid, points[gkey], EdgeKind.LOCATED_AT)

        pkey = profile_key(r)
        if pkey not in profiles:
            profiles[pkey] = g.add_node(
                NodeKind.LANDSLIDE_PROFILE, {"landslide_size": pkey[0], "trigger": pkey[1]},
                embedder.embed(f"{pkey[0].replace('_', ' ')} landslide {pkey[1]}"))
        g.add_edge(eid, profiles[pkey], EdgeKind.HAS_PROFILE)

    if near_km is not None and records:
        prox = build_proximity_graph(records, near_km)
        for i, j, d in prox.edges:
            g.add_edge(event_nodes[i], event_nodes[j], EdgeKind.NEAR, d)
    return g
