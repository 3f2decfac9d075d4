"""Hybrid vector + graph retrieval, prompt assembly and coherence metrics."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Protocol, Sequence

import numpy as np

from .embedding import EmbeddingProvider, HashingEmbedder, cosine
from .errors import RetrievalError
from .graph_store import EdgeKind, Node, NodeKind, PropertyGraph

VECTOR_HIT = "vector-hit"
GRAPH_EXPANSION = "graph-expansion"
EXPANSION_EDGES = (EdgeKind.HAS_SOURCE, EdgeKind.LOCATED_AT, EdgeKind.HAS_PROFILE)

PROMPT_SECTIONS = (
    "Risk Patterns",
    "Geographic Distribution",
    "Temporal Trends",
    "Trigger Mechanisms",
    "Climate Change Implications",
)


@dataclass(frozen=True)
class RetrievedNode:
    node_id: int
    similarity: float
    provenance: str


@dataclass(frozen=True)
class RetrievalResult:
    query: str
    items: tuple[RetrievedNode, ...]

    def __len__(self):
        return len(self.items)

    @property
    def node_ids(self) -> list[int]:
        return [it.node_id for it in self.items]

    def to_dict(self) -> dict:
        return {"query": self.query, "items": [asdict(it) for it in self.items]}


def retrieve(graph: PropertyGraph, query: str, k: int = 5, expand: bool = False,
             provider: EmbeddingProvider | None = None) -> RetrievalResult:
    """Top-k Event nodes by cosine similarity, optionally followed by their
    one-hop Source / GazetteerPoint / LandslideProfile neighbours."""
    if k < 1:
        raise ValueError("k must be >= 1")
    provider = provider or HashingEmbedder(graph.dim)
    hits = graph.top_k_similar(provider.embed(query), k, NodeKind.EVENT)
    if not hits:
        raise RetrievalError("graph has no embedded Event nodes")
    items = [RetrievedNode(nid, sim, VECTOR_HIT) for nid, sim in hits]
    if expand:
        qvec = provider.embed(query)
        seen = {nid for nid, _ in hits}
        for nid, _ in hits:
            for other, edge in graph.neighbors(nid):
                if edge.kind not in EXPANSION_EDGES or other in seen:
                    continue
                seen.add(other)
                emb = graph.node(other).embedding
                sim = cosine(qvec, emb) if emb is not None else float("nan")
                items.append(RetrievedNode(other, sim, GRAPH_EXPANSION))
    return RetrievalResult(query, tuple(items))


def node_text(node: Node) -> str:
    """Text used to embed or compare a retrieved node."""
    p = node.properties
    if node.kind is NodeKind.EVENT:
        return p.get("event_description", "")
    if node.kind is NodeKind.SOURCE:
        return f"{p.get('source_name', '')} {p.get('source_link', '')}".strip()
    if node.kind is NodeKind.GAZETTEER_POINT:
        return p.get("name", "")
    return f"{p.get('landslide_size', '').replace('_', ' ')} landslide {p.get('trigger', '')}".strip()


# -- coherence ------------------------------------------------------------------

@dataclass(frozen=True)
class CompositeWeights:
    weighted: float = 0.45
    average: float = 0.35
    maximum: float = 0.10
    minimum: float = 0.10


@dataclass(frozen=True)
class CoherenceReport:
    avg_similarity: float
    weighted_similarity: float
    max_similarity: float
    min_similarity: float
    diversity: float
    overall: float
    k: int

    def to_dict(self) -> dict:
        return asdict(self)


def rank_weights(k: int) -> np.ndarray:
    """1 / log2(rank + 1) for ranks 1..k."""
    return 1.0 / np.log2(np.arange(2, k + 2))


def coherence_from_vectors(retrieved: np.ndarray, truth: np.ndarray,
                           weights: CompositeWeights = CompositeWeights()) -> CoherenceReport:
    retrieved = np.atleast_2d(np.asarray(retrieved, dtype=np.float64))
    k = retrieved.shape[0]
    if k == 0:
        raise ValueError("need at least one retrieved item")
    s = np.clip(retrieved @ np.asarray(truth, dtype=np.float64), -1.0, 1.0)
    w = rank_weights(k)
    avg = float(np.mean(s))
    weighted = float(np.dot(w, s) / w.sum())
    smax, smin = float(s.max()), float(s.min())
    # keep the convex-combination bounds exact under rounding
    avg = min(max(avg, smin), smax)
    weighted = min(max(weighted, smin), smax)
    if k > 1:
        gram = np.clip(retrieved @ retrieved.T, -1.0, 1.0)
        iu = np.triu_indices(k, 1)
        diversity = float(np.mean(1.0 - gram[iu]))
    else:
        diversity = 0.0
    overall = (weights.weighted * weighted + weights.average * avg
               + weights.maximum * smax + weights.minimum * smin)
    return CoherenceReport(avg, weighted, smax, smin, max(0.0, diversity),
                           min(1.0, max(0.0, overall)), k)


def coherence(retrieved_texts: Sequence[str], ground_truth: str,
              provider: EmbeddingProvider | None = None,
              weights: CompositeWeights = CompositeWeights()) -> CoherenceReport:
    """Similarity of ranked retrieved texts to a ground-truth text.

    Components: mean, rank-weighted (1/log2(i+1)), max and min cosine to the
    truth; diversity as mean pairwise cosine distance; ``overall`` a fixed
    weighted blend of the four similarity components, clamped to [0, 1].
    """
    if not retrieved_texts:
        raise ValueError("empty retrieval")
    provider = provider or HashingEmbedder()
    vecs = np.stack([provider.embed(t) for t in retrieved_texts])
    return coherence_from_vectors(vecs, provider.embed(ground_truth), weights)


def aggregate_reports(reports: Sequence[CoherenceReport]) -> dict:
    """Componentwise mean of several reports."""
    if not reports:
        return {}
    keys = ("avg_similarity", "weighted_similarity", "max_similarity", "min_similarity",
            "diversity", "overall")
    out = {key: float(np.mean([getattr(r, key) for r in reports])) for key in keys}
    out["n_queries"] = len(reports)
    return out


def evaluate_batch(graph: PropertyGraph, items: Sequence[dict], k: int = 5,
                   expand: bool = False, provider: EmbeddingProvider | None = None) -> dict:
    """Run ``{query, ground_truth}`` pairs through retrieval and score them."""
    provider = provider or HashingEmbedder(graph.dim)
    reports = []
    for item in items:
        if "query" not in item or "ground_truth" not in item:
            raise ValueError("each batch item needs 'query' and 'ground_truth'")
        res = retrieve(graph, item["query"], k, expand, provider)
        texts = [node_text(graph.node(nid)) for nid in res.node_ids]
        reports.append(coherence(texts, item["ground_truth"], provider))
    return {"reports": [r.to_dict() for r in reports], "aggregate": aggregate_reports(reports)}


# -- prompt assembly ---------------------------------------------------------------

def _context_block(k: int, node: Node, item: RetrievedNode) -> str:
    p = node.properties
    lines = [f"### Context {k}: {node.kind.value} (node {node.id}, {item.provenance})"]
    if node.kind is NodeKind.EVENT:
        lines += [
            f"Title: {p.get('event_title', '')}",
            f"Date: {p.get('event_date', '')}",
            f"Location: {p.get('location_description', '')} "
            f"({p.get('latitude', 0.0):.4f}, {p.get('longitude', 0.0):.4f})",
            f"Impact: fatalities {p.get('fatality_count', 0)}, injuries {p.get('injury_count', 0)}",
            f"Profile: {p.get('landslide_size', 'unknown')}, trigger {p.get('trigger') or 'unknown'}",
            f"Narrative: {p.get('event_description', '')}",
        ]
    else:
        lines += [f"{key}: {p[key]}" for key in sorted(p)]
    return "\n".join(lines)


def render_prompt(query: str, retrieval: RetrievalResult, graph: PropertyGraph) -> str:
    """Analysis prompt: task, retrieved context blocks, required answer sections."""
    if not len(retrieval):
        raise ValueError("retrieval is empty")
    blocks = [_context_block(k, graph.node(it.node_id), it)
              for k, it in enumerate(retrieval.items, start=1)]
    sections = "\n".join(f"## {name}\n<analysis>" for name in PROMPT_SECTIONS)
    return (
        "You are a landslide risk analyst for High Mountain Asia.\n"
        f"Question: {query}\n\n"
        "Use only the retrieved records below.\n\n"
        + "\n\n".join(blocks)
        + "\n\nWrite the assessment under these headings:\n\n"
        + sections + "\n"
    )


class AnswerGenerator(Protocol):
    def __call__(self, prompt: str) -> str: ...


def echo_generator(prompt: str) -> str:
    """Offline stand-in for a language model: returns the context portion."""
    start = prompt.find("### Context")
    end = prompt.find("\n\nWrite the assessment")
    return prompt[start:end] if start >= 0 else ""


def answer(query: str, graph: PropertyGraph, k: int = 5, expand: bool = True,
           generator: Callable[[str], str] = echo_generator) -> str:
    res = retrieve(graph, query, k, expand)
    return generator(render_prompt(query, res, graph))
