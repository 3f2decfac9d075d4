"""GCN -> GAT -> GAT -> dense -> dense risk classifier."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ..errors import ShapeError
from ..features import FEATURE_DIM
from . import layers as L

N_CLASSES = 3


@dataclass(frozen=True)
class ModelConfig:
    in_dim: int = FEATURE_DIM
    gcn_hidden: int = 128
    gat_heads: int = 4
    gat_head_dim: int = 32
    gat2_out: int = 64
    head_hidden: int = 64
    n_classes: int = N_CLASSES
    leaky_relu_slope: float = 0.2
    dropout_rate: float = 0.0

    def __post_init__(self):
        dims = (self.in_dim, self.gcn_hidden, self.gat_heads, self.gat_head_dim,
                self.gat2_out, self.head_hidden, self.n_classes)
        if any(int(d) < 1 for d in dims):
            raise ValueError("all model dimensions must be >= 1")
        if self.gat_heads * self.gat_head_dim != self.gcn_hidden:
            raise ValueError("gat_heads * gat_head_dim must equal gcn_hidden")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout_rate must be in [0, 1)")

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)

    def shapes(self) -> dict[str, tuple[int, ...]]:
        """Parameter name -> shape, in canonical order."""
        h, k, f, g = self.gcn_hidden, self.gat_heads, self.gat_head_dim, self.gat2_out
        return {
            "gcn.W": (self.in_dim, h),
            "gcn.b": (h,),
            "gat1.W": (k, h, f),
            "gat1.a_src": (k, f),
            "gat1.a_dst": (k, f),
            "gat2.W": (1, k * f, g),
            "gat2.a_src": (1, g),
            "gat2.a_dst": (1, g),
            "head.W": (g, self.head_hidden),
            "head.b": (self.head_hidden,),
            "out.W": (self.head_hidden, self.n_classes),
            "out.b": (self.n_classes,),
        }


def param_count(config: ModelConfig) -> int:
    return int(sum(np.prod(s) for s in config.shapes().values()))


def _glorot_limit(name, shape):
    if name.endswith(".W"):
        fan_in, fan_out = shape[-2], shape[-1]
    else:  # attention halves: one (2f x 1) vector per head
        fan_in, fan_out = 2 * shape[-1], 1
    return np.sqrt(6.0 / (fan_in + fan_out))


def init_params(config: ModelConfig, seed: int = 0) -> dict[str, np.ndarray]:
    """Glorot-uniform weights and attention vectors, zero biases."""
    rng = np.random.default_rng(seed)
    params = {}
    for name, shape in config.shapes().items():
        if name.endswith(".b"):
            params[name] = np.zeros(shape)
        else:
            lim = _glorot_limit(name, shape)
            params[name] = rng.uniform(-lim, lim, size=shape)
    return params


def check_params(config: ModelConfig, params: dict) -> None:
    for name, shape in config.shapes().items():
        if name not in params:
            raise ShapeError(f"missing parameter {name}")
        if params[name].shape != shape:
            raise ShapeError(f"{name}: expected {shape}, got {params[name].shape}")


class GraphInput:
    """Precomputed graph operators for one node set."""

    def __init__(self, graph, n: int):
        adj = L.as_adjacency(graph, n)
        self.n = n
        self.adj_norm = L.normalized_adjacency(adj)
        self.mask = L.attention_mask(adj)


def _graph_input(graph, n):
    return graph if isinstance(graph, GraphInput) else GraphInput(graph, n)


def forward(config: ModelConfig, params: dict, x, graph, rng=None):
    """Full forward pass. Returns ``(logits, probabilities, cache)``.

    Dropout is applied to hidden activations only when ``rng`` is given and
    ``config.dropout_rate > 0``.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != config.in_dim:
        raise ShapeError(f"features must be (n, {config.in_dim}), got {x.shape}")
    check_params(config, params)
    g = _graph_input(graph, x.shape[0])
    p, slope = params, config.leaky_relu_slope
    masks = []

    def drop(h):
        m = L.dropout_mask(rng, h.shape, config.dropout_rate)
        masks.append(m)
        return h if m is None else h * m

    h1, c1 = L.gcn_forward(x, g.adj_norm, p["gcn.W"], p["gcn.b"])
    h2, c2 = L.gat_forward(drop(h1), g.mask, p["gat1.W"], p["gat1.a_src"], p["gat1.a_dst"], slope)
    h3, c3 = L.gat_forward(drop(h2), g.mask, p["gat2.W"], p["gat2.a_src"], p["gat2.a_dst"], slope)
    h4, c4 = L.dense_forward(drop(h3), p["head.W"], p["head.b"], "relu")
    logits, c5 = L.dense_forward(h4, p["out.W"], p["out.b"])
    probs = L.softmax_rows(logits)
    return logits, probs, (c1, c2, c3, c4, c5, masks)


def model_forward(config: ModelConfig, params: dict, x, graph):
    """Deterministic inference: ``(logits, probabilities)``."""
    logits, probs, _ = forward(config, params, x, graph)
    return logits, probs


def attention_weights(config, params, x, graph):
    """Attention coefficients of both GAT layers, each ``(heads, n, n)``."""
    _, _, cache = forward(config, params, x, graph)
    return L.gat_attention(cache[1]), L.gat_attention(cache[2])


def cross_entropy(probs, labels, mask) -> float:
    mask = np.asarray(mask)
    if mask.size == 0:
        raise ValueError("empty training mask")
    picked = probs[mask, np.asarray(labels)[mask]]
    return float(-np.mean(np.log(np.maximum(picked, 1e-300))))


def loss_and_grads(config: ModelConfig, params: dict, x, graph, labels, mask, rng=None):
    """Mean cross-entropy over ``mask`` and its gradient for every parameter."""
    mask = np.asarray(mask, dtype=np.int64)
    if mask.size == 0:
        raise ValueError("empty training mask")
    labels = np.asarray(labels, dtype=np.int64)
    _, probs, cache = forward(config, params, x, graph, rng)
    loss = cross_entropy(probs, labels, mask)
    c1, c2, c3, c4, c5, masks = cache

    dlogits = np.zeros_like(probs)
    np.add.at(dlogits, mask, probs[mask])
    np.add.at(dlogits, (mask, labels[mask]), -1.0)
    dlogits /= mask.size

    grads = {}

    def put(prefix, g):
        for k, v in g.items():
            grads[f"{prefix}.{k}"] = v

    def undrop(dh, m):
        return dh if m is None else dh * m

    g5, dh4 = L.dense_backward(dlogits, c5)
    put("out", g5)
    g4, dh3 = L.dense_backward(dh4, c4)
    put("head", g4)
    g3, dh2 = L.gat_backward(undrop(dh3, masks[2]), c3)
    put("gat2", g3)
    g2, dh1 = L.gat_backward(undrop(dh2, masks[1]), c2)
    put("gat1", g2)
    g1, _ = L.gcn_backward(undrop(dh1, masks[0]), c1)
    put("gcn", g1)
    return loss, {name: grads[name] for name in config.shapes()}


def predict(config, params, x, graph):
    """Predicted class, confidence (max probability) and probabilities."""
    _, probs = model_forward(config, params, x, graph)
    return probs.argmax(axis=1), probs.max(axis=1), probs


# -- checkpoints ------------------------------------------------------------

def _num(v: float) -> str:
    return format(float(v), ".17g")


def checkpoint_json(config: ModelConfig, params: dict, extra: dict | None = None) -> str:
    """Config plus flat row-major parameter arrays at 17 significant digits."""
    parts = []
    for name, shape in config.shapes().items():
        flat = ",".join(_num(v) for v in np.asarray(params[name]).ravel())
        parts.append(f'{json.dumps(name)}: {{"shape": {json.dumps(list(shape))}, "data": [{flat}]}}')
    head = {"config": config.to_dict()}
    if extra:
        head["meta"] = extra
    text = json.dumps(head, sort_keys=True)[:-1]
    return text + ', "params": {' + ", ".join(parts) + "}}\n"


def save_checkpoint(path, config, params, extra=None) -> None:
    Path(path).write_text(checkpoint_json(config, params, extra), encoding="utf-8")


def load_checkpoint(path) -> tuple[ModelConfig, dict, dict]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    config = ModelConfig.from_dict(doc["config"])
    params = {name: np.array(v["data"], dtype=np.float64).reshape(v["shape"])
              for name, v in doc["params"].items()}
    check_params(config, params)
    return config, params, doc.get("meta", {})
