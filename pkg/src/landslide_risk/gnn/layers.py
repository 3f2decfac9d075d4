"""GCN, GAT and dense layers with explicit backward passes.

Every ``*_forward`` returns ``(output, cache)``; the matching ``*_backward``
takes the upstream gradient and the cache and returns parameter gradients
plus the gradient with respect to the layer input. Matrices are float64
numpy arrays; node sets are small enough for dense ``n x n`` operators.
"""
from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from ..spatial_graph import ProximityGraph


def as_adjacency(graph, n: int | None = None) -> np.ndarray:
    """Dense symmetric 0/1 adjacency (no self-loops) from a graph or array."""
    if isinstance(graph, ProximityGraph):
        a = graph.adjacency()
    else:
        a = np.asarray(graph, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ShapeError(f"adjacency must be square, got {a.shape}")
        a = (a != 0).astype(np.float64)
        np.fill_diagonal(a, 0.0)
    if n is not None and a.shape[0] != n:
        raise ShapeError(f"adjacency has {a.shape[0]} nodes, features have {n}")
    return a


def normalized_adjacency(adj: np.ndarray) -> np.ndarray:
    """D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I."""
    a_hat = adj + np.eye(adj.shape[0])
    d = 1.0 / np.sqrt(a_hat.sum(axis=1))
    return a_hat * d[:, None] * d[None, :]


def _check(x, w, what):
    if x.ndim != 2 or x.shape[1] != w.shape[-2]:
        raise ShapeError(f"{what}: input {x.shape} incompatible with weight {w.shape}")


# -- activations ------------------------------------------------------------

def relu(x):
    return np.maximum(x, 0.0)


def elu(x):
    return np.where(x > 0, x, np.expm1(np.minimum(x, 0.0)))


def elu_grad(x):
    return np.where(x > 0, 1.0, np.exp(np.minimum(x, 0.0)))


def leaky_relu(x, slope):
    return np.where(x > 0, x, slope * x)


def softmax_rows(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


# -- GCN --------------------------------------------------------------------

def gcn_forward(x, adj_norm, w, b):
    """ReLU(adj_norm @ x @ w + b); ``adj_norm`` from ``normalized_adjacency``."""
    _check(x, w, "gcn")
    if adj_norm.shape != (x.shape[0], x.shape[0]):
        raise ShapeError("gcn: adjacency does not match node count")
    ax = adj_norm @ x
    pre = ax @ w + b
    return relu(pre), (ax, pre, adj_norm, w)


def gcn_backward(dout, cache):
    ax, pre, adj_norm, w = cache
    dpre = dout * (pre > 0)
    dw = ax.T @ dpre
    db = dpre.sum(axis=0)
    dx = adj_norm.T @ (dpre @ w.T)
    return {"W": dw, "b": db}, dx


# -- GAT --------------------------------------------------------------------

def attention_mask(adj):
    """Boolean neighbourhood mask N(i) + {i}."""
    return (adj != 0) | np.eye(adj.shape[0], dtype=bool)


def gat_forward(h, mask, w, a_src, a_dst, slope=0.2):
    """Multi-head graph attention with ELU output, heads concatenated.

    ``w`` is ``(heads, in, out)``; ``a_src``/``a_dst`` are ``(heads, out)``,
    the two halves of the attention vector applied to the receiving node i
    and the neighbour j. Returns ``(n, heads*out)``.
    """
    _check(h, w, "gat")
    heads, _, f = w.shape
    if a_src.shape != (heads, f) or a_dst.shape != (heads, f):
        raise ShapeError("gat: attention vectors do not match weight shape")
    n = h.shape[0]
    if mask.shape != (n, n):
        raise ShapeError("gat: mask does not match node count")
    z = np.einsum("nd,kdf->knf", h, w)
    s_src = np.einsum("knf,kf->kn", z, a_src)
    s_dst = np.einsum("knf,kf->kn", z, a_dst)
    e = s_src[:, :, None] + s_dst[:, None, :]
    logits = np.where(mask, leaky_relu(e, slope), -np.inf)
    alpha = softmax_rows(logits)
    pre = alpha @ z
    out = elu(pre)
    out_flat = out.transpose(1, 0, 2).reshape(n, heads * f)
    return out_flat, (h, z, e, alpha, pre, mask, w, a_src, a_dst, slope)


def gat_attention(cache):
    """Attention coefficients ``(heads, n, n)`` from a forward cache."""
    return cache[3]


def gat_backward(dout_flat, cache):
    h, z, e, alpha, pre, mask, w, a_src, a_dst, slope = cache
    heads, n, f = z.shape
    dout = dout_flat.reshape(n, heads, f).transpose(1, 0, 2)
    dpre = dout * elu_grad(pre)
    dalpha = dpre @ z.transpose(0, 2, 1)
    dz = alpha.transpose(0, 2, 1) @ dpre
    dlogit = alpha * (dalpha - np.sum(alpha * dalpha, axis=-1, keepdims=True))
    de = np.where(mask, dlogit * np.where(e > 0, 1.0, slope), 0.0)
    ds_src = de.sum(axis=2)
    ds_dst = de.sum(axis=1)
    dz += ds_src[:, :, None] * a_src[:, None, :] + ds_dst[:, :, None] * a_dst[:, None, :]
    grads = {
        "W": np.einsum("nd,knf->kdf", h, dz),
        "a_src": np.einsum("knf,kn->kf", z, ds_src),
        "a_dst": np.einsum("knf,kn->kf", z, ds_dst),
    }
    dh = np.einsum("knf,kdf->nd", dz, w)
    return grads, dh


# -- dense ------------------------------------------------------------------

def dense_forward(x, w, b, activation=None):
    _check(x, w, "dense")
    pre = x @ w + b
    out = relu(pre) if activation == "relu" else pre
    return out, (x, pre, w, activation)


def dense_backward(dout, cache):
    x, pre, w, activation = cache
    dpre = dout * (pre > 0) if activation == "relu" else dout
    return {"W": x.T @ dpre, "b": dpre.sum(axis=0)}, dpre @ w.T


# -- dropout ----------------------------------------------------------------

def dropout_mask(rng, shape, rate):
    if rate <= 0.0 or rng is None:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)
