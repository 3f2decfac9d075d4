"""Deterministic text embeddings and cosine similarity."""
from __future__ import annotations

import re
from typing import Protocol

import numpy as np
import xxhash

DEFAULT_DIM = 256
HASH_SEED = 0x5EED
_TOKEN = re.compile(r"[a-z0-9]+")


class EmbeddingProvider(Protocol):
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def tokenize(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


class HashingEmbedder:
    """Signed feature-hashing bag of words.

    Each lowercase alphanumeric token is hashed with xxh64 (fixed seed); the
    low bits pick a bucket and the top bit picks the sign. Counts accumulate
    and the vector is L2-normalised. Text without tokens maps to ``e0``.
    """

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = HASH_SEED):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed

    def embed(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim)
        for tok in tokenize(text or ""):
            h = xxhash.xxh64_intdigest(tok.encode("utf-8"), seed=self.seed)
            vec[h % self.dim] += -1.0 if h >> 63 else 1.0
        norm = np.linalg.norm(vec)
        if norm == 0.0:
            # all-cancelling token sets land here too
            vec[:] = 0.0
            vec[0] = 1.0
            return vec
        return vec / norm

    __call__ = embed


_default = HashingEmbedder()


def embed_text(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Embed with the bundled hashing provider."""
    return (_default if dim == DEFAULT_DIM else HashingEmbedder(dim)).embed(text)


def cosine(a, b) -> float:
    """Cosine of two unit vectors, clamped to [-1, 1]."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(min(1.0, max(-1.0, float(np.dot(a, b)))))
