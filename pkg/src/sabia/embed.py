"""Embeddings: a deterministic local hashing embedder, a remote HTTP
provider client, and cosine similarity over unit-norm vectors.

Vectors are normalized when produced, so cosine reduces to a plain dot
product everywhere downstream.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Protocol, Sequence

import httpx

from .tokenization import tokenize

NORM_TOLERANCE = 1e-9
REMOTE_TIMEOUT_S = 30.0

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
_SIGN_BIT = 1 << 63


class EmbeddingError(Exception):
    """Base error for embedding production."""


class EmbedProviderError(EmbeddingError):
    """Remote provider returned a non-2xx response or malformed payload."""


class EmbedTimeoutError(EmbeddingError):
    """Remote provider did not answer in time."""


class EmbedIntegrityError(EmbeddingError):
    """Provider payload violates the configured contract (e.g. wrong dim)."""


@dataclass(frozen=True)
class Embedding:
    """Unit-norm vector tagged with the embedder that produced it."""

    values: tuple[float, ...]
    dim: int
    embedder_id: str

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError("dim must be positive")
        if len(self.values) != self.dim:
            raise ValueError(f"expected {self.dim} values, got {len(self.values)}")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding values must be finite")
        norm = math.sqrt(math.fsum(v * v for v in self.values))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"embedding is not unit-norm (|v| = {norm!r})")


@dataclass(frozen=True)
class EmbedderConfig:
    kind: str  # "remote" | "local_hash"
    endpoint_url: str | None = None
    api_key_env: str | None = None
    model_name: str | None = None
    dim: int = 768

    def __post_init__(self) -> None:
        if self.kind not in ("remote", "local_hash"):
            raise ValueError(f"unknown embedder kind: {self.kind!r}")
        if self.kind == "remote" and not self.endpoint_url:
            raise ValueError("remote embedder requires endpoint_url")
        if self.dim <= 0:
            raise ValueError("dim must be positive")


def fnv1a_64(data: bytes) -> int:
    """64-bit FNV-1a hash; identical on every platform."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def local_embedder_id(dim: int) -> str:
    return f"fnv1a64-bag-{dim}"


def hash_embed(text: str, dim: int) -> Embedding:
    """Deterministic bag-of-tokens signed-hash embedding.

    Each token's FNV-1a 64-bit hash selects an index (hash mod dim) and a
    sign (top hash bit set means negative); contributions accumulate and
    the vector is L2-normalized. Order-invariant by construction.
    """
    if dim <= 0:
        raise ValueError("dim must be positive")
    tokens = tokenize(text)
    if not tokens:
        raise EmbeddingError("empty text")
    acc = [0.0] * dim
    hashes = []
    for token in tokens:
        h = fnv1a_64(token.encode("utf-8"))
        hashes.append(h)
        acc[h % dim] += -1.0 if h & _SIGN_BIT else 1.0
    norm = math.sqrt(math.fsum(v * v for v in acc))
    if norm == 0.0:
        # Full sign cancellation (possible at tiny dims): fall back to a
        # one-hot keyed by the smallest token hash, still a pure function
        # of the token bag.
        acc[min(hashes) % dim] = 1.0
        norm = 1.0
    values = tuple(v / norm for v in acc)
    return Embedding(values=values, dim=dim, embedder_id=local_embedder_id(dim))


def remote_embed(cfg: EmbedderConfig, texts: Sequence[str]) -> list[Embedding]:
    """Fetch embeddings for `texts` from the configured HTTP provider.

    POSTs {"model", "input"} to `{endpoint_url}/embeddings` and expects
    {"data": [{"index": i, "embedding": [...]}, ...]}. Vectors are
    normalized on receipt and tagged with cfg.model_name.
    """
    if cfg.kind != "remote":
        raise ValueError("remote_embed requires a remote embedder config")
    if not texts:
        raise ValueError("texts must be nonempty")
    headers = {"Content-Type": "application/json"}
    if cfg.api_key_env:
        key = os.environ.get(cfg.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
    url = cfg.endpoint_url.rstrip("/") + "/embeddings"
    try:
        resp = httpx.post(
            url,
            json={"model": cfg.model_name, "input": list(texts)},
            headers=headers,
            timeout=REMOTE_TIMEOUT_S,
        )
    except httpx.TimeoutException as exc:
        raise EmbedTimeoutError(f"embedding provider timed out after {REMOTE_TIMEOUT_S}s") from exc
    if not 200 <= resp.status_code < 300:
        raise EmbedProviderError(
            f"embedding provider returned {resp.status_code}: {resp.text[:200]}"
        )
    try:
        data = resp.json()["data"]
        rows = sorted(data, key=lambda item: item["index"])
        vectors = [[float(v) for v in row["embedding"]] for row in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise EmbedProviderError(f"malformed embedding payload: {exc}") from exc
    if len(vectors) != len(texts):
        raise EmbedIntegrityError(
            f"provider returned {len(vectors)} embeddings for {len(texts)} inputs"
        )
    out = []
    for i, vec in enumerate(vectors):
        if len(vec) != cfg.dim:
            raise EmbedIntegrityError(
                f"embedding {i}: expected dim {cfg.dim}, got {len(vec)}"
            )
        if not all(math.isfinite(v) for v in vec):
            raise EmbedIntegrityError(f"embedding {i}: non-finite values")
        norm = math.sqrt(math.fsum(v * v for v in vec))
        if norm == 0.0:
            raise EmbedIntegrityError(f"embedding {i}: zero vector")
        out.append(
            Embedding(
                values=tuple(v / norm for v in vec),
                dim=cfg.dim,
                embedder_id=cfg.model_name or "remote",
            )
        )
    return out


def cosine(a: Embedding, b: Embedding) -> float:
    """Cosine similarity of two unit-norm embeddings, clamped to [-1, 1]."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    dot = math.fsum(x * y for x, y in zip(a.values, b.values))
    return max(-1.0, min(1.0, dot))


class Embedder(Protocol):
    """Anything that can turn text into tagged unit-norm embeddings."""

    embedder_id: str

    def embed(self, text: str) -> Embedding: ...

    def embed_many(self, texts: Sequence[str]) -> list[Embedding]: ...


class LocalHashEmbedder:
    """Offline stand-in for a hosted embedding model; fully deterministic."""

    def __init__(self, dim: int = 768):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.embedder_id = local_embedder_id(dim)

    def embed(self, text: str) -> Embedding:
        return hash_embed(text, self.dim)

    def embed_many(self, texts: Sequence[str]) -> list[Embedding]:
        return [hash_embed(t, self.dim) for t in texts]


class RemoteEmbedder:
    """Thin wrapper binding an EmbedderConfig to the Embedder protocol."""

    def __init__(self, cfg: EmbedderConfig):
        if cfg.kind != "remote":
            raise ValueError("RemoteEmbedder requires a remote config")
        self.cfg = cfg
        self.embedder_id = cfg.model_name or "remote"

    def embed(self, text: str) -> Embedding:
        return remote_embed(self.cfg, [text])[0]

    def embed_many(self, texts: Sequence[str]) -> list[Embedding]:
        return remote_embed(self.cfg, texts)


def make_embedder(cfg: EmbedderConfig) -> Embedder:
    if cfg.kind == "local_hash":
        return LocalHashEmbedder(cfg.dim)
    return RemoteEmbedder(cfg)
