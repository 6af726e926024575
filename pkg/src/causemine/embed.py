"""Embedding providers and cosine similarity.

Four interchangeable providers produce phrase vectors: a precomputed
lookup file, a remote HTTP service, an average over word vectors, and a
deterministic hash-based provider for fixtures and offline runs. All of
them expose model_id, dimension, and embed(texts) -> (n, d) array.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path

import httpx
import numpy as np
from numpy.typing import NDArray

from .errors import (
    AllTokensUnknownError,
    ConfigError,
    DimensionMismatchError,
    ProviderUnavailableError,
    UndefinedSimilarityError,
    UnknownPhraseError,
)


def cosine_similarity(u: NDArray, v: NDArray) -> float:
    """Dot product over the product of norms; zero-norm input is undefined."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"vector shapes differ: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise UndefinedSimilarityError("cosine similarity of a zero vector is undefined")
    return float(np.dot(u, v) / (nu * nv))


class PrecomputedFileProvider:
    """Phrase -> vector lookup backed by a JSONL file {"phrase", "vector"}."""

    def __init__(self, path: str | Path, model_id: str):
        self.model_id = model_id
        self._table: dict[str, NDArray] = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                vec = np.asarray(row["vector"], dtype=np.float64)
                if dim is None:
                    dim = vec.shape[0]
                elif vec.shape[0] != dim:
                    raise DimensionMismatchError(
                        f"{row['phrase']!r} has dimension {vec.shape[0]}, expected {dim}"
                    )
                self._table[row["phrase"]] = vec
        if dim is None:
            raise ConfigError(f"no vectors found in {path}")
        self.dimension = int(dim)

    def embed(self, texts: list[str]) -> NDArray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            vec = self._table.get(text)
            if vec is None:
                raise UnknownPhraseError(f"no precomputed vector for {text!r}")
            out[i] = vec
        return out


class HttpEmbeddingProvider:
    """Client for POST /embed {model, texts} -> {vectors}; GET /info -> dimension."""

    def __init__(self, base_url: str, model_id: str, batch_size: int = 64,
                 timeout: float = 10.0, retries: int = 2,
                 client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.model_id = model_id
        self.batch_size = max(1, batch_size)
        self.retries = retries
        self._client = client or httpx.Client(timeout=timeout)
        self.dimension = int(self._request("GET", "/info").get("dimension"))

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        last_err: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = self._client.request(method, f"{self.base_url}{path}", json=payload)
                resp.raise_for_status()
                return resp.json()
            except Exception as exc:  # noqa: BLE001 - retried, then surfaced
                last_err = exc
        raise ProviderUnavailableError(
            f"embedding service at {self.base_url} unreachable: {last_err}"
        )

    def embed(self, texts: list[str]) -> NDArray:
        rows: list[list[float]] = []
        for i in range(0, len(texts), self.batch_size):
            batch = texts[i:i + self.batch_size]
            data = self._request("POST", "/embed", {"model": self.model_id, "texts": batch})
            vectors = data.get("vectors")
            if not isinstance(vectors, list) or len(vectors) != len(batch):
                raise ProviderUnavailableError(
                    f"embedding service returned {len(vectors) if isinstance(vectors, list) else 'no'} "
                    f"vectors for {len(batch)} texts"
                )
            rows.extend(vectors)
        arr = np.asarray(rows, dtype=np.float64)
        if arr.size and arr.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"service returned dimension {arr.shape[1]}, /info said {self.dimension}"
            )
        return arr.reshape(len(texts), self.dimension)


class WordVectorAverageProvider:
    """Phrase vector = mean of its tokens' word vectors; unknown tokens skipped.

    The table is word2vec text format: `word v1 v2 ...` per line, with an
    optional `count dim` header. A phrase with no known token at all is an
    error rather than a silent zero.
    """

    def __init__(self, path: str | Path, model_id: str):
        self.model_id = model_id
        self._table: dict[str, NDArray] = {}
        dim = None
        with open(path, encoding="utf-8") as fh:
            for n, line in enumerate(fh):
                parts = line.rstrip().split(" ")
                if n == 0 and len(parts) == 2:
                    continue  # header
                if len(parts) < 2:
                    continue
                vec = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
                if dim is None:
                    dim = vec.shape[0]
                elif vec.shape[0] != dim:
                    raise DimensionMismatchError(
                        f"word {parts[0]!r} has dimension {vec.shape[0]}, expected {dim}"
                    )
                self._table[parts[0].lower()] = vec
        if dim is None:
            raise ConfigError(f"no word vectors found in {path}")
        self.dimension = int(dim)

    def embed(self, texts: list[str]) -> NDArray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            hits = [self._table[w] for w in text.lower().split() if w in self._table]
            if not hits:
                raise AllTokensUnknownError(f"no known word vectors in {text!r}")
            out[i] = np.mean(hits, axis=0)
        return out


class HashEmbeddingProvider:
    """Deterministic embeddings derived from sha256 digests.

    Each token hashes to a fixed pseudo-random vector; a phrase embeds as
    the L2-normalized mean of its token vectors. Self-contained, stable
    across runs and platforms, and cheap at any scale.
    """

    def __init__(self, model_id: str, dimension: int = 64):
        if dimension < 1:
            raise ConfigError("dimension must be positive")
        self.model_id = model_id
        self.dimension = int(dimension)
        self._cache: dict[str, NDArray] = {}

    def _token_vector(self, token: str) -> NDArray:
        cached = self._cache.get(token)
        if cached is not None:
            return cached
        values: list[float] = []
        block = 0
        while len(values) < self.dimension:
            digest = hashlib.sha256(f"{self.model_id}:{token}#{block}".encode("utf-8")).digest()
            words = np.frombuffer(digest, dtype=">u4")
            values.extend((words.astype(np.float64) / 2**31) - 1.0)
            block += 1
        vec = np.asarray(values[: self.dimension], dtype=np.float64)
        self._cache[token] = vec
        return vec

    def embed(self, texts: list[str]) -> NDArray:
        out = np.empty((len(texts), self.dimension), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = text.lower().split() or [""]
            mean = np.mean([self._token_vector(t) for t in tokens], axis=0)
            norm = float(np.linalg.norm(mean))
            out[i] = mean / norm if norm > 0 else mean
        return out


def make_provider(spec: dict):
    """Build a provider from its config entry: {model_id, kind, ...}."""
    kind = spec.get("kind")
    model_id = spec.get("model_id")
    if not model_id:
        raise ConfigError(f"embedding provider entry missing model_id: {spec}")
    if kind == "precomputed_file":
        return PrecomputedFileProvider(spec["path"], model_id)
    if kind == "http_service":
        return HttpEmbeddingProvider(
            spec["base_url"], model_id,
            batch_size=int(spec.get("batch_size", 64)),
            timeout=float(spec.get("timeout", 10.0)),
            retries=int(spec.get("retries", 2)),
        )
    if kind == "word_vector_average":
        return WordVectorAverageProvider(spec["path"], model_id)
    if kind == "hash":
        return HashEmbeddingProvider(model_id, dimension=int(spec.get("dimension", 64)))
    raise ConfigError(f"unknown embedding provider kind: {kind!r}")
