"""Binned vector store with exact cosine scans and soft deletion.

Vectors live in fixed-size bins allocated up front; unfilled slots stay
zero so capacity is always a whole number of bins. Deletion only clears
an active flag. Scans are exhaustive and exact: every active vector is
compared, in float64, against the query. Zero-norm entries are storable
(their similarity is undefined, so they can never match or be removed).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, DimensionMismatchError, UndefinedSimilarityError

DEFAULT_BIN_SIZE = 40_000


@dataclass(frozen=True)
class SearchHit:
    entry_id: str
    score: float
    slot: int


class BinnedVectorStore:
    def __init__(self, model_id: str, dimension: int, bin_size: int = DEFAULT_BIN_SIZE,
                 dtype=np.float32):
        if dimension < 1:
            raise ConfigError("dimension must be positive")
        if bin_size < 1:
            raise ConfigError("bin_size must be positive")
        self.model_id = model_id
        self.dimension = int(dimension)
        self.bin_size = int(bin_size)
        self.dtype = np.dtype(dtype)
        self._bins: list[NDArray] = []
        self._norms: list[NDArray] = []    # float64 norms of stored values
        self._active: list[NDArray] = []   # bool per slot
        self._ids: list[str] = []          # one per appended slot, tail order
        self._count_total = 0              # appended slots, holes included

    # -- capacity bookkeeping -------------------------------------------------

    @property
    def capacity(self) -> int:
        return len(self._bins) * self.bin_size

    @property
    def count_total(self) -> int:
        return self._count_total

    @property
    def count_active(self) -> int:
        return int(sum(a.sum() for a in self._active))

    @property
    def count_inactive(self) -> int:
        return self._count_total - self.count_active

    @property
    def padding_slots(self) -> int:
        return self.capacity - self._count_total

    @property
    def num_bins(self) -> int:
        return len(self._bins)

    def _grow(self) -> None:
        self._bins.append(np.zeros((self.bin_size, self.dimension), dtype=self.dtype))
        self._norms.append(np.zeros(self.bin_size, dtype=np.float64))
        self._active.append(np.zeros(self.bin_size, dtype=bool))

    # -- mutation -------------------------------------------------------------

    def append(self, vector: NDArray, entry_id: str) -> int:
        """Add one vector at the tail; returns its global slot index."""
        vec = np.asarray(vector, dtype=np.float64).reshape(-1)
        if vec.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"vector has dimension {vec.shape[0]}, store expects {self.dimension}"
            )
        stored = vec.astype(self.dtype)
        if self._count_total >= self.capacity:
            self._grow()
        slot = self._count_total
        b, off = divmod(slot, self.bin_size)
        self._bins[b][off] = stored
        self._norms[b][off] = float(np.linalg.norm(stored.astype(np.float64)))
        self._active[b][off] = True
        self._ids.append(entry_id)
        self._count_total += 1
        return slot

    def append_many(self, vectors: NDArray, entry_ids: list[str]) -> list[int]:
        """Bulk tail append; slots are assigned in order, bins grown as needed."""
        vecs = np.asarray(vectors, dtype=np.float64)
        if vecs.ndim != 2 or vecs.shape[0] != len(entry_ids):
            raise DimensionMismatchError(
                f"expected ({len(entry_ids)}, {self.dimension}) vectors, got {vecs.shape}"
            )
        if vecs.shape[0] and vecs.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"vectors have dimension {vecs.shape[1]}, store expects {self.dimension}"
            )
        stored = vecs.astype(self.dtype)
        norms = np.linalg.norm(stored.astype(np.float64), axis=1)
        first = self._count_total
        pos = 0
        while pos < len(entry_ids):
            if self._count_total >= self.capacity:
                self._grow()
            b, off = divmod(self._count_total, self.bin_size)
            take = min(self.bin_size - off, len(entry_ids) - pos)
            self._bins[b][off:off + take] = stored[pos:pos + take]
            self._norms[b][off:off + take] = norms[pos:pos + take]
            self._active[b][off:off + take] = True
            self._count_total += take
            pos += take
        self._ids.extend(entry_ids)
        return list(range(first, first + len(entry_ids)))

    # -- queries ----------------------------------------------------------------

    def _query64(self, vector: NDArray) -> tuple[NDArray, float]:
        q = np.asarray(vector, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.dimension:
            raise DimensionMismatchError(
                f"query has dimension {q.shape[0]}, store expects {self.dimension}"
            )
        qnorm = float(np.linalg.norm(q))
        if qnorm == 0.0:
            raise UndefinedSimilarityError("cosine similarity of a zero vector is undefined")
        return q, qnorm

    def _bin_scores(self, b: int, q: NDArray, qnorm: float) -> NDArray:
        """Scores for one bin; inactive and zero-norm slots pinned to -inf."""
        scores = np.full(self.bin_size, -np.inf, dtype=np.float64)
        mask = self._active[b] & (self._norms[b] > 0.0)
        if mask.any():
            sub = self._bins[b][mask].astype(np.float64)
            scores[mask] = (sub @ q) / (self._norms[b][mask] * qnorm)
        return scores

    def best_hit(self, vector: NDArray) -> SearchHit | None:
        """Highest-cosine active entry regardless of any threshold.

        None when no active entry has a defined similarity. Ties resolve
        to the lowest slot, which keeps results independent of bin layout.
        """
        q, qnorm = self._query64(vector)
        best_score = -np.inf
        best_slot = -1
        for b in range(len(self._bins)):
            scores = self._bin_scores(b, q, qnorm)
            off = int(np.argmax(scores))
            if scores[off] > best_score:
                best_score = float(scores[off])
                best_slot = b * self.bin_size + off
        if best_slot < 0 or best_score == -np.inf:
            return None
        return SearchHit(entry_id=self._ids[best_slot], score=best_score, slot=best_slot)

    def max_similarity(self, vector: NDArray, threshold: float) -> SearchHit | None:
        """Best active entry when its score reaches the threshold, else None."""
        hit = self.best_hit(vector)
        if hit is None or hit.score < threshold:
            return None
        return hit

    def remove_similar(self, probes: NDArray, threshold: float = 0.85) -> int:
        """Deactivate every entry with cosine >= threshold to any probe.

        Returns the number of entries newly deactivated. Exact scan, no
        shortcuts; probe rows must all be nonzero.
        """
        probes = np.asarray(probes, dtype=np.float64)
        if probes.ndim == 1:
            probes = probes.reshape(1, -1)
        if probes.size == 0:
            return 0
        if probes.shape[1] != self.dimension:
            raise DimensionMismatchError(
                f"probes have dimension {probes.shape[1]}, store expects {self.dimension}"
            )
        pnorms = np.linalg.norm(probes, axis=1)
        if np.any(pnorms == 0.0):
            raise UndefinedSimilarityError("cosine similarity of a zero vector is undefined")
        removed = 0
        for b in range(len(self._bins)):
            mask = self._active[b] & (self._norms[b] > 0.0)
            if not mask.any():
                continue
            sub = self._bins[b][mask].astype(np.float64)
            sims = (sub @ probes.T) / np.outer(self._norms[b][mask], pnorms)
            hits = (sims >= threshold).any(axis=1)
            if hits.any():
                idx = np.flatnonzero(mask)[hits]
                self._active[b][idx] = False
                removed += int(hits.sum())
        return removed

    # -- inspection ---------------------------------------------------------

    def active_ids(self) -> list[str]:
        out = []
        for slot in range(self._count_total):
            b, off = divmod(slot, self.bin_size)
            if self._active[b][off]:
                out.append(self._ids[slot])
        return out

    def is_active(self, slot: int) -> bool:
        b, off = divmod(slot, self.bin_size)
        return bool(self._active[b][off])

    def get_vector(self, slot: int) -> NDArray:
        b, off = divmod(slot, self.bin_size)
        return self._bins[b][off].astype(np.float64)

    # -- persistence ----------------------------------------------------------

    def save(self, directory: str | Path) -> Path:
        """Write `<model_id>.vs` (fixed-width binary) plus a `.vs.json` sidecar."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        encoded = [eid.encode("utf-8") for eid in self._ids]
        id_width = max([1] + [len(e) for e in encoded])
        row_dtype = np.dtype([
            ("id", f"S{id_width}"),
            ("vec", self.dtype, (self.dimension,)),
            ("active", np.uint8),
        ])
        rows = np.zeros(self.capacity, dtype=row_dtype)
        if self._count_total:
            rows["id"][:self._count_total] = encoded
        for b_start in range(0, self._count_total, self.bin_size):
            b = b_start // self.bin_size
            take = min(self.bin_size, self._count_total - b_start)
            rows["vec"][b_start:b_start + take] = self._bins[b][:take]
            rows["active"][b_start:b_start + take] = self._active[b][:take].astype(np.uint8)
        path = directory / f"{self.model_id}.vs"
        rows.tofile(path)
        sidecar = {
            "model_id": self.model_id,
            "dimension": self.dimension,
            "bin_size": self.bin_size,
            "capacity": self.capacity,
            "count_total": self._count_total,
            "count_active": self.count_active,
            "id_width": id_width,
            "dtype": self.dtype.name,
        }
        with open(directory / f"{self.model_id}.vs.json", "w", encoding="utf-8") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path

    @classmethod
    def load(cls, directory: str | Path, model_id: str) -> "BinnedVectorStore":
        directory = Path(directory)
        with open(directory / f"{model_id}.vs.json", encoding="utf-8") as fh:
            meta = json.load(fh)
        store = cls(
            model_id=meta["model_id"],
            dimension=int(meta["dimension"]),
            bin_size=int(meta["bin_size"]),
            dtype=np.dtype(meta.get("dtype", "float32")),
        )
        row_dtype = np.dtype([
            ("id", f"S{meta['id_width']}"),
            ("vec", store.dtype, (store.dimension,)),
            ("active", np.uint8),
        ])
        rows = np.fromfile(directory / f"{model_id}.vs", dtype=row_dtype)
        if rows.shape[0] != meta["capacity"]:
            raise ConfigError(
                f"{model_id}.vs holds {rows.shape[0]} slots, sidecar says {meta['capacity']}"
            )
        while store.capacity < meta["capacity"]:
            store._grow()
        count_total = int(meta["count_total"])
        for b_start in range(0, count_total, store.bin_size):
            b = b_start // store.bin_size
            take = min(store.bin_size, count_total - b_start)
            chunk = rows["vec"][b_start:b_start + take]
            store._bins[b][:take] = chunk
            store._norms[b][:take] = np.linalg.norm(chunk.astype(np.float64), axis=1)
            store._active[b][:take] = rows["active"][b_start:b_start + take].astype(bool)
        store._ids = [
            rows["id"][slot].decode("utf-8").rstrip("\x00")
            for slot in range(count_total)
        ]
        store._count_total = count_total
        return store


def build_store(vectors: NDArray, entry_ids: list[str], model_id: str = "store",
                bin_size: int = DEFAULT_BIN_SIZE, dimension: int | None = None,
                dtype=np.float32) -> BinnedVectorStore:
    """Store from an embedding matrix and matching ids in one call.

    An empty matrix needs the dimension passed explicitly and yields a
    zero-capacity store.
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim == 1:
        vectors = vectors.reshape(0, dimension or 1) if vectors.size == 0 else vectors.reshape(1, -1)
    if vectors.shape[0] != len(entry_ids):
        raise DimensionMismatchError(
            f"{vectors.shape[0]} vectors for {len(entry_ids)} entry ids"
        )
    if dimension is None:
        if vectors.shape[0] == 0:
            raise ConfigError("empty input needs an explicit dimension")
        dimension = vectors.shape[1]
    store = BinnedVectorStore(model_id, dimension, bin_size=bin_size, dtype=dtype)
    if len(entry_ids):
        store.append_many(vectors, entry_ids)
    return store
