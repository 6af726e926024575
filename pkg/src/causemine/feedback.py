"""Expert feedback ingestion: verdict log, blocklist, and store evolution.

Verdicts are an append-only JSONL log keyed by quad id; the effective
verdict for a quad is the latest one (timestamp, then file order).
Applying feedback embeds every affected phrase under every model before
touching any store, so a provider failure leaves all state untouched.
Confirmed-causal phrases are appended to every store; confirmed-non-causal
phrases join the blocklist and evict near neighbors from every store.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .embed import cosine_similarity
from .errors import ClassificationIncompleteError
from .extract import quad_id as make_quad_id

DEFAULT_BLOCK_THRESHOLD = 0.85


@dataclass(frozen=True)
class VerdictRecord:
    quad_id: str
    verdict: str                # "causal" | "non_causal"
    expert_id: str
    timestamp: str              # ISO-8601
    note: str | None = None
    confidence_override: float | None = None  # stored, not consumed
    subject: str = ""           # triple text, needed to embed the phrase
    trigger: str = ""
    object: str = ""

    @property
    def phrase(self) -> str:
        return f"{self.subject} {self.trigger} {self.object}".strip()

    def to_json(self) -> dict:
        row = {
            "quad_id": self.quad_id,
            "verdict": self.verdict,
            "expert_id": self.expert_id,
            "timestamp": self.timestamp,
            "note": self.note,
            "confidence_override": self.confidence_override,
        }
        if self.subject or self.trigger or self.object:
            row["subject"] = self.subject
            row["trigger"] = self.trigger
            row["object"] = self.object
        return row

    @classmethod
    def from_json(cls, row: dict) -> "VerdictRecord":
        verdict = row["verdict"]
        if verdict not in ("causal", "non_causal"):
            raise ValueError(f"verdict must be causal or non_causal, got {verdict!r}")
        qid = row.get("quad_id")
        if not qid:
            qid = make_quad_id(row.get("subject", ""), row.get("trigger", ""),
                               row.get("object", ""))
        return cls(
            quad_id=str(qid),
            verdict=verdict,
            expert_id=str(row.get("expert_id", "")),
            timestamp=str(row.get("timestamp", "")),
            note=row.get("note"),
            confidence_override=row.get("confidence_override"),
            subject=row.get("subject", ""),
            trigger=row.get("trigger", ""),
            object=row.get("object", ""),
        )


def append_verdict(path: str | Path, record: VerdictRecord) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")


def load_verdicts(path: str | Path) -> list[VerdictRecord]:
    path = Path(path)
    if not path.exists():
        return []
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(VerdictRecord.from_json(json.loads(line)))
    return records


def effective_verdicts(records: list[VerdictRecord]) -> dict[str, VerdictRecord]:
    """Latest verdict per quad id.

    Later timestamps win; equal timestamps fall back to file order, so a
    re-reviewed quad always reflects its newest judgment, whichever expert
    issued it.
    """
    out: dict[str, VerdictRecord] = {}
    for rec in records:
        prev = out.get(rec.quad_id)
        if prev is None or rec.timestamp >= prev.timestamp:
            out[rec.quad_id] = rec
    return out


@dataclass
class BlocklistEntry:
    phrase: str
    subject: str
    trigger: str
    object: str
    added_at: str
    vectors: dict[str, NDArray] = field(default_factory=dict)  # model_id -> vec


class Blocklist:
    """Rejected phrases with their per-model embeddings.

    Rows live in a JSONL file; each row references one .npy vector file
    per model in a sibling directory, so the log itself stays diffable.
    The list only ever grows within a run.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.vec_dir = self.path.parent / (self.path.stem + "_vecs")
        self.entries: list[BlocklistEntry] = []
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                vectors = {}
                for model_id, rel in row.get("vectors", {}).items():
                    vectors[model_id] = np.load(self.path.parent / rel)
                self.entries.append(
                    BlocklistEntry(
                        phrase=row["phrase"],
                        subject=row.get("subject", ""),
                        trigger=row.get("trigger", ""),
                        object=row.get("object", ""),
                        added_at=row.get("added_at", ""),
                        vectors=vectors,
                    )
                )

    def __len__(self) -> int:
        return len(self.entries)

    def phrases(self) -> list[str]:
        return [e.phrase for e in self.entries]

    def add(
        self,
        subject: str,
        trigger: str,
        obj: str,
        vectors: dict[str, NDArray],
        added_at: str | None = None,
    ) -> BlocklistEntry:
        """Append one rejected triple with its per-model vectors."""
        if added_at is None:
            added_at = datetime.now(timezone.utc).isoformat()
        entry = BlocklistEntry(
            phrase=f"{subject} {trigger} {obj}".strip(),
            subject=subject,
            trigger=trigger,
            object=obj,
            added_at=added_at,
            vectors={m: np.asarray(v, dtype=np.float64) for m, v in vectors.items()},
        )
        self.vec_dir.mkdir(parents=True, exist_ok=True)
        qid = make_quad_id(subject, trigger, obj)
        refs = {}
        for model_id, vec in entry.vectors.items():
            rel = f"{self.vec_dir.name}/{qid}.{model_id}.npy"
            np.save(self.path.parent / rel, vec)
            refs[model_id] = rel
        row = {
            "phrase": entry.phrase,
            "subject": subject,
            "trigger": trigger,
            "object": obj,
            "added_at": added_at,
            "vectors": refs,
        }
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")
        self.entries.append(entry)
        return entry

    def is_blocked(self, vectors: dict[str, NDArray],
                   threshold: float = DEFAULT_BLOCK_THRESHOLD) -> bool:
        """True when any model's vector is near any entry's vector."""
        for entry in self.entries:
            for model_id, vec in vectors.items():
                stored = entry.vectors.get(model_id)
                if stored is None:
                    continue
                if cosine_similarity(vec, stored) >= threshold:
                    return True
        return False

    def blocked_mask(self, texts: list[str], providers: list,
                     threshold: float = DEFAULT_BLOCK_THRESHOLD) -> list[bool]:
        """Per-text blocked flags; embeds each text once per model."""
        if not texts or not self.entries:
            return [False] * len(texts)
        per_model = {}
        for provider in providers:
            per_model[provider.model_id] = provider.embed(texts)
        mask = []
        for i in range(len(texts)):
            vectors = {m: per_model[m][i] for m in per_model}
            mask.append(self.is_blocked(vectors, threshold))
        return mask


@dataclass(frozen=True)
class EvolutionReport:
    appended: int
    blocklisted: int
    removed_per_model: dict[str, int]


def apply_feedback(
    records: list[VerdictRecord],
    channels: list,
    blocklist: Blocklist,
    removal_threshold: float = DEFAULT_BLOCK_THRESHOLD,
    added_at: str | None = None,
) -> EvolutionReport:
    """Apply verdicts to the model stores and blocklist.

    Embeds every phrase under every model first; only when all embeddings
    exist does any store or the blocklist change. Causal verdicts append
    the phrase to all stores, non-causal ones join the blocklist and evict
    near neighbors from all stores.
    """
    if not records:
        return EvolutionReport(0, 0, {ch.provider.model_id: 0 for ch in channels})
    for rec in records:
        if not rec.phrase:
            raise ValueError(f"verdict {rec.quad_id} carries no triple text to embed")
    phrases = [rec.phrase for rec in records]
    embedded: dict[str, NDArray] = {}
    for ch in channels:
        try:
            embedded[ch.provider.model_id] = ch.provider.embed(phrases)
        except Exception as exc:
            raise ClassificationIncompleteError(
                f"model {ch.provider.model_id!r} failed to embed feedback phrases: {exc}"
            ) from exc

    appended = 0
    blocklisted = 0
    removed: dict[str, int] = {ch.provider.model_id: 0 for ch in channels}
    for i, rec in enumerate(records):
        vectors = {m: embedded[m][i] for m in embedded}
        if rec.verdict == "causal":
            for ch in channels:
                ch.store.append(vectors[ch.provider.model_id], rec.quad_id)
            appended += 1
        else:
            blocklist.add(rec.subject, rec.trigger, rec.object, vectors, added_at=added_at)
            blocklisted += 1
            for ch in channels:
                n = ch.store.remove_similar(
                    vectors[ch.provider.model_id].reshape(1, -1), removal_threshold
                )
                removed[ch.provider.model_id] += n
    return EvolutionReport(appended=appended, blocklisted=blocklisted, removed_per_model=removed)
