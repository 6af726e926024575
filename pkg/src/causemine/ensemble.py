"""Multi-model agreement voting over vector-store similarity.

Each model channel pairs an embedding provider with its own vector store.
A channel flags a text when its best stored similarity reaches the flag
threshold; the intersection degree is how many channels flag it. The text
counts as causal when the degree reaches the minimum, and its confidence
is the mean of the flagging channels' best scores. A channel that cannot
produce an embedding aborts the whole classification: a vote with absent
voters is not a vote.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ClassificationIncompleteError, ConfigError
from .store import BinnedVectorStore

DEFAULT_FLAG_THRESHOLD = 0.85
DEFAULT_MIN_DEGREE = 4


@dataclass(frozen=True)
class ModelVerdict:
    model_id: str
    flagged: bool
    best_score: float | None   # None when the store has no scorable entry
    matched_id: str | None     # id of the best-scoring store entry


@dataclass(frozen=True)
class EnsembleResult:
    text: str
    verdicts: tuple[ModelVerdict, ...]
    degree: int
    causal: bool
    confidence: float | None    # mean of flagging channels' best scores


def intersection_degree(verdicts: list[ModelVerdict]) -> int:
    """How many models flagged the candidate; duplicate models are an error."""
    seen = set()
    for v in verdicts:
        if v.model_id in seen:
            raise ConfigError(f"duplicate model_id {v.model_id!r} in verdict list")
        seen.add(v.model_id)
    return sum(1 for v in verdicts if v.flagged)


@dataclass(frozen=True)
class ModelChannel:
    provider: object            # embed(texts) -> array, .model_id, .dimension
    store: BinnedVectorStore

    def __post_init__(self):
        if self.provider.model_id != self.store.model_id:
            raise ConfigError(
                f"provider {self.provider.model_id!r} paired with "
                f"store {self.store.model_id!r}"
            )


def classify_single(store: BinnedVectorStore, candidate_embedding,
                    threshold: float = DEFAULT_FLAG_THRESHOLD) -> ModelVerdict:
    """One model's verdict on one embedded candidate.

    An empty store cannot flag; its verdict carries the None sentinel for
    the score instead of a fabricated zero.
    """
    hit = store.best_hit(candidate_embedding)
    if hit is None:
        return ModelVerdict(model_id=store.model_id, flagged=False,
                            best_score=None, matched_id=None)
    return ModelVerdict(
        model_id=store.model_id,
        flagged=hit.score >= threshold,
        best_score=hit.score,
        matched_id=hit.entry_id,
    )


class EnsembleClassifier:
    def __init__(
        self,
        channels: list[ModelChannel],
        flag_threshold: float = DEFAULT_FLAG_THRESHOLD,
        min_degree: int = DEFAULT_MIN_DEGREE,
    ):
        if not channels:
            raise ConfigError("ensemble needs at least one model channel")
        seen = set()
        for ch in channels:
            if ch.provider.model_id in seen:
                raise ConfigError(f"duplicate model_id {ch.provider.model_id!r} in ensemble")
            seen.add(ch.provider.model_id)
        if min_degree < 1 or min_degree > len(channels):
            raise ConfigError(
                f"min_degree {min_degree} outside 1..{len(channels)}"
            )
        self.channels = list(channels)
        self.flag_threshold = float(flag_threshold)
        self.min_degree = int(min_degree)

    @property
    def model_ids(self) -> list[str]:
        return [ch.provider.model_id for ch in self.channels]

    def classify_many(self, texts: list[str]) -> list[EnsembleResult]:
        """Classify a batch; embeddings are computed once per channel."""
        if not texts:
            return []
        per_channel = []
        for ch in self.channels:
            try:
                vectors = ch.provider.embed(texts)
            except Exception as exc:
                raise ClassificationIncompleteError(
                    f"model {ch.provider.model_id!r} failed to embed: {exc}"
                ) from exc
            per_channel.append(vectors)

        results = []
        for i, text in enumerate(texts):
            verdicts = [
                classify_single(ch.store, vectors[i], self.flag_threshold)
                for ch, vectors in zip(self.channels, per_channel)
            ]
            degree = intersection_degree(verdicts)
            flagged_scores = [v.best_score for v in verdicts if v.flagged]
            confidence = sum(flagged_scores) / degree if degree else None
            results.append(
                EnsembleResult(
                    text=text,
                    verdicts=tuple(verdicts),
                    degree=degree,
                    causal=degree >= self.min_degree,
                    confidence=confidence,
                )
            )
        return results

    def classify(self, text: str) -> EnsembleResult:
        return self.classify_many([text])[0]
