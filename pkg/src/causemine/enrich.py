"""Concept grounding for quad subjects and objects.

A concept provider maps a term to zero or more medical concepts (id,
preferred name, semantic types). Quads keep only the predictions whose
subject or object grounds to at least one concept. Lookups go through a
per-run cache; a provider failure aborts enrichment rather than returning
a silently thinner result.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import httpx

from .errors import EnrichmentIncompleteError, ProviderUnavailableError
from .extract import Quad


@dataclass(frozen=True)
class Concept:
    cui: str
    name: str
    semtypes: tuple[str, ...]


@dataclass(frozen=True)
class EnrichedQuad:
    quad: Quad
    subject_concepts: tuple[Concept, ...]
    object_concepts: tuple[Concept, ...]
    subject_match: str | None = None   # the subspan that actually grounded
    object_match: str | None = None


class LocalConceptProvider:
    """TSV-backed lookup: term<TAB>cui<TAB>name<TAB>semtype1|semtype2."""

    def __init__(self, path: str | Path):
        self._table: dict[str, list[Concept]] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 4:
                    continue
                term, cui, name, semtypes = parts
                concept = Concept(cui=cui, name=name,
                                  semtypes=tuple(s for s in semtypes.split("|") if s))
                self._table.setdefault(term.lower(), []).append(concept)

    def lookup(self, term: str) -> list[Concept]:
        return list(self._table.get(term.lower(), ()))


class HttpConceptProvider:
    """Client for GET /concepts?term=... -> {"concepts": [...]}."""

    def __init__(self, base_url: str, timeout: float = 5.0, retries: int = 2,
                 client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.retries = retries
        self._client = client or httpx.Client(timeout=timeout)

    def lookup(self, term: str) -> list[Concept]:
        last_err: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = self._client.get(f"{self.base_url}/concepts", params={"term": term})
                resp.raise_for_status()
                rows = resp.json().get("concepts", [])
                return [
                    Concept(
                        cui=str(row.get("cui", "")),
                        name=str(row.get("name", "")),
                        semtypes=tuple(row.get("semtypes", ())),
                    )
                    for row in rows
                ]
            except Exception as exc:  # noqa: BLE001 - retried, then surfaced
                last_err = exc
        raise ProviderUnavailableError(
            f"concept service at {self.base_url} unreachable: {last_err}"
        )


class ConceptCache:
    """Memoizes lookups for one run, keyed on the lowercased term."""

    def __init__(self, provider):
        self._provider = provider
        self._cache: dict[str, list[Concept]] = {}
        self.hits = 0
        self.misses = 0

    def lookup(self, term: str) -> list[Concept]:
        key = term.lower()
        if key in self._cache:
            self.hits += 1
            return self._cache[key]
        self.misses += 1
        result = self._provider.lookup(term)
        self._cache[key] = result
        return result


def match_concepts(phrase: str, provider) -> tuple[list[Concept], str | None]:
    """Ground a phrase: exact match first, then the longest token subspan.

    Subspans are tried longest first, leftmost first within a length, so
    the result is deterministic. Returns (concepts, matched subspan text);
    ([], None) when nothing grounds.
    """
    concepts = provider.lookup(phrase)
    if concepts:
        return concepts, phrase
    words = phrase.split()
    for length in range(len(words) - 1, 0, -1):
        for start in range(0, len(words) - length + 1):
            sub = " ".join(words[start:start + length])
            concepts = provider.lookup(sub)
            if concepts:
                return concepts, sub
    return [], None


def enrich_quads(quads: list[Quad], provider, cache: ConceptCache | None = None) -> list[EnrichedQuad]:
    """Keep quads whose subject or object grounds to at least one concept.

    All lookups share one cache. Any provider failure aborts the run: a
    partially enriched list is indistinguishable from a filtered one.
    """
    if cache is None:
        cache = ConceptCache(provider)
    out = []
    for quad in quads:
        try:
            subj_concepts, subj_match = match_concepts(quad.subject, cache)
            obj_concepts, obj_match = match_concepts(quad.object, cache)
        except ProviderUnavailableError as exc:
            raise EnrichmentIncompleteError(
                f"concept lookup failed on quad ({quad.subject!r}, {quad.trigger!r}, "
                f"{quad.object!r}): {exc}"
            ) from exc
        if subj_concepts or obj_concepts:
            out.append(
                EnrichedQuad(
                    quad=quad,
                    subject_concepts=tuple(subj_concepts),
                    object_concepts=tuple(obj_concepts),
                    subject_match=subj_match,
                    object_match=obj_match,
                )
            )
    return out
