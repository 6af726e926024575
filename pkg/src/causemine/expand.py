"""Training-set enrichment by distributional and lexicon-based substitution.

Each quad slot (subject, trigger, object) gathers substitution candidates:
the slot itself, tokens near the slot's head word in a word-vector space,
and synonym-lexicon entries. The cartesian product of slot candidates
yields new quads whose confidence is the source confidence times the
product of the chosen candidates' scores.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .embed import cosine_similarity
from .extract import Quad

DEFAULT_TOP_K = 10
DEFAULT_MIN_SIMILARITY = 0.5
DEFAULT_MIN_CONFIDENCE = 0.5


class SynonymLexicon:
    """Directed term -> synonyms table; lookups are lowercase exact."""

    def __init__(self, entries: dict[str, list[str]] | None = None):
        self._entries: dict[str, list[str]] = {}
        for term, syns in (entries or {}).items():
            for syn in syns:
                self.add(term, syn)

    def add(self, term: str, synonym: str) -> None:
        syns = self._entries.setdefault(term.lower(), [])
        if synonym.lower() not in syns:
            syns.append(synonym.lower())

    def synonyms(self, term: str) -> list[str]:
        return list(self._entries.get(term.lower(), ()))

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def from_tsv(cls, path: str | Path) -> "SynonymLexicon":
        """Load `term<TAB>synonym` lines, or `term<TAB>syn1|syn2|...`."""
        lex = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    continue
                for syn in parts[1].split("|"):
                    if syn:
                        lex.add(parts[0], syn)
        return lex


def top_k_similar(
    term: str,
    vectors: dict[str, NDArray],
    k: int = DEFAULT_TOP_K,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
) -> list[tuple[str, float]]:
    """Nearest vocabulary tokens by cosine, score >= min_similarity.

    The term itself is excluded. Results sort by score descending with
    lexicographic tie-breaks, so a tie at the k-th rank resolves the same
    way every run. Unknown terms expand to nothing.
    """
    term = term.lower()
    base = vectors.get(term)
    if base is None or k < 1:
        return []
    scored = []
    for token, vec in vectors.items():
        if token == term:
            continue
        score = cosine_similarity(base, vec)
        if score >= min_similarity:
            scored.append((token, float(score)))
    scored.sort(key=lambda ts: (-ts[1], ts[0]))
    return scored[:k]


@dataclass(frozen=True)
class _Candidate:
    text: str
    score: float
    origin: str  # identity | vector | synonym


def _substitute_head(phrase: str, replacement: str) -> str:
    """Swap the last whitespace token of the phrase for the replacement."""
    words = phrase.split()
    if not words:
        return replacement
    return " ".join(words[:-1] + [replacement])


def _slot_candidates(
    phrase: str,
    vectors: dict[str, NDArray] | None,
    synonyms: SynonymLexicon | None,
    k: int,
    min_similarity: float,
) -> list[_Candidate]:
    cands = [_Candidate(phrase, 1.0, "identity")]
    seen = {phrase}
    head = phrase.split()[-1] if phrase.split() else phrase
    if vectors is not None:
        for token, score in top_k_similar(head, vectors, k, min_similarity):
            text = _substitute_head(phrase, token)
            if text not in seen:
                seen.add(text)
                cands.append(_Candidate(text, score, "vector"))
    if synonyms is not None:
        for syn in synonyms.synonyms(head):
            text = _substitute_head(phrase, syn)
            if text not in seen:
                seen.add(text)
                cands.append(_Candidate(text, 1.0, "synonym"))
    return cands


def expand_quad(
    quad: Quad,
    vectors: dict[str, NDArray] | None = None,
    synonyms: SynonymLexicon | None = None,
    k: int = DEFAULT_TOP_K,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
) -> list[Quad]:
    """All substitution combinations of a quad, the quad itself included.

    Combined confidence is the source confidence times each substituted
    slot's score. Synonym substitutions carry score 1.0 so they inherit the
    source confidence; combinations touched only by synonyms are labeled
    "synonym", any vector substitution makes it "expanded".
    """
    subs = _slot_candidates(quad.subject, vectors, synonyms, k, min_similarity)
    trig = _slot_candidates(quad.trigger, vectors, synonyms, k, min_similarity)
    objs = _slot_candidates(quad.object, vectors, synonyms, k, min_similarity)
    out = []
    for s in subs:
        for t in trig:
            for o in objs:
                conf = quad.confidence * s.score * t.score * o.score
                origins = {s.origin, t.origin, o.origin}
                if origins == {"identity"}:
                    provenance = quad.provenance
                elif "vector" in origins:
                    provenance = "expanded"
                else:
                    provenance = "synonym"
                out.append(
                    Quad(
                        subject=s.text,
                        trigger=t.text,
                        object=o.text,
                        confidence=conf,
                        sentence_id=quad.sentence_id,
                        provenance=provenance,
                    )
                )
    return out


def dedupe_quads(quads: list[Quad]) -> list[Quad]:
    """Collapse identical triples, keeping the highest confidence.

    First-seen order of triples is preserved so output is stable.
    """
    best: dict[tuple[str, str, str], Quad] = {}
    order: list[tuple[str, str, str]] = []
    for q in quads:
        key = q.triple()
        if key not in best:
            best[key] = q
            order.append(key)
        elif q.confidence > best[key].confidence:
            best[key] = q
    return [best[key] for key in order]


def filter_quads(quads: list[Quad], min_confidence: float = DEFAULT_MIN_CONFIDENCE) -> list[Quad]:
    """Keep quads at or above the confidence floor."""
    return [q for q in quads if q.confidence >= min_confidence]


def build_expanded_set(
    quads: list[Quad],
    vectors: dict[str, NDArray] | None = None,
    synonyms: SynonymLexicon | None = None,
    k: int = DEFAULT_TOP_K,
    min_similarity: float = DEFAULT_MIN_SIMILARITY,
    min_confidence: float = DEFAULT_MIN_CONFIDENCE,
) -> list[Quad]:
    """Expand, filter, and dedupe a whole candidate set."""
    expanded: list[Quad] = []
    for quad in quads:
        expanded.extend(expand_quad(quad, vectors, synonyms, k, min_similarity))
    return dedupe_quads(filter_quads(expanded, min_confidence))


def load_word_vectors(path: str | Path) -> dict[str, NDArray]:
    """word2vec text format -> token to float64 vector map."""
    table: dict[str, NDArray] = {}
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh):
            parts = line.rstrip().split(" ")
            if n == 0 and len(parts) == 2:
                continue
            if len(parts) < 2:
                continue
            table[parts[0].lower()] = np.asarray([float(x) for x in parts[1:]], dtype=np.float64)
    return table
