"""Causality extraction over linear noun-verb-noun patterns.

Two extraction flows share the noun-phrase chunker. Candidate extraction
scans unseen sentences: a candidate quad is (subject phrase, trigger verb,
object phrase, confidence) where subject and object are noun phrases and
the trigger is the only verb lying strictly between them. Two verbs between
a pair of noun phrases means neither is the nearest verb of both slots, so
that pair yields nothing. Training extraction instead anchors on a
sentence's two annotated entity spans and emits one seed quad per verb
between them.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .preprocess import ADJ_TAGS, NOUN_TAGS, TaggedSentence, Token


@dataclass(frozen=True)
class NounPhrase:
    text: str          # space-joined lemmas, stopword tokens dropped
    head_lemma: str
    start_index: int   # first token of the span
    end_index: int     # last token of the span (the noun run's tail)


@dataclass(frozen=True)
class Quad:
    subject: str
    trigger: str
    object: str
    confidence: float
    sentence_id: str = ""
    provenance: str = "extracted"  # seed | extracted | expanded | synonym

    def triple(self) -> tuple[str, str, str]:
        return (self.subject, self.trigger, self.object)


def quad_id(subject: str, trigger: str, obj: str) -> str:
    """Stable 16-hex id over the textual triple; confidence excluded."""
    key = f"{subject}|{trigger}|{obj}".encode("utf-8")
    return hashlib.sha1(key).hexdigest()[:16]


def _is_noun(tok: Token) -> bool:
    return tok.pos in NOUN_TAGS


def _is_adj(tok: Token) -> bool:
    return tok.pos in ADJ_TAGS


def is_verb(tok: Token) -> bool:
    return tok.pos.startswith("VB")


def chunk_noun_phrases(sentence: TaggedSentence) -> list[NounPhrase]:
    """Find maximal noun runs, extended leftward over adjacent adjectives.

    The head is the last non-stopword noun of the run; runs whose nouns are
    all stopwords are skipped. Phrase text joins the span's non-stopword
    lemmas.
    """
    tokens = sentence.tokens
    phrases = []
    i = 0
    while i < len(tokens):
        if not _is_noun(tokens[i]):
            i += 1
            continue
        j = i
        while j + 1 < len(tokens) and _is_noun(tokens[j + 1]):
            j += 1
        head = None
        for k in range(j, i - 1, -1):
            if not tokens[k].is_stopword:
                head = tokens[k]
                break
        if head is not None:
            start = i
            while start - 1 >= 0 and _is_adj(tokens[start - 1]):
                start -= 1
            words = [t.lemma for t in tokens[start:j + 1] if not t.is_stopword]
            phrases.append(
                NounPhrase(
                    text=" ".join(words),
                    head_lemma=head.lemma,
                    start_index=start,
                    end_index=j,
                )
            )
        i = j + 1
    return phrases


def extract_candidate_triples(sentence: TaggedSentence, default_confidence: float = 1.0) -> list[Quad]:
    """Emit one quad per noun-phrase pair with exactly one verb between them.

    Output order follows (subject position, object position). Confidence is
    the extraction default; provenance is "extracted".
    """
    phrases = chunk_noun_phrases(sentence)
    verb_positions = [t.index for t in sentence.tokens if is_verb(t)]
    quads = []
    for a, subj in enumerate(phrases):
        for obj in phrases[a + 1:]:
            between = [v for v in verb_positions if subj.end_index < v < obj.start_index]
            if len(between) != 1:
                continue
            trigger = sentence.tokens[between[0]].lemma
            quads.append(
                Quad(
                    subject=subj.text,
                    trigger=trigger,
                    object=obj.text,
                    confidence=default_confidence,
                    sentence_id=sentence.sentence_id,
                    provenance="extracted",
                )
            )
    return quads


extract_quads = extract_candidate_triples


def _phrase_for_span(phrases: list[NounPhrase], span: tuple[int, int]) -> NounPhrase | None:
    """Resolve an entity token span to a chunked noun phrase.

    Prefers the phrase covering the span's last token (the likely head);
    falls back to the first phrase overlapping the span at all.
    """
    for np in phrases:
        if np.start_index <= span[1] <= np.end_index:
            return np
    for np in phrases:
        if np.start_index <= span[1] and span[0] <= np.end_index:
            return np
    return None


def extract_training_quads(example) -> list[Quad]:
    """Emit seed quads from a sentence with two annotated entity spans.

    The subject phrase resolves from the first entity span, the object
    phrase from the second. One quad is emitted per verb token lying
    strictly between the two spans, each with confidence 1.0 and provenance
    "seed"; auxiliary-plus-participle sequences therefore contribute one
    quad per verb. Unresolvable spans or an empty verb window give [].
    """
    sentence = example.sentence
    e1, e2 = example.e1_span, example.e2_span
    if e1 is None or e2 is None:
        return []
    phrases = chunk_noun_phrases(sentence)
    subj = _phrase_for_span(phrases, e1)
    obj = _phrase_for_span(phrases, e2)
    if subj is None or obj is None:
        return []
    quads = []
    for tok in sentence.tokens[e1[1] + 1:e2[0]]:
        if is_verb(tok):
            quads.append(
                Quad(
                    subject=subj.text,
                    trigger=tok.lemma,
                    object=obj.text,
                    confidence=1.0,
                    sentence_id=sentence.sentence_id,
                    provenance="seed",
                )
            )
    return quads


def extract_corpus(sentences: list[TaggedSentence], default_confidence: float = 1.0) -> list[Quad]:
    """Extract candidates from every sentence, keeping sentence order."""
    out: list[Quad] = []
    for sent in sentences:
        out.extend(extract_candidate_triples(sent, default_confidence))
    return out


def quad_sort_key(q: Quad) -> tuple:
    return (q.sentence_id, q.subject, q.trigger, q.object, -q.confidence)
