"""Corpus loaders: plain text, JSONL, pretagged, and entity-pair annotated.

The entity-pair format is the classic relation-classification layout: a
numbered quoted sentence with <e1>/<e2> markers, a relation line such as
`Cause-Effect(e1,e2)`, an optional Comment line, then a blank line.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

from .preprocess import (
    RawDocument,
    TaggedSentence,
    normalize,
    pos_tag,
    tokenize_and_lemmatize,
)

CAUSAL_LABEL = "Cause-Effect"

_LINE_RE = re.compile(r'^(\d+)\t"(.*)"\s*$')
_REL_RE = re.compile(r"^([A-Za-z-]+?)(\((e1,e2|e2,e1)\))?\s*$")
_TAG_RE = re.compile(r"</?e[12]>")


@dataclass(frozen=True)
class AnnotatedSentence:
    sent_id: str
    text: str               # markers stripped
    e1_text: str
    e2_text: str
    relation_label: str     # direction suffix removed
    direction: str          # "e1,e2", "e2,e1", or ""

    @property
    def is_causal(self) -> bool:
        return self.relation_label == CAUSAL_LABEL


def load_plain_documents(path: str | Path) -> list[RawDocument]:
    """One document per .txt file (directory) or the whole file (single path)."""
    p = Path(path)
    if p.is_dir():
        docs = []
        for f in sorted(p.glob("*.txt")):
            docs.append(RawDocument(doc_id=f.stem, text=f.read_text(encoding="utf-8")))
        return docs
    return [RawDocument(doc_id=p.stem, text=p.read_text(encoding="utf-8"))]


def load_jsonl_documents(path: str | Path) -> list[RawDocument]:
    """JSONL rows {"doc_id": ..., "text": ...}; order preserved."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            docs.append(RawDocument(doc_id=str(row.get("doc_id", n)), text=row["text"]))
    return docs


def load_pretagged_document(path: str | Path) -> RawDocument:
    """A file of `surface/POS ...` lines, one sentence per line."""
    p = Path(path)
    return RawDocument(doc_id=p.stem, text=p.read_text(encoding="utf-8"), source="pretagged")


def parse_annotated_file(path: str | Path) -> list[AnnotatedSentence]:
    """Parse the entity-pair annotated layout into examples.

    Relation direction is split off the label; Comment lines and blank
    separators are skipped. Lines that fit none of the roles raise ValueError.
    """
    examples = []
    sent_id = None
    text = e1 = e2 = None
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("Comment"):
                continue
            m = _LINE_RE.match(line)
            if m:
                sent_id = m.group(1)
                marked = m.group(2)
                e1 = _between(marked, "<e1>", "</e1>")
                e2 = _between(marked, "<e2>", "</e2>")
                text = _TAG_RE.sub("", marked)
                continue
            rel = _REL_RE.match(line.strip())
            if rel and sent_id is not None:
                examples.append(
                    AnnotatedSentence(
                        sent_id=sent_id,
                        text=text,
                        e1_text=e1 or "",
                        e2_text=e2 or "",
                        relation_label=rel.group(1),
                        direction=rel.group(3) or "",
                    )
                )
                sent_id = text = e1 = e2 = None
                continue
            raise ValueError(f"unrecognized line in {path}: {line!r}")
    return examples


def _between(text: str, open_tag: str, close_tag: str) -> str | None:
    start = text.find(open_tag)
    end = text.find(close_tag)
    if start == -1 or end == -1:
        return None
    return text[start + len(open_tag):end]


def locate_entity_span(
    sentence_tokens: list, entity_text: str, search_from: int = 0,
    lemma_lexicon=None, stopword_list=None,
) -> tuple[int, int] | None:
    """Find the entity's token span inside an already-tokenized sentence.

    The entity text goes through the same normalize+tokenize path, then its
    surface sequence is matched case-insensitively from `search_from`.
    """
    ent_tokens = tokenize_and_lemmatize(normalize(entity_text), lemma_lexicon, stopword_list)
    needle = [t.surface.lower() for t in ent_tokens]
    if not needle:
        return None
    hay = [t.surface.lower() for t in sentence_tokens]
    for i in range(search_from, len(hay) - len(needle) + 1):
        if hay[i:i + len(needle)] == needle:
            return (i, i + len(needle) - 1)
    return None


@dataclass(frozen=True)
class TaggedExample:
    sentence: TaggedSentence
    annotation: AnnotatedSentence
    e1_span: tuple[int, int] | None
    e2_span: tuple[int, int] | None


def tag_annotated(
    examples: list[AnnotatedSentence],
    tagger,
    lemma_lexicon=None,
    stopword_list=None,
    doc_id: str = "annotated",
) -> list[TaggedExample]:
    """Preprocess annotated examples; sentence ids reuse the file's numbers."""
    out = []
    for ex in examples:
        normalized = normalize(ex.text)
        tokens = tokenize_and_lemmatize(normalized, lemma_lexicon, stopword_list)
        tokens = pos_tag(tokens, tagger)
        sent = TaggedSentence(
            sentence_id=ex.sent_id,
            doc_id=doc_id,
            raw_text=ex.text,
            normalized_text=normalized,
            tokens=tuple(tokens),
        )
        e1_span = locate_entity_span(tokens, ex.e1_text, 0, lemma_lexicon, stopword_list)
        start2 = (e1_span[1] + 1) if e1_span else 0
        e2_span = locate_entity_span(tokens, ex.e2_text, start2, lemma_lexicon, stopword_list)
        out.append(TaggedExample(sentence=sent, annotation=ex, e1_span=e1_span, e2_span=e2_span))
    return out
