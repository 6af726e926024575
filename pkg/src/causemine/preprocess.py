"""Sentence splitting, normalization, tokenization, lemmatization, and POS tagging.

Turns raw documents into tagged sentences ready for pattern extraction.
Stopwords are flagged rather than deleted so that phrase spans stay
contiguous; POS tagging happens on the full token sequence for the same
reason. Taggers are pluggable: pre-tagged pass-through, an HTTP service
client, or a built-in lexicon+suffix heuristic.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from importlib import resources

import httpx

from .errors import MalformedPretaggedError, ProviderUnavailableError

NOUN_TAGS = frozenset({"NN", "NNS", "NNP", "NNPS"})
ADJ_TAGS = frozenset({"JJ", "JJR", "JJS"})

DEFAULT_SPECIAL_CHARS = "-+_"

_TERMINAL_RE = re.compile(r"[.!?]+")
_INNER_PAREN_RE = re.compile(r"\([^()]*\)")
_WS_RE = re.compile(r"\s+")
_TOKEN_RE = re.compile(r"\w+|[^\w\s]+")

# Coarse POS classes tried in order when lemmatizing before tags exist.
_LEMMA_POS_PRIORITY = ("v", "n", "a", "r", "*")


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    text: str
    source: str = "plain"  # plain | semeval_annotated | pretagged


@dataclass(frozen=True)
class Token:
    surface: str
    lemma: str
    pos: str
    index: int
    is_stopword: bool = False


@dataclass(frozen=True)
class TaggedSentence:
    sentence_id: str
    doc_id: str
    raw_text: str
    normalized_text: str
    tokens: tuple[Token, ...]


class LemmaLexicon:
    """Dictionary lemmatizer keyed on (lowercase surface, coarse POS class).

    Coarse classes are 'n', 'v', 'a', 'r', or '*' (any). Lookups without a
    known POS try classes in a fixed priority order; unknown surfaces
    lemmatize to themselves.
    """

    def __init__(self, entries: dict[tuple[str, str], str] | None = None):
        self._entries: dict[tuple[str, str], str] = dict(entries or {})

    def add(self, surface: str, pos_class: str, lemma: str) -> None:
        self._entries[(surface.lower(), pos_class)] = lemma.lower()

    def lookup(self, surface: str) -> str:
        low = surface.lower()
        for pos_class in _LEMMA_POS_PRIORITY:
            lemma = self._entries.get((low, pos_class))
            if lemma is not None:
                return lemma
        return low

    def __len__(self) -> int:
        return len(self._entries)

    @classmethod
    def from_tsv(cls, path) -> "LemmaLexicon":
        """Load `surface<TAB>pos_class<TAB>lemma` lines; '#' starts a comment."""
        lex = cls()
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    continue
                lex.add(parts[0], parts[1], parts[2])
        return lex


def _coerce_lexicon(lemma_lexicon) -> LemmaLexicon:
    if isinstance(lemma_lexicon, LemmaLexicon):
        return lemma_lexicon
    lex = LemmaLexicon()
    for key, lemma in (lemma_lexicon or {}).items():
        if isinstance(key, tuple):
            lex.add(key[0], key[1], lemma)
        else:
            lex.add(key, "*", lemma)
    return lex


def _load_word_list(name: str) -> list[str]:
    text = resources.files("causemine.data").joinpath(name).read_text(encoding="utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]


def default_abbreviations() -> set[str]:
    return {a.lower() for a in _load_word_list("abbreviations.txt")}


def default_stopwords() -> set[str]:
    return set(_load_word_list("stopwords.txt"))


def default_lemma_lexicon() -> LemmaLexicon:
    lex = LemmaLexicon()
    for line in _load_word_list("lemma_lexicon.tsv"):
        parts = line.split("\t")
        if len(parts) == 3:
            lex.add(parts[0], parts[1], parts[2])
    return lex


def split_sentences(document: RawDocument, abbreviations: set[str] | None = None) -> list[str]:
    """Split a document into sentences at terminal punctuation.

    A boundary is terminal punctuation (., !, ?) followed by whitespace and
    an uppercase letter, or end of text. Words on the abbreviation list
    (compared case-insensitively, with their trailing period) never split.
    """
    text = document.text
    if not text or not text.strip():
        return []
    if abbreviations is None:
        abbreviations = default_abbreviations()

    sentences: list[str] = []
    start = 0
    for match in _TERMINAL_RE.finditer(text):
        end = match.end()
        if end < len(text):
            # Boundary requires whitespace then an uppercase letter.
            rest = text[end:]
            stripped = rest.lstrip()
            if rest == stripped or not stripped or not stripped[0].isupper():
                continue
        preceding = text[start:end].rstrip()
        last_word = preceding.split()[-1] if preceding.split() else ""
        if last_word.lower() in abbreviations:
            continue
        chunk = text[start:end].strip()
        if chunk:
            sentences.append(chunk)
        start = end
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def normalize(sentence: str, special_chars: str = DEFAULT_SPECIAL_CHARS) -> str:
    """Drop parenthetical spans and special characters, collapse whitespace.

    Nested parentheses are removed innermost-out; unmatched single parens
    are left alone. Idempotent.
    """
    text = sentence
    while True:
        stripped = _INNER_PAREN_RE.sub(" ", text)
        if stripped == text:
            break
        text = stripped
    if special_chars:
        text = text.translate({ord(c): None for c in special_chars})
    return _WS_RE.sub(" ", text).strip()


def tokenize_and_lemmatize(
    normalized: str,
    lemma_lexicon: LemmaLexicon | dict | None = None,
    stopword_list: set[str] | None = None,
) -> list[Token]:
    """Split on whitespace/punctuation boundaries and lemmatize each token.

    Stopword tokens are kept and flagged so downstream extraction can decide
    how to treat them. POS is left empty; run pos_tag afterwards.
    """
    lexicon = _coerce_lexicon(lemma_lexicon)
    stopwords = stopword_list if stopword_list is not None else set()
    tokens = []
    for idx, surface in enumerate(_TOKEN_RE.findall(normalized)):
        lemma = lexicon.lookup(surface)
        tokens.append(
            Token(
                surface=surface,
                lemma=lemma,
                pos="",
                index=idx,
                is_stopword=surface.lower() in stopwords,
            )
        )
    return tokens


class PretaggedTagger:
    """Pass-through tagger for input that already carries POS tags."""

    def tag(self, tokens: list[Token]) -> list[str]:
        tags = []
        for tok in tokens:
            if not tok.pos:
                raise MalformedPretaggedError(
                    f"token {tok.surface!r} at index {tok.index} carries no POS tag"
                )
            tags.append(tok.pos)
        return tags


class HttpTagger:
    """Client for a remote tagger: POST /tag {tokens: [...]} -> {tags: [...]}."""

    def __init__(self, base_url: str, timeout: float = 5.0, retries: int = 2,
                 client: httpx.Client | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._client = client or httpx.Client(timeout=timeout)

    def tag(self, tokens: list[Token]) -> list[str]:
        surfaces = [t.surface for t in tokens]
        last_err: Exception | None = None
        for _ in range(self.retries + 1):
            try:
                resp = self._client.post(f"{self.base_url}/tag", json={"tokens": surfaces})
                resp.raise_for_status()
                tags = resp.json().get("tags")
                if not isinstance(tags, list) or len(tags) != len(surfaces):
                    raise MalformedPretaggedError(
                        f"tagger returned {len(tags) if isinstance(tags, list) else 'no'} "
                        f"tags for {len(surfaces)} tokens"
                    )
                return [str(t) for t in tags]
            except MalformedPretaggedError:
                raise
            except Exception as exc:  # noqa: BLE001 - network/HTTP failures retried
                last_err = exc
        raise ProviderUnavailableError(f"tagger at {self.base_url} unreachable: {last_err}")


# Suffix heuristics, tried in order after the lexicon misses.
_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ly", "RB"),
    ("ing", "VBG"),
    ("ed", "VBD"),
    ("ous", "JJ"),
    ("ful", "JJ"),
    ("ive", "JJ"),
    ("able", "JJ"),
    ("ible", "JJ"),
    ("ic", "JJ"),
    ("tion", "NN"),
    ("ment", "NN"),
    ("ness", "NN"),
    ("ity", "NN"),
)


class HeuristicTagger:
    """Lexicon + suffix tagger; unknown words default to NN for NP recall."""

    def __init__(self, lexicon: dict[str, str] | None = None):
        if lexicon is None:
            lexicon = self.default_lexicon()
        self._lexicon = {k.lower(): v for k, v in lexicon.items()}

    @staticmethod
    def default_lexicon() -> dict[str, str]:
        lex = {}
        for line in _load_word_list("tag_lexicon.tsv"):
            parts = line.split("\t")
            if len(parts) == 2:
                lex[parts[0]] = parts[1]
        return lex

    def tag_word(self, surface: str) -> str:
        low = surface.lower()
        hit = self._lexicon.get(low)
        if hit:
            return hit
        if not any(c.isalnum() for c in surface):
            return surface  # punctuation tags as itself, Penn-style
        if surface[0].isdigit():
            return "CD"
        for suffix, tag in _SUFFIX_RULES:
            if low.endswith(suffix) and len(low) > len(suffix) + 1:
                return tag
        if low.endswith("s") and len(low) > 3:
            base = low[:-1]
            es_base = low[:-2] if low.endswith("es") else None
            if self._lexicon.get(base) == "VB" or (es_base and self._lexicon.get(es_base) == "VB"):
                return "VBZ"
            return "NNS"
        return "NN"

    def tag(self, tokens: list[Token]) -> list[str]:
        return [self.tag_word(t.surface) for t in tokens]


def pos_tag(tokens: list[Token], tagger) -> list[Token]:
    """Fill every token's POS via the provider; returns new Token objects."""
    tags = tagger.tag(tokens)
    if len(tags) != len(tokens):
        raise MalformedPretaggedError(
            f"tagger produced {len(tags)} tags for {len(tokens)} tokens"
        )
    return [replace(tok, pos=tag) for tok, tag in zip(tokens, tags)]


def parse_pretagged_line(line: str, lemma_lexicon=None, stopword_list=None) -> list[Token]:
    """Parse one `surface/POS surface/POS ...` line into tagged tokens."""
    tokens = []
    parts = line.split()
    for idx, part in enumerate(parts):
        surface, sep, tag = part.rpartition("/")
        if not sep or not surface or not tag:
            raise MalformedPretaggedError(f"token {part!r} is not of the form surface/POS")
        lexicon = _coerce_lexicon(lemma_lexicon)
        stopwords = stopword_list if stopword_list is not None else set()
        tokens.append(
            Token(
                surface=surface,
                lemma=lexicon.lookup(surface),
                pos=tag,
                index=idx,
                is_stopword=surface.lower() in stopwords,
            )
        )
    return tokens


def serialize_pretagged(tokens: list[Token]) -> str:
    return " ".join(f"{t.surface}/{t.pos}" for t in tokens)


def preprocess_document(
    document: RawDocument,
    tagger,
    lemma_lexicon=None,
    stopword_list=None,
    abbreviations: set[str] | None = None,
    special_chars: str = DEFAULT_SPECIAL_CHARS,
) -> list[TaggedSentence]:
    """Full preprocessing chain: split, normalize, tokenize, lemmatize, tag.

    Sentences that normalize to nothing are dropped. Sentence ids are
    `<doc_id>:<n>` in surface order.
    """
    if document.source == "pretagged":
        raw_sentences = [ln.strip() for ln in document.text.splitlines() if ln.strip()]
    else:
        raw_sentences = split_sentences(document, abbreviations)
    out = []
    for n, raw in enumerate(raw_sentences):
        if document.source == "pretagged":
            tokens = parse_pretagged_line(raw, lemma_lexicon, stopword_list)
            normalized = " ".join(t.surface for t in tokens)
        else:
            normalized = normalize(raw, special_chars)
            if not normalized:
                continue
            tokens = tokenize_and_lemmatize(normalized, lemma_lexicon, stopword_list)
            tokens = pos_tag(tokens, tagger)
        if not tokens:
            continue
        out.append(
            TaggedSentence(
                sentence_id=f"{document.doc_id}:{n}",
                doc_id=document.doc_id,
                raw_text=raw,
                normalized_text=normalized,
                tokens=tuple(tokens),
            )
        )
    return out
