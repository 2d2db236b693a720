"""Text annotation: tokenization, gazetteer entity recognition, class-name
mentions, and lexical-overlap word sense disambiguation.

A document is reduced to tokens; token spans matching entity names become
NE annotations (ambiguity preserved: one annotation per matching entity),
remaining tokens with sense candidates get a disambiguated sense
annotation, and whatever non-stopword tokens are left become keyword
stems.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

from .kb import KnowledgeBase
from .stemming import stem

TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_WSD_WINDOW = 10


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str
    start: int
    end: int
    is_stopword: bool = False


@dataclass(frozen=True)
class NEAnnotation:
    token_span: tuple[int, int]  # [first, last] token indexes, inclusive
    matched_name: str            # normalized surface form
    entity_id: Optional[str] = None
    class_id: Optional[str] = None
    name_known: bool = True

    def __post_init__(self):
        if not (self.name_known or self.class_id or self.entity_id):
            raise ValueError("NE annotation must carry at least one feature")


@dataclass(frozen=True)
class ClassMention:
    token_span: tuple[int, int]
    class_id: str


@dataclass(frozen=True)
class WNAnnotation:
    token_index: int
    lemma: str
    sense_id: str
    hypernym_id: Optional[str]
    overlap_score: int


@dataclass(frozen=True)
class AnnotatedText:
    tokens: tuple[Token, ...]
    ne_annotations: tuple[NEAnnotation, ...]
    wn_annotations: tuple[WNAnnotation, ...]
    keyword_stems: tuple[str, ...]


def load_default_stopwords() -> frozenset[str]:
    data = resources.files("semsearch.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in data.splitlines() if w.strip())


def load_stopwords(path) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(w.strip() for w in fh if w.strip())


def load_corpus(path) -> dict[str, str]:
    """Read a corpus file: one document per line as 'doc_id<TAB>text'."""
    docs: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'doc_id<TAB>text'")
            doc_id, text = line.split("\t", 1)
            if doc_id in docs:
                raise ValueError(f"{path}:{line_no}: duplicate doc id {doc_id!r}")
            docs[doc_id] = text
    return docs


def tokenize_and_filter(text: str, stopwords: frozenset[str]) -> list[Token]:
    """Split ``text`` into maximal alphanumeric runs, flagging stopwords."""
    out = []
    for m in TOKEN_RE.finditer(text):
        norm = m.group().lower()
        out.append(Token(m.group(), norm, m.start(), m.end(), norm in stopwords))
    return out


def normalize_name(name: str) -> str:
    """Canonical one-space lowercase form used in triple name slots."""
    return " ".join(m.group().lower() for m in TOKEN_RE.finditer(name))


@lru_cache(maxsize=64)
def _name_gazetteer(kb: KnowledgeBase) -> tuple[dict[tuple[str, ...], frozenset[str]], int]:
    table: dict[tuple[str, ...], set[str]] = {}
    for ent in kb.entities.values():
        for name in ent.all_names:
            key = tuple(normalize_name(name).split())
            if key:
                table.setdefault(key, set()).add(ent.entity_id)
    frozen = {k: frozenset(v) for k, v in table.items()}
    return frozen, max((len(k) for k in frozen), default=0)


_CAMEL_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


def class_name_tokens(class_id: str) -> tuple[str, ...]:
    """Stemmed word sequence of a class id, e.g. FootballClub -> (footbal, club)."""
    words = []
    for chunk in re.split(r"[_\-\s]+", class_id):
        words.extend(m.group().lower() for m in _CAMEL_RE.finditer(chunk))
    return tuple(stem(w) for w in words)


@lru_cache(maxsize=64)
def _class_gazetteer(kb: KnowledgeBase) -> tuple[dict[tuple[str, ...], str], int]:
    table: dict[tuple[str, ...], str] = {}
    for class_id in sorted(kb.classes):
        key = class_name_tokens(class_id)
        if key and key not in table:
            table[key] = class_id
    return table, max((len(k) for k in table), default=0)


def recognize_entities(tokens: Sequence[Token], kb: KnowledgeBase) -> list[NEAnnotation]:
    """Greedy leftmost-longest gazetteer match over token sequences.

    Every entity sharing the matched name yields its own annotation on the
    span; scanning resumes after the match, so spans never overlap.
    """
    table, max_len = _name_gazetteer(kb)
    norms = [t.normalized for t in tokens]
    out: list[NEAnnotation] = []
    i = 0
    while i < len(norms):
        matched_len = 0
        for length in range(min(max_len, len(norms) - i), 0, -1):
            ids = table.get(tuple(norms[i : i + length]))
            if ids:
                name = " ".join(norms[i : i + length])
                for eid in sorted(ids):
                    ent = kb.entities[eid]
                    out.append(
                        NEAnnotation(
                            token_span=(i, i + length - 1),
                            matched_name=name,
                            entity_id=eid,
                            class_id=ent.class_id,
                        )
                    )
                matched_len = length
                break
        i += matched_len if matched_len else 1
    return out


def recognize_class_mentions(
    tokens: Sequence[Token],
    kb: KnowledgeBase,
    occupied: Sequence[tuple[int, int]] = (),
) -> list[ClassMention]:
    """Match stemmed token runs against class names, skipping NE spans."""
    table, max_len = _class_gazetteer(kb)
    taken = {i for first, last in occupied for i in range(first, last + 1)}
    stems = [stem(t.normalized) for t in tokens]
    out: list[ClassMention] = []
    i = 0
    while i < len(stems):
        if i in taken:
            i += 1
            continue
        matched_len = 0
        for length in range(min(max_len, len(stems) - i), 0, -1):
            if any(j in taken for j in range(i, i + length)):
                continue
            class_id = table.get(tuple(stems[i : i + length]))
            if class_id is not None:
                out.append(ClassMention((i, i + length - 1), class_id))
                matched_len = length
                break
        i += matched_len if matched_len else 1
    return out


@lru_cache(maxsize=16384)
def _sense_signature(kb: KnowledgeBase, sense_id: str, stopwords: frozenset[str]) -> frozenset[str]:
    """Stemmed content words of the sense's gloss and lemmas plus the lemmas
    and glosses of its direct hypernyms and hyponyms."""
    sense = kb.senses[sense_id]
    words: list[str] = []

    def add(text: str) -> None:
        for m in TOKEN_RE.finditer(text.lower()):
            if m.group() not in stopwords:
                words.append(stem(m.group()))

    add(sense.gloss)
    for lemma in sense.lemmas:
        add(lemma)
    for rel_id in sense.direct_hypernyms + sense.direct_hyponyms:
        rel = kb.senses[rel_id]
        add(rel.gloss)
        for lemma in rel.lemmas:
            add(lemma)
    return frozenset(words)


def disambiguate_senses(
    tokens: Sequence[Token],
    ne_spans: Sequence[tuple[int, int]],
    kb: KnowledgeBase,
    window: Optional[int] = DEFAULT_WSD_WINDOW,
    stopwords: frozenset[str] = frozenset(),
) -> list[WNAnnotation]:
    """Assign a sense to each non-stopword token outside NE spans that has
    sense candidates, by maximal stem overlap between each candidate's
    signature and the surrounding context.

    ``window`` counts non-stopword tokens on each side; None means the
    whole text.  Ties (including all-zero overlap) go to the earliest
    candidate in lexicon order.
    """
    in_ne = {i for first, last in ne_spans for i in range(first, last + 1)}
    content_positions = [i for i, t in enumerate(tokens) if not t.is_stopword]
    content_stems = [stem(tokens[i].normalized) for i in content_positions]
    pos_rank = {p: r for r, p in enumerate(content_positions)}

    out: list[WNAnnotation] = []
    for i, token in enumerate(tokens):
        if token.is_stopword or i in in_ne:
            continue
        candidates = kb.sense_candidates(token.normalized)
        if not candidates:
            continue
        rank = pos_rank[i]
        if window is None:
            lo, hi = 0, len(content_stems)
        else:
            lo, hi = max(0, rank - window), rank + window + 1
        context = {
            s for r, s in enumerate(content_stems[lo:hi], start=lo) if r != rank
        }
        best = candidates[0]
        best_score = len(_sense_signature(kb, best.sense_id, stopwords) & context)
        for cand in candidates[1:]:
            score = len(_sense_signature(kb, cand.sense_id, stopwords) & context)
            if score > best_score:
                best, best_score = cand, score
        hypernym = best.direct_hypernyms[0] if best.direct_hypernyms else None
        out.append(
            WNAnnotation(
                token_index=i,
                lemma=token.normalized,
                sense_id=best.sense_id,
                hypernym_id=hypernym,
                overlap_score=best_score,
            )
        )
    return out


def annotate(
    text: str,
    kb: KnowledgeBase,
    window: Optional[int] = DEFAULT_WSD_WINDOW,
    stopwords: Optional[frozenset[str]] = None,
    use_ne: bool = True,
    use_wn: bool = True,
) -> AnnotatedText:
    """Full annotation pipeline: tokenize, recognize entities, disambiguate
    senses, and collect leftover keyword stems.

    ``use_ne`` / ``use_wn`` gate the respective annotation layers; disabled
    layers release their tokens back to the keyword stream.
    """
    if stopwords is None:
        stopwords = load_default_stopwords()
    tokens = tokenize_and_filter(text, stopwords)
    ne_annotations = recognize_entities(tokens, kb) if use_ne else []
    ne_spans = sorted({a.token_span for a in ne_annotations})
    wn_annotations = (
        disambiguate_senses(tokens, ne_spans, kb, window, stopwords) if use_wn else []
    )
    in_ne = {i for first, last in ne_spans for i in range(first, last + 1)}
    sensed = {a.token_index for a in wn_annotations}
    keywords = tuple(
        stem(t.normalized)
        for i, t in enumerate(tokens)
        if not t.is_stopword and i not in in_ne and i not in sensed
    )
    return AnnotatedText(
        tokens=tuple(tokens),
        ne_annotations=tuple(ne_annotations),
        wn_annotations=tuple(wn_annotations),
        keyword_stems=keywords,
    )
