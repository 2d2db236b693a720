"""Generalized terms and semantic expansion.

Documents are expanded with every triple implied by their entity and sense
annotations (aliases, synonyms, superclasses, super-hypernyms).  Queries
keep only the most specific available triple per concept, map a leading
interrogative word to a class, and may be enriched by single-step
query-oriented spreading activation over the fact table.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .annotate import (
    AnnotatedText,
    ClassMention,
    NEAnnotation,
    Token,
    WNAnnotation,
    disambiguate_senses,
    load_default_stopwords,
    normalize_name,
    recognize_class_mentions,
    recognize_entities,
    tokenize_and_filter,
)
from .kb import ENTITY_PREFIX, SENSE_PREFIX, KnowledgeBase
from .stemming import stem

log = logging.getLogger(__name__)

WILDCARD = "*"

NE = "ne"
WN = "wn"


@dataclass(frozen=True)
class Triple:
    kind: str            # NE or WN
    name: str            # surface name / lemma, or wildcard
    hyper: str           # class id / hypernym sense id, or wildcard
    concept_id: str      # entity id / sense id, or wildcard

    def __post_init__(self):
        if self.name == self.hyper == self.concept_id == WILDCARD:
            raise ValueError("triple needs at least one non-wildcard slot")

    def encode(self) -> str:
        esc = lambda s: s.lower().replace("|", "\\|")
        return f"{self.kind}:{esc(self.name)}|{esc(self.hyper)}|{esc(self.concept_id)}"


def keyword_term(stem_str: str) -> str:
    return f"kw:{stem_str}"


# A generalized-term bag maps canonical term encodings to positive weights
# (occurrence counts for documents, non-negative reals for queries).
TermBag = dict[str, float]


class Model(str, Enum):
    """The four compared search models; each gates pipeline stages."""

    KEYWORD = "keyword"
    WORDNET = "wordnet"
    KW_NE_WH = "kw-ne-wh"
    SEMANTIC = "semantic"

    @property
    def use_ne(self) -> bool:
        return self in (Model.KW_NE_WH, Model.SEMANTIC)

    @property
    def use_wn(self) -> bool:
        return self in (Model.WORDNET, Model.SEMANTIC)

    @property
    def use_wh(self) -> bool:
        return self in (Model.KW_NE_WH, Model.SEMANTIC)

    @property
    def use_sa(self) -> bool:
        return self is Model.SEMANTIC


def _entity_aliases(ann: NEAnnotation, kb: KnowledgeBase) -> list[str]:
    """Alternative normalized names for the annotated entity (or for every
    entity carrying the matched name when the id is unresolved)."""
    if ann.entity_id is not None:
        entities = [kb.entity(ann.entity_id)]
    elif ann.name_known:
        entities = sorted(kb.entities_by_name(ann.matched_name), key=lambda e: e.entity_id)
    else:
        return []
    names = {normalize_name(n) for e in entities for n in e.all_names}
    names.discard(normalize_name(ann.matched_name))
    return sorted(names)


def expand_entity_triples(ann: NEAnnotation, kb: KnowledgeBase) -> set[Triple]:
    """All implied NE triples for one entity mention.

    For a fully annotated entity with alias set A and superclass closure S
    the result has exactly 4 + 2|A| + 2|S| + |A||S| triples.
    """
    triples: set[Triple] = set()
    name = normalize_name(ann.matched_name) if ann.name_known else None
    aliases = _entity_aliases(ann, kb) if ann.name_known else []
    class_id = ann.class_id
    supers = kb.superclass_closure(class_id) if class_id is not None else []

    if name:
        triples.add(Triple(NE, name, WILDCARD, WILDCARD))
        for a in aliases:
            triples.add(Triple(NE, a, WILDCARD, WILDCARD))
    if class_id:
        triples.add(Triple(NE, WILDCARD, class_id, WILDCARD))
        for s in supers:
            triples.add(Triple(NE, WILDCARD, s, WILDCARD))
    if name and class_id:
        for c in [class_id] + supers:
            triples.add(Triple(NE, name, c, WILDCARD))
            for a in aliases:
                triples.add(Triple(NE, a, c, WILDCARD))
    if ann.entity_id:
        triples.add(Triple(NE, WILDCARD, WILDCARD, ann.entity_id))
    return triples


def expand_sense_triples(ann: WNAnnotation, kb: KnowledgeBase) -> set[Triple]:
    """All implied WN triples for one disambiguated word, mirroring the
    entity expansion with synonyms for aliases and the hypernym closure for
    superclasses."""
    sense = kb.sense(ann.sense_id)
    word = ann.lemma.lower()
    synonyms = sorted({l.lower() for l in sense.lemmas} - {word})
    hyper = ann.hypernym_id
    supers = kb.hypernym_closure(hyper) if hyper else []

    triples: set[Triple] = {Triple(WN, word, WILDCARD, WILDCARD)}
    for syn in synonyms:
        triples.add(Triple(WN, syn, WILDCARD, WILDCARD))
    if hyper:
        for h in [hyper] + supers:
            triples.add(Triple(WN, WILDCARD, h, WILDCARD))
            triples.add(Triple(WN, word, h, WILDCARD))
            for syn in synonyms:
                triples.add(Triple(WN, syn, h, WILDCARD))
    triples.add(Triple(WN, WILDCARD, WILDCARD, ann.sense_id))
    return triples


def most_specific_triple(ann: NEAnnotation | WNAnnotation) -> Triple:
    """The most specific available triple for a query concept:
    identifier, then name+hyper, then hyper only, then name only."""
    if isinstance(ann, WNAnnotation):
        if ann.sense_id:
            return Triple(WN, WILDCARD, WILDCARD, ann.sense_id)
        if ann.hypernym_id:
            return Triple(WN, ann.lemma.lower(), ann.hypernym_id, WILDCARD)
        return Triple(WN, ann.lemma.lower(), WILDCARD, WILDCARD)
    name = normalize_name(ann.matched_name) if ann.name_known else None
    if ann.entity_id:
        return Triple(NE, WILDCARD, WILDCARD, ann.entity_id)
    if name and ann.class_id:
        return Triple(NE, name, ann.class_id, WILDCARD)
    if ann.class_id:
        return Triple(NE, WILDCARD, ann.class_id, WILDCARD)
    return Triple(NE, name, WILDCARD, WILDCARD)


_INTERROGATIVE_CLASSES = {"who": "Person", "where": "Location", "when": "TimePeriod"}
_DROPPED_INTERROGATIVES = {"what", "which", "how"}


def map_interrogative(leading_token: str, kb: KnowledgeBase) -> Optional[Triple]:
    """Map a leading interrogative word to a class triple, if its target
    class is declared in the taxonomy."""
    word = leading_token.lower()
    if word in _DROPPED_INTERROGATIVES:
        return None
    target = _INTERROGATIVE_CLASSES.get(word)
    if target is None:
        return None
    by_lower = {c.lower(): c for c in sorted(kb.classes)}
    class_id = by_lower.get(target.lower())
    if class_id is None:
        log.warning("interrogative %r maps to class %r, absent from taxonomy",
                    leading_token, target)
        return None
    return Triple(NE, WILDCARD, class_id, WILDCARD)


@dataclass(frozen=True)
class RelationMatch:
    token_span: Optional[tuple[int, int]]
    relation_id: Optional[str]
    multi_relation: bool = False


def recognize_relation(
    tokens: list[Token],
    kb: KnowledgeBase,
    ne_spans: list[tuple[int, int]] = (),
) -> RelationMatch:
    """Find the query's relation phrase.  Tokens inside NE spans are masked.
    More than one disjoint phrase match means the query is out of scope for
    spreading activation and no relation is returned."""
    in_ne = {i for first, last in ne_spans for i in range(first, last + 1)}
    masked = [t.normalized if i not in in_ne else "\x00" for i, t in enumerate(tokens)]
    matches = kb.phrase_matches(masked)
    if not matches:
        return RelationMatch(None, None)
    if len(matches) > 1:
        return RelationMatch(None, None, multi_relation=True)
    first, last, rel = matches[0]
    return RelationMatch((first, last), rel)


@dataclass(frozen=True)
class SAAddition:
    source_concept: str
    added_concept: str
    weight: float


@dataclass(frozen=True)
class SAExpansion:
    relation_id: Optional[str]
    relation_phrase: tuple[str, ...] = ()
    additions: tuple[SAAddition, ...] = ()


def sa_expand(
    query_concepts: list[tuple[str, float]],
    relation_id: str,
    kb: KnowledgeBase,
) -> SAExpansion:
    """Single-step spreading activation: for every query concept, add the
    other argument of each matching fact with the source concept's weight.
    Concepts reached from several sources keep the maximum weight."""
    best: dict[str, SAAddition] = {}
    for concept, weight in query_concepts:
        for fact in sorted(
            kb.facts_matching(relation_id, concept),
            key=lambda f: (f.subject, f.object),
        ):
            other = fact.object if fact.subject == concept else fact.subject
            if other == concept:
                continue
            prev = best.get(other)
            if prev is None or weight > prev.weight:
                best[other] = SAAddition(concept, other, weight)
    additions = tuple(sorted(best.values(), key=lambda a: a.added_concept))
    return SAExpansion(relation_id=relation_id, additions=additions)


def _concept_triple(concept_id: str) -> Triple:
    kind = NE if concept_id.startswith(ENTITY_PREFIX) else WN
    return Triple(kind, WILDCARD, WILDCARD, concept_id)


def document_terms(annotated: AnnotatedText, kb: KnowledgeBase) -> TermBag:
    """Weighted term bag of a document: keyword stems plus the full triple
    expansion of every annotation, counted once per source mention."""
    bag: Counter = Counter()
    for kw in annotated.keyword_stems:
        bag[keyword_term(kw)] += 1
    for ne in annotated.ne_annotations:
        for triple in expand_entity_triples(ne, kb):
            bag[triple.encode()] += 1
    for wn in annotated.wn_annotations:
        for triple in expand_sense_triples(wn, kb):
            bag[triple.encode()] += 1
    return dict(bag)


@dataclass
class QueryReport:
    """Trace of how a query was turned into terms (for --explain output)."""

    tokens: tuple[Token, ...] = ()
    interrogative: Optional[Triple] = None
    ne_annotations: tuple[NEAnnotation, ...] = ()
    class_mentions: tuple[ClassMention, ...] = ()
    wn_annotations: tuple[WNAnnotation, ...] = ()
    chosen_triples: tuple[Triple, ...] = ()
    keywords: tuple[str, ...] = ()
    relation: RelationMatch = field(default_factory=lambda: RelationMatch(None, None))
    sa: SAExpansion = field(default_factory=lambda: SAExpansion(None))


def _group_entity_spans(
    annotations: list[NEAnnotation],
) -> list[tuple[tuple[int, int], list[NEAnnotation]]]:
    spans: dict[tuple[int, int], list[NEAnnotation]] = {}
    for ann in annotations:
        spans.setdefault(ann.token_span, []).append(ann)
    return sorted(spans.items())


def _adjacent_class_mention(
    span: tuple[int, int], mentions: list[ClassMention], used: set[int]
) -> Optional[tuple[int, ClassMention]]:
    for idx, cm in enumerate(mentions):
        if idx in used:
            continue
        if cm.token_span[0] == span[1] + 1 or cm.token_span[1] == span[0] - 1:
            return idx, cm
    return None


def _compatible(candidate: NEAnnotation, class_id: str, kb: KnowledgeBase) -> bool:
    if candidate.class_id is None:
        return False
    return class_id == candidate.class_id or class_id in kb.superclass_closure(
        candidate.class_id
    )


def query_terms(
    query_text: str,
    kb: KnowledgeBase,
    model: Model = Model.SEMANTIC,
    stopwords: Optional[frozenset[str]] = None,
    wsd_window: Optional[int] = None,
    use_sa: Optional[bool] = None,
) -> tuple[TermBag, QueryReport]:
    """Turn a query into its generalized-term bag.

    Pipeline: tokenize, map a leading interrogative, recognize entities and
    class mentions, disambiguate remaining senses, collect keywords, then
    (for the full model) recognize the relation phrase and spread
    activation over the fact table.  Queries are short, so WSD uses the
    whole text as context by default.
    """
    if stopwords is None:
        stopwords = load_default_stopwords()
    report = QueryReport()
    tokens = tokenize_and_filter(query_text, stopwords)
    report.tokens = tuple(tokens)
    bag: Counter = Counter()
    chosen: list[Triple] = []
    consumed: set[int] = set()

    if tokens and model.use_wh:
        wh = map_interrogative(tokens[0].normalized, kb)
        if wh is not None:
            bag[wh.encode()] += 1
            chosen.append(wh)
            report.interrogative = wh
        if tokens[0].normalized in _INTERROGATIVE_CLASSES or (
            tokens[0].normalized in _DROPPED_INTERROGATIVES
        ):
            consumed.add(0)

    ne_annotations: list[NEAnnotation] = []
    class_mentions: list[ClassMention] = []
    concept_ids: Counter = Counter()
    ne_spans: list[tuple[int, int]] = []
    if model.use_ne:
        ne_annotations = recognize_entities(tokens, kb)
        ne_spans = sorted({a.token_span for a in ne_annotations})
        class_mentions = recognize_class_mentions(tokens, kb, ne_spans)
        used_mentions: set[int] = set()
        for span, candidates in _group_entity_spans(ne_annotations):
            adjacent = _adjacent_class_mention(span, class_mentions, used_mentions)
            if len(candidates) > 1 and adjacent is not None:
                idx, cm = adjacent
                surviving = [c for c in candidates if _compatible(c, cm.class_id, kb)]
                if surviving:
                    used_mentions.add(idx)
                    consumed.update(range(cm.token_span[0], cm.token_span[1] + 1))
                    if len(surviving) == 1:
                        candidates = surviving
                    else:
                        triple = Triple(
                            NE, normalize_name(candidates[0].matched_name),
                            cm.class_id, WILDCARD,
                        )
                        bag[triple.encode()] += 1
                        chosen.append(triple)
                        for c in surviving:
                            concept_ids[c.entity_id] += 1
                        consumed.update(range(span[0], span[1] + 1))
                        continue
            for cand in candidates:
                triple = most_specific_triple(cand)
                bag[triple.encode()] += 1
                chosen.append(triple)
                if cand.entity_id:
                    concept_ids[cand.entity_id] += 1
            consumed.update(range(span[0], span[1] + 1))
        for idx, cm in enumerate(class_mentions):
            if idx in used_mentions:
                continue
            triple = Triple(NE, WILDCARD, cm.class_id, WILDCARD)
            bag[triple.encode()] += 1
            chosen.append(triple)
            consumed.update(range(cm.token_span[0], cm.token_span[1] + 1))
    report.ne_annotations = tuple(ne_annotations)
    report.class_mentions = tuple(class_mentions)

    wn_annotations: list[WNAnnotation] = []
    if model.use_wn:
        blocked = sorted(
            ne_spans + [(i, i) for i in consumed if all(not (f <= i <= l) for f, l in ne_spans)]
        )
        wn_annotations = disambiguate_senses(tokens, blocked, kb, wsd_window, stopwords)
        for ann in wn_annotations:
            triple = most_specific_triple(ann)
            bag[triple.encode()] += 1
            chosen.append(triple)
            concept_ids[ann.sense_id] += 1
            consumed.add(ann.token_index)
    report.wn_annotations = tuple(wn_annotations)

    keywords = []
    for i, t in enumerate(tokens):
        if t.is_stopword or i in consumed:
            continue
        kw = stem(t.normalized)
        bag[keyword_term(kw)] += 1
        keywords.append(kw)
    report.keywords = tuple(keywords)
    report.chosen_triples = tuple(chosen)

    final: TermBag = dict(bag)
    if model.use_sa if use_sa is None else (use_sa and model.use_ne):
        relation = recognize_relation(tokens, kb, ne_spans)
        report.relation = relation
        if relation.relation_id is not None:
            concepts = sorted(concept_ids.items())
            expansion = sa_expand(
                [(c, float(w)) for c, w in concepts], relation.relation_id, kb
            )
            phrase = tuple(
                tokens[i].normalized
                for i in range(relation.token_span[0], relation.token_span[1] + 1)
            )
            expansion = SAExpansion(
                relation_id=expansion.relation_id,
                relation_phrase=phrase,
                additions=expansion.additions,
            )
            report.sa = expansion
            for add in expansion.additions:
                enc = _concept_triple(add.added_concept).encode()
                final[enc] = max(final.get(enc, 0.0), add.weight)
    return final, report
