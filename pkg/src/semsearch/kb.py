"""Combined knowledge base: entity catalog, class taxonomy, sense lexicon,
relation facts, and the relation-phrase dictionary.

All five sources are plain tab-separated UTF-8 files ("#" starts a comment
line).  Entity ids and sense ids live in disjoint namespaces and are
prefixed "e:" / "s:" at load time so that mixed concept references in the
fact table are unambiguous.  The loaded knowledge base is immutable and
safe for concurrent readers.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable, Optional

log = logging.getLogger(__name__)

ENTITY_PREFIX = "e:"
SENSE_PREFIX = "s:"

_SUBFIELD_RE = re.compile(r"(?<!\\)\|")


class KBError(Exception):
    """Problem with knowledge-base content."""


class KBParseError(KBError):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class DanglingReferenceError(KBError):
    pass


class CycleError(KBError):
    def __init__(self, kind: str, cycle: list[str]):
        super().__init__(f"{kind} cycle: {' -> '.join(cycle)}")
        self.cycle = cycle


@dataclass(frozen=True)
class EntityRecord:
    entity_id: str
    canonical_name: str
    aliases: frozenset[str]
    class_id: str

    @property
    def all_names(self) -> frozenset[str]:
        return self.aliases | {self.canonical_name}


@dataclass(frozen=True)
class SenseRecord:
    sense_id: str
    lemmas: tuple[str, ...]  # first lemma is the headword
    gloss: str
    direct_hypernyms: tuple[str, ...]
    direct_hyponyms: tuple[str, ...] = ()


@dataclass(frozen=True)
class RelationFact:
    subject: str
    relation_id: str
    object: str


@dataclass(frozen=True)
class RelationPhraseEntry:
    surface_phrase: tuple[str, ...]
    relation_id: str


def _split_subfields(raw: str) -> list[str]:
    if not raw:
        return []
    return [part.replace("\\|", "|") for part in _SUBFIELD_RE.split(raw)]


def _read_rows(path) -> Iterable[tuple[int, list[str]]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            yield line_no, line.split("\t")


class KnowledgeBase:
    """Read-only store built by :func:`load_knowledge_base`."""

    def __init__(
        self,
        entities: dict[str, EntityRecord],
        classes: set[str],
        direct_supers: dict[str, tuple[str, ...]],
        senses: dict[str, SenseRecord],
        sense_order: list[str],
        facts: list[RelationFact],
        phrases: list[RelationPhraseEntry],
    ):
        self.entities = entities
        self.classes = frozenset(classes)
        self.direct_supers = direct_supers
        self.senses = senses
        self._sense_order = sense_order
        self.facts = tuple(facts)
        self.phrases = tuple(phrases)

        self._by_name: dict[str, set[str]] = {}
        for ent in entities.values():
            for name in ent.all_names:
                self._by_name.setdefault(name.lower(), set()).add(ent.entity_id)
        self._senses_by_lemma: dict[str, list[str]] = {}
        for sid in sense_order:
            for lemma in senses[sid].lemmas:
                self._senses_by_lemma.setdefault(lemma.lower(), []).append(sid)
        self._phrase_map = {p.surface_phrase: p.relation_id for p in phrases}
        self._max_phrase_len = max((len(p.surface_phrase) for p in phrases), default=0)

    # -- lookups -----------------------------------------------------------

    def entity(self, entity_id: str) -> EntityRecord:
        try:
            return self.entities[entity_id]
        except KeyError:
            raise DanglingReferenceError(f"unknown entity id {entity_id!r}") from None

    def sense(self, sense_id: str) -> SenseRecord:
        try:
            return self.senses[sense_id]
        except KeyError:
            raise DanglingReferenceError(f"unknown sense id {sense_id!r}") from None

    def entities_by_name(self, name: str) -> set[EntityRecord]:
        """Entities whose canonical name or any alias equals ``name``
        (case-insensitive)."""
        ids = self._by_name.get(name.lower(), set())
        return {self.entities[i] for i in ids}

    def sense_candidates(self, lemma: str) -> list[SenseRecord]:
        """Senses listing ``lemma``, in lexicon file order (priority order)."""
        return [self.senses[s] for s in self._senses_by_lemma.get(lemma.lower(), [])]

    def superclass_closure(self, class_id: str) -> list[str]:
        """Transitive superclasses of ``class_id``, breadth-first, ties by id,
        excluding ``class_id`` itself."""
        if class_id not in self.classes:
            raise DanglingReferenceError(f"unknown class id {class_id!r}")
        return self._closure(class_id, lambda c: self.direct_supers.get(c, ()))

    def hypernym_closure(self, sense_id: str) -> list[str]:
        """Transitive hypernyms of ``sense_id``, breadth-first, ties by id,
        excluding ``sense_id`` itself."""
        if sense_id not in self.senses:
            raise DanglingReferenceError(f"unknown sense id {sense_id!r}")
        return self._closure(sense_id, lambda s: self.senses[s].direct_hypernyms)

    @staticmethod
    def _closure(start: str, successors) -> list[str]:
        seen = {start}
        order: list[str] = []
        frontier = [start]
        while frontier:
            nxt = sorted({s for node in frontier for s in successors(node)} - seen)
            order.extend(nxt)
            seen.update(nxt)
            frontier = nxt
        return order

    def facts_matching(self, relation_id: str, concept: str) -> set[RelationFact]:
        """Facts with ``relation_id`` where ``concept`` is subject or object."""
        return {
            f
            for f in self.facts
            if f.relation_id == relation_id and concept in (f.subject, f.object)
        }

    def relation_for_phrase(self, tokens: Iterable[str]) -> Optional[str]:
        """Relation of the longest dictionary phrase found in ``tokens``
        (lowercase), scanning left to right; None if no phrase matches."""
        tokens = tuple(tokens)
        best: Optional[str] = None
        best_len = 0
        for i in range(len(tokens)):
            top = min(self._max_phrase_len, len(tokens) - i)
            for length in range(top, best_len, -1):
                rel = self._phrase_map.get(tokens[i : i + length])
                if rel is not None:
                    best, best_len = rel, length
                    break
        return best

    def phrase_matches(self, tokens: Iterable[str]) -> list[tuple[int, int, str]]:
        """Leftmost-longest non-overlapping phrase matches as
        (first, last, relation_id) token spans."""
        tokens = tuple(tokens)
        out = []
        i = 0
        while i < len(tokens):
            hit = None
            top = min(self._max_phrase_len, len(tokens) - i)
            for length in range(top, 0, -1):
                rel = self._phrase_map.get(tokens[i : i + length])
                if rel is not None:
                    hit = (i, i + length - 1, rel)
                    break
            if hit is not None:
                out.append(hit)
                i = hit[1] + 1
            else:
                i += 1
        return out


def _check_acyclic(kind: str, nodes: Iterable[str], successors) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    stack_path: list[str] = []

    def visit(node: str) -> None:
        color[node] = GRAY
        stack_path.append(node)
        for succ in successors(node):
            if color.get(succ, WHITE) == GRAY:
                start = stack_path.index(succ)
                raise CycleError(kind, stack_path[start:] + [succ])
            if color.get(succ, WHITE) == WHITE:
                visit(succ)
        stack_path.pop()
        color[node] = BLACK

    for n in sorted(color):
        if color[n] == WHITE:
            visit(n)


def load_knowledge_base(
    entity_path,
    taxonomy_path,
    lexicon_path,
    facts_path,
    phrases_path,
) -> KnowledgeBase:
    """Load and validate the five knowledge-base files."""
    # taxonomy.tsv: class_id <TAB> super1|super2|...
    classes: set[str] = set()
    direct_supers: dict[str, tuple[str, ...]] = {}
    for line_no, fields in _read_rows(taxonomy_path):
        if len(fields) not in (1, 2):
            raise KBParseError(taxonomy_path, line_no, "expected 1 or 2 fields")
        class_id = fields[0].strip()
        if class_id in classes:
            raise KBParseError(taxonomy_path, line_no, f"duplicate class {class_id!r}")
        classes.add(class_id)
        supers = _split_subfields(fields[1].strip()) if len(fields) == 2 else []
        direct_supers[class_id] = tuple(supers)
    for class_id, supers in direct_supers.items():
        for sup in supers:
            if sup not in classes:
                raise DanglingReferenceError(
                    f"class {class_id!r} references undeclared superclass {sup!r}"
                )
    _check_acyclic("taxonomy", classes, lambda c: direct_supers.get(c, ()))

    # entities.tsv: entity_id <TAB> class_id <TAB> canonical_name <TAB> aliases
    entities: dict[str, EntityRecord] = {}
    for line_no, fields in _read_rows(entity_path):
        if len(fields) not in (3, 4):
            raise KBParseError(entity_path, line_no, "expected 3 or 4 fields")
        raw_id, class_id, canonical = (f.strip() for f in fields[:3])
        if not canonical:
            raise KBParseError(entity_path, line_no, "empty canonical name")
        entity_id = ENTITY_PREFIX + raw_id
        if entity_id in entities:
            raise KBParseError(entity_path, line_no, f"duplicate entity id {raw_id!r}")
        if class_id not in classes:
            raise DanglingReferenceError(
                f"{entity_path}:{line_no}: entity {raw_id!r} has unknown class {class_id!r}"
            )
        aliases = frozenset(
            a for a in _split_subfields(fields[3].strip()) if a
        ) if len(fields) == 4 else frozenset()
        if canonical in aliases:
            raise KBParseError(
                entity_path, line_no, f"canonical name {canonical!r} repeated in aliases"
            )
        entities[entity_id] = EntityRecord(entity_id, canonical, aliases, class_id)

    # lexicon.tsv: sense_id <TAB> lemmas <TAB> hypernyms <TAB> gloss
    senses_raw: dict[str, tuple[tuple[str, ...], tuple[str, ...], str]] = {}
    sense_order: list[str] = []
    for line_no, fields in _read_rows(lexicon_path):
        if len(fields) != 4:
            raise KBParseError(lexicon_path, line_no, "expected 4 fields")
        sense_id = SENSE_PREFIX + fields[0].strip()
        if sense_id in senses_raw:
            raise KBParseError(lexicon_path, line_no, f"duplicate sense id {fields[0]!r}")
        lemmas = tuple(l for l in _split_subfields(fields[1].strip()) if l)
        if not lemmas:
            raise KBParseError(lexicon_path, line_no, "sense has no lemmas")
        hypers = tuple(
            SENSE_PREFIX + h for h in _split_subfields(fields[2].strip()) if h
        )
        senses_raw[sense_id] = (lemmas, hypers, fields[3].strip())
        sense_order.append(sense_id)
    for sense_id, (_, hypers, _) in senses_raw.items():
        for h in hypers:
            if h not in senses_raw:
                raise DanglingReferenceError(
                    f"sense {sense_id!r} references unknown hypernym {h!r}"
                )
    _check_acyclic("hypernym", senses_raw, lambda s: senses_raw[s][1])
    hyponyms: dict[str, list[str]] = {s: [] for s in senses_raw}
    for sense_id in sense_order:
        for h in senses_raw[sense_id][1]:
            hyponyms[h].append(sense_id)
    senses = {
        sid: SenseRecord(sid, lemmas, gloss, hypers, tuple(hyponyms[sid]))
        for sid, (lemmas, hypers, gloss) in senses_raw.items()
    }

    # facts.tsv: subject_ref <TAB> relation_id <TAB> object_ref
    def resolve_ref(raw: str, line_no: int) -> str:
        raw = raw.strip()
        if raw.startswith((ENTITY_PREFIX, SENSE_PREFIX)):
            ref = raw
        else:
            as_entity = ENTITY_PREFIX + raw in entities
            as_sense = SENSE_PREFIX + raw in senses
            if as_entity and as_sense:
                raise KBParseError(
                    facts_path, line_no, f"ambiguous concept reference {raw!r}"
                )
            ref = (ENTITY_PREFIX if as_entity else SENSE_PREFIX) + raw
        if ref not in entities and ref not in senses:
            raise DanglingReferenceError(
                f"{facts_path}:{line_no}: fact references unknown concept {raw!r}"
            )
        return ref

    facts: list[RelationFact] = []
    seen_facts: set[tuple[str, str, str]] = set()
    for line_no, fields in _read_rows(facts_path):
        if len(fields) != 3:
            raise KBParseError(facts_path, line_no, "expected 3 fields")
        subj = resolve_ref(fields[0], line_no)
        obj = resolve_ref(fields[2], line_no)
        rel = fields[1].strip()
        row = (subj, rel, obj)
        if row in seen_facts:
            raise KBParseError(facts_path, line_no, f"duplicate fact {row}")
        seen_facts.add(row)
        facts.append(RelationFact(subj, rel, obj))

    # phrases.tsv: surface phrase <TAB> relation_id
    phrases: list[RelationPhraseEntry] = []
    seen_phrases: set[tuple[str, ...]] = set()
    fact_relations = {f.relation_id for f in facts}
    for line_no, fields in _read_rows(phrases_path):
        if len(fields) != 2:
            raise KBParseError(phrases_path, line_no, "expected 2 fields")
        phrase = tuple(fields[0].strip().lower().split())
        if not phrase:
            raise KBParseError(phrases_path, line_no, "empty phrase")
        if phrase in seen_phrases:
            raise KBParseError(phrases_path, line_no, f"duplicate phrase {fields[0]!r}")
        seen_phrases.add(phrase)
        rel = fields[1].strip()
        if rel not in fact_relations:
            log.warning(
                "%s:%d: relation %r has no facts in the knowledge base",
                phrases_path, line_no, rel,
            )
        phrases.append(RelationPhraseEntry(phrase, rel))

    return KnowledgeBase(
        entities=entities,
        classes=classes,
        direct_supers=direct_supers,
        senses=senses,
        sense_order=sense_order,
        facts=facts,
        phrases=phrases,
    )
