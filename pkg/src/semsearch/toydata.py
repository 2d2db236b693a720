"""Small hand-built dataset: knowledge base, 20-document corpus, query set,
and judgments.

The queries exercise the motivating cases of the search models: alias
lookup (Bombay/Mumbai), class search (football clubs), name+class
disambiguation (Paris City), fully identified entities (Paris, Texas),
synonym matching (temblor), and relation-based expansion (natural calamity
in Southeast Asia).  Used by the experiment script and the acceptance
suite.
"""

from __future__ import annotations

from pathlib import Path

from .kb import KnowledgeBase, load_knowledge_base

TAXONOMY = [
    ("Entity", []),
    ("Location", ["Entity"]),
    ("Settlement", ["Location"]),
    ("City", ["Settlement"]),
    ("Region", ["Location"]),
    ("Country", ["Location"]),
    ("State", ["Location"]),
    ("Organization", ["Entity"]),
    ("SportsClub", ["Organization"]),
    ("FootballClub", ["SportsClub"]),
    ("Agent", ["Entity"]),
    ("Person", ["Agent"]),
    ("Celebrity", ["Person"]),
    ("TimePeriod", ["Entity"]),
]

ENTITIES = [
    # (id, class, canonical name, aliases)
    ("bombay", "City", "Bombay", ["Mumbai", "Mumbai City"]),
    ("paris_fr", "City", "Paris", ["Paris France"]),
    ("paris_tx", "City", "Paris", ["Paris Texas"]),
    ("paris_hilton", "Celebrity", "Paris Hilton", ["Paris"]),
    ("chelsea", "FootballClub", "Chelsea", ["Chelsea FC"]),
    ("barcelona", "FootballClub", "Barcelona", ["FC Barcelona"]),
    ("arsenal", "FootballClub", "Arsenal", []),
    ("indonesia", "Country", "Indonesia", []),
    ("philippines", "Country", "Philippines", []),
    ("southeast_asia", "Region", "Southeast Asia", []),
    ("usa", "Country", "United States of America", ["USA", "United States"]),
    ("george_washington", "Person", "George Washington", []),
    ("virginia_colony", "Region", "Virginia Colony", []),
]

LEXICON = [
    # (id, lemmas, hypernyms, gloss)
    (
        "earthquake",
        ["earthquake", "temblor", "quake"],
        ["geological_phenomenon"],
        "sudden shaking of the ground caused by movement of rock below the surface",
    ),
    (
        "geological_phenomenon",
        ["geological phenomenon"],
        ["natural_calamity"],
        "a natural event involving the structure of the earth",
    ),
    (
        "natural_calamity",
        ["calamity", "disaster", "catastrophe"],
        [],
        "an event resulting in great loss and misfortune",
    ),
    (
        "flood",
        ["flood", "deluge", "inundation"],
        ["natural_calamity"],
        "the rising of a body of water and its overflowing onto normally dry land",
    ),
]

FACTS = [
    ("indonesia", "locatedIn", "southeast_asia"),
    ("philippines", "locatedIn", "southeast_asia"),
    ("george_washington", "bornIn", "virginia_colony"),
]

PHRASES = [
    ("in", "locatedIn"),
    ("located in", "locatedIn"),
    ("born", "bornIn"),
    ("born in", "bornIn"),
    ("was born in", "bornIn"),
]

CORPUS = [
    ("d01", "Mumbai floods disrupted the city transport network"),
    ("d02", "Mumbai City reported heavy monsoon rain"),
    ("d03", "Bombay markets reopened after the storm"),
    ("d04", "Chelsea won the league title"),
    ("d05", "Barcelona signed a new striker"),
    ("d06", "Arsenal defeated the visitors"),
    ("d07", "Paris France is lovely in the spring"),
    ("d08", "Paris France opened a new museum"),
    ("d09", "Paris Texas hosted a chili festival"),
    ("d10", "Paris Texas paved its main street"),
    ("d11", "Paris Hilton attended a charity gala"),
    ("d12", "Paris Hilton launched a new fragrance"),
    ("d13", "Earthquake strikes Indonesia killing dozens"),
    ("d14", "Philippines hit by powerful earthquake"),
    ("d15", "Natural calamity preparedness in Southeast Asia"),
    ("d16", "Earthquake damage in the United States"),
    ("d17", "Temblor shakes the United States west coast"),
    ("d18", "George Washington was born in the Virginia Colony"),
    ("d19", "George Washington crossed the Delaware river"),
    ("d20", "The club sandwich remains a lunch favorite"),
]

QUERIES = [
    ("q1", "Bombay"),
    ("q2", "football clubs"),
    ("q3", "Paris City"),
    ("q4", "Paris, Texas"),
    ("q5", "temblor in USA"),
    ("q6", "natural calamity in Southeast Asia"),
    ("q7", "Where was George Washington born"),
    ("q8", "Mumbai floods"),
]

QRELS = {
    "q1": {"d01", "d02", "d03"},
    "q2": {"d04", "d05", "d06"},
    "q3": {"d07", "d08", "d09", "d10"},
    "q4": {"d09", "d10"},
    "q5": {"d16", "d17"},
    "q6": {"d13", "d14", "d15"},
    "q7": {"d18"},
    "q8": {"d01"},
}


def _join(values: list[str]) -> str:
    return "|".join(v.replace("|", "\\|") for v in values)


def write_toy_dataset(directory) -> dict[str, Path]:
    """Write all dataset files into ``directory`` and return their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = {
        "entities": directory / "entities.tsv",
        "taxonomy": directory / "taxonomy.tsv",
        "lexicon": directory / "lexicon.tsv",
        "facts": directory / "facts.tsv",
        "phrases": directory / "phrases.tsv",
        "corpus": directory / "corpus.tsv",
        "queries": directory / "queries.tsv",
        "qrels": directory / "qrels.txt",
    }
    with open(paths["taxonomy"], "w", encoding="utf-8") as fh:
        for class_id, supers in TAXONOMY:
            fh.write(f"{class_id}\t{_join(supers)}\n")
    with open(paths["entities"], "w", encoding="utf-8") as fh:
        for eid, class_id, name, aliases in ENTITIES:
            fh.write(f"{eid}\t{class_id}\t{name}\t{_join(aliases)}\n")
    with open(paths["lexicon"], "w", encoding="utf-8") as fh:
        for sid, lemmas, hypers, gloss in LEXICON:
            fh.write(f"{sid}\t{_join(lemmas)}\t{_join(hypers)}\t{gloss}\n")
    with open(paths["facts"], "w", encoding="utf-8") as fh:
        for subj, rel, obj in FACTS:
            fh.write(f"{subj}\t{rel}\t{obj}\n")
    with open(paths["phrases"], "w", encoding="utf-8") as fh:
        for phrase, rel in PHRASES:
            fh.write(f"{phrase}\t{rel}\n")
    with open(paths["corpus"], "w", encoding="utf-8") as fh:
        for doc_id, text in CORPUS:
            fh.write(f"{doc_id}\t{text}\n")
    with open(paths["queries"], "w", encoding="utf-8") as fh:
        for query_id, text in QUERIES:
            fh.write(f"{query_id}\t{text}\n")
    with open(paths["qrels"], "w", encoding="utf-8") as fh:
        for query_id, docs in sorted(QRELS.items()):
            for doc_id in sorted(docs):
                fh.write(f"{query_id} 0 {doc_id} 1\n")
    return paths


def load_toy_kb(directory) -> KnowledgeBase:
    paths = write_toy_dataset(directory)
    return load_knowledge_base(
        paths["entities"],
        paths["taxonomy"],
        paths["lexicon"],
        paths["facts"],
        paths["phrases"],
    )
