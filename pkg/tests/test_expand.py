import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semsearch.annotate import NEAnnotation, WNAnnotation, tokenize_and_filter
from semsearch.expand import (
    Model,
    Triple,
    document_terms,
    expand_entity_triples,
    expand_sense_triples,
    keyword_term,
    map_interrogative,
    most_specific_triple,
    query_terms,
    recognize_relation,
    sa_expand,
)
from semsearch.annotate import annotate
from semsearch.stemming import stem
from tests.conftest import make_kb


def test_triple_encoding():
    assert Triple("ne", "bombay", "*", "*").encode() == "ne:bombay|*|*"
    assert Triple("ne", "*", "City", "*").encode() == "ne:*|city|*"
    assert Triple("wn", "*", "*", "s:flood").encode() == "wn:*|*|s:flood"


def test_triple_encoding_escapes_pipes():
    assert Triple("ne", "a|b", "*", "*").encode() == "ne:a\\|b|*|*"


def test_all_wildcard_triple_rejected():
    with pytest.raises(ValueError):
        Triple("ne", "*", "*", "*")


def test_keyword_term():
    assert keyword_term(stem("floods")) == "kw:flood"


def test_model_gating():
    assert not Model.KEYWORD.use_ne and not Model.KEYWORD.use_wn
    assert Model.WORDNET.use_wn and not Model.WORDNET.use_ne
    assert Model.KW_NE_WH.use_ne and Model.KW_NE_WH.use_wh
    assert not Model.KW_NE_WH.use_wn and not Model.KW_NE_WH.use_sa
    assert Model.SEMANTIC.use_ne and Model.SEMANTIC.use_wn
    assert Model.SEMANTIC.use_wh and Model.SEMANTIC.use_sa


@pytest.fixture(scope="module")
def mini_kb(tmp_path_factory):
    return make_kb(
        tmp_path_factory.mktemp("mini"),
        taxonomy=[("Location", ""), ("City", "Location")],
        entities=[("B1", "City", "Bombay", "Mumbai")],
    )


def test_entity_expansion_nine_triples(mini_kb):
    ann = NEAnnotation((0, 0), "bombay", entity_id="e:B1", class_id="City")
    encoded = {t.encode() for t in expand_entity_triples(ann, mini_kb)}
    assert encoded == {
        "ne:bombay|*|*",
        "ne:*|city|*",
        "ne:bombay|city|*",
        "ne:mumbai|*|*",
        "ne:*|location|*",
        "ne:bombay|location|*",
        "ne:mumbai|city|*",
        "ne:mumbai|location|*",
        "ne:*|*|e:b1",
    }


def test_entity_expansion_matched_alias(mini_kb):
    # Matching via the alias swaps which name counts as the alternative.
    ann = NEAnnotation((0, 0), "mumbai", entity_id="e:B1", class_id="City")
    encoded = {t.encode() for t in expand_entity_triples(ann, mini_kb)}
    assert "ne:bombay|*|*" in encoded
    assert "ne:mumbai|*|*" in encoded
    assert len(encoded) == 9


def test_entity_expansion_name_only(mini_kb):
    ann = NEAnnotation(
        (0, 0), "bombay", entity_id=None, class_id=None, name_known=True
    )
    encoded = {t.encode() for t in expand_entity_triples(ann, mini_kb)}
    assert encoded == {"ne:bombay|*|*", "ne:mumbai|*|*"}


def test_entity_expansion_count_law(tmp_path):
    # 2 aliases, 3 superclasses: 4 + 4 + 6 + 6 = 20 triples.
    kb = make_kb(
        tmp_path,
        taxonomy=[("A", ""), ("B", "A"), ("C", "B"), ("D", "C")],
        entities=[("x", "D", "Name", "Alias One|Alias Two")],
    )
    ann = NEAnnotation((0, 0), "name", entity_id="e:x", class_id="D")
    assert len(expand_entity_triples(ann, kb)) == 20


def test_sense_expansion_mirrors_entity_expansion(toy_kb):
    ann = WNAnnotation(
        token_index=0,
        lemma="earthquake",
        sense_id="s:earthquake",
        hypernym_id="s:geological_phenomenon",
        overlap_score=0,
    )
    encoded = {t.encode() for t in expand_sense_triples(ann, toy_kb)}
    # 4 + 2*2 synonyms + 2*1 closure + 2*1 = 12 triples.
    assert len(encoded) == 12
    assert "wn:earthquake|*|*" in encoded
    assert "wn:temblor|*|*" in encoded
    assert "wn:quake|*|*" in encoded
    assert "wn:*|s:geological_phenomenon|*" in encoded
    assert "wn:*|s:natural_calamity|*" in encoded
    assert "wn:temblor|s:natural_calamity|*" in encoded
    assert "wn:*|*|s:earthquake" in encoded


def test_sense_expansion_without_hypernym(toy_kb):
    ann = WNAnnotation(0, "disaster", "s:natural_calamity", None, 0)
    encoded = {t.encode() for t in expand_sense_triples(ann, toy_kb)}
    assert encoded == {
        "wn:disaster|*|*",
        "wn:calamity|*|*",
        "wn:catastrophe|*|*",
        "wn:*|*|s:natural_calamity",
    }


def test_most_specific_triple_order():
    full = NEAnnotation((0, 0), "bombay", entity_id="e:b", class_id="City")
    assert most_specific_triple(full).encode() == "ne:*|*|e:b"
    name_class = NEAnnotation((0, 0), "paris", entity_id=None, class_id="City")
    assert most_specific_triple(name_class).encode() == "ne:paris|city|*"
    class_only = NEAnnotation(
        (0, 0), "x", entity_id=None, class_id="City", name_known=False
    )
    assert most_specific_triple(class_only).encode() == "ne:*|city|*"
    name_only = NEAnnotation((0, 0), "bombay", entity_id=None, class_id=None)
    assert most_specific_triple(name_only).encode() == "ne:bombay|*|*"
    sense = WNAnnotation(0, "flood", "s:flood", "s:natural_calamity", 0)
    assert most_specific_triple(sense).encode() == "wn:*|*|s:flood"


def test_map_interrogative(toy_kb):
    assert map_interrogative("Who", toy_kb).encode() == "ne:*|person|*"
    assert map_interrogative("where", toy_kb).encode() == "ne:*|location|*"
    assert map_interrogative("When", toy_kb).encode() == "ne:*|timeperiod|*"
    for word in ("what", "Which", "how", "why", "city"):
        assert map_interrogative(word, toy_kb) is None


def test_map_interrogative_requires_declared_class(tmp_path):
    kb = make_kb(tmp_path, taxonomy=[("Person", "")])
    assert map_interrogative("who", kb).encode() == "ne:*|person|*"
    assert map_interrogative("where", kb) is None


def _tokens(text):
    return tokenize_and_filter(text, frozenset())


def test_recognize_relation_single(toy_kb):
    match = recognize_relation(_tokens("was born in Virginia"), toy_kb)
    assert match.relation_id == "bornIn"
    assert match.token_span == (0, 2)
    assert not match.multi_relation


def test_recognize_relation_none(toy_kb):
    match = recognize_relation(_tokens("George Washington facts"), toy_kb)
    assert match.relation_id is None and not match.multi_relation


def test_recognize_relation_multiple(toy_kb):
    match = recognize_relation(_tokens("born in x located in y"), toy_kb)
    assert match.relation_id is None
    assert match.multi_relation


def test_recognize_relation_masks_ne_spans(toy_kb):
    # "in" occurs only inside the entity span, so no relation is seen.
    tokens = _tokens("tourism in Indonesia")
    assert recognize_relation(tokens, toy_kb).relation_id == "locatedIn"
    masked = recognize_relation(tokens, toy_kb, ne_spans=[(1, 2)])
    assert masked.relation_id is None


def test_sa_expand_region_query(toy_kb):
    expansion = sa_expand([("e:southeast_asia", 1.0)], "locatedIn", toy_kb)
    assert [(a.added_concept, a.weight) for a in expansion.additions] == [
        ("e:indonesia", 1.0),
        ("e:philippines", 1.0),
    ]
    assert all(a.source_concept == "e:southeast_asia" for a in expansion.additions)


def test_sa_expand_symmetric_direction(toy_kb):
    expansion = sa_expand([("e:indonesia", 2.0)], "locatedIn", toy_kb)
    assert [(a.added_concept, a.weight) for a in expansion.additions] == [
        ("e:southeast_asia", 2.0)
    ]


def test_sa_expand_keeps_max_weight(toy_kb):
    expansion = sa_expand(
        [("e:indonesia", 1.0), ("e:philippines", 3.0)], "locatedIn", toy_kb
    )
    (add,) = expansion.additions
    assert add.added_concept == "e:southeast_asia"
    assert add.weight == 3.0


def test_sa_expand_wrong_relation(toy_kb):
    assert sa_expand([("e:indonesia", 1.0)], "bornIn", toy_kb).additions == ()


def test_document_terms_counts_per_mention(toy_kb, stopwords):
    annotated = annotate("Chelsea beat Chelsea", toy_kb, stopwords=stopwords)
    bag = document_terms(annotated, toy_kb)
    assert bag["ne:*|*|e:chelsea"] == 2
    assert bag["ne:*|footballclub|*"] == 2
    assert bag[keyword_term(stem("beat"))] == 1


def test_document_terms_unknown_words_keyword_only(toy_kb, stopwords):
    annotated = annotate("zebra xylophone", toy_kb, stopwords=stopwords)
    bag = document_terms(annotated, toy_kb)
    assert bag == {keyword_term(stem("zebra")): 1, keyword_term(stem("xylophone")): 1}


# -- query construction ---------------------------------------------------


def _query(text, kb, model, stopwords, **kwargs):
    bag, _ = query_terms(text, kb, model, stopwords, **kwargs)
    return bag


def test_query_keyword_model_stems_only(toy_kb, stopwords):
    bag = _query("Mumbai floods", toy_kb, Model.KEYWORD, stopwords)
    assert bag == {keyword_term(stem("mumbai")): 1, keyword_term(stem("floods")): 1}


def test_query_alias_resolves_to_entity_id(toy_kb, stopwords):
    bag = _query("Bombay", toy_kb, Model.SEMANTIC, stopwords)
    assert bag == {"ne:*|*|e:bombay": 1}


def test_query_class_mention(toy_kb, stopwords):
    bag = _query("football clubs", toy_kb, Model.SEMANTIC, stopwords)
    assert bag == {"ne:*|footballclub|*": 1}


def test_query_name_plus_class_narrows_candidates(toy_kb, stopwords):
    bag = _query("Paris City", toy_kb, Model.SEMANTIC, stopwords)
    assert bag == {"ne:paris|city|*": 1}


def test_query_full_identifier(toy_kb, stopwords):
    bag = _query("Paris, Texas", toy_kb, Model.SEMANTIC, stopwords)
    assert bag == {"ne:*|*|e:paris_tx": 1}


def test_query_ambiguous_name_keeps_all_candidates(toy_kb, stopwords):
    bag = _query("Paris", toy_kb, Model.SEMANTIC, stopwords)
    assert bag == {
        "ne:*|*|e:paris_fr": 1,
        "ne:*|*|e:paris_hilton": 1,
        "ne:*|*|e:paris_tx": 1,
    }


def test_query_interrogative_and_sa(toy_kb, stopwords):
    bag, report = query_terms(
        "Where was George Washington born", toy_kb, Model.SEMANTIC, stopwords
    )
    assert bag == {
        "ne:*|location|*": 1,
        "ne:*|*|e:george_washington": 1,
        "ne:*|*|e:virginia_colony": 1.0,
        keyword_term(stem("born")): 1,
    }
    assert report.interrogative.encode() == "ne:*|location|*"
    assert report.relation.relation_id == "bornIn"
    assert [a.added_concept for a in report.sa.additions] == ["e:virginia_colony"]


def test_query_interrogative_dropped(toy_kb, stopwords):
    bag = _query("What floods", toy_kb, Model.KW_NE_WH, stopwords)
    assert bag == {keyword_term(stem("floods")): 1}


def test_query_sa_toggle(toy_kb, stopwords):
    on = _query("natural calamity in Southeast Asia", toy_kb, Model.SEMANTIC, stopwords)
    off = _query(
        "natural calamity in Southeast Asia",
        toy_kb,
        Model.SEMANTIC,
        stopwords,
        use_sa=False,
    )
    assert "ne:*|*|e:indonesia" in on
    assert "ne:*|*|e:philippines" in on
    assert "ne:*|*|e:indonesia" not in off
    assert set(off) < set(on)


def test_query_sa_requires_ne_model(toy_kb, stopwords):
    bag = _query(
        "natural calamity in Southeast Asia",
        toy_kb,
        Model.WORDNET,
        stopwords,
        use_sa=True,
    )
    assert all(not term.startswith("ne:") for term in bag)


def test_query_multi_relation_skips_sa(toy_kb, stopwords):
    bag, report = query_terms(
        "born in x located in Southeast Asia", toy_kb, Model.SEMANTIC, stopwords
    )
    assert report.relation.multi_relation
    assert report.sa.additions == ()
    assert "ne:*|*|e:indonesia" not in bag


def test_query_wordnet_model(toy_kb, stopwords):
    bag = _query("temblor damage", toy_kb, Model.WORDNET, stopwords)
    assert bag == {"wn:*|*|s:earthquake": 1, keyword_term(stem("damage")): 1}


def test_query_repeated_term_weight(toy_kb, stopwords):
    bag = _query("flood flood", toy_kb, Model.SEMANTIC, stopwords)
    assert bag == {"wn:*|*|s:flood": 2}


# -- property tests -------------------------------------------------------


@st.composite
def annotated_entities(draw):
    n_aliases = draw(st.integers(min_value=0, max_value=5))
    n_supers = draw(st.integers(min_value=0, max_value=5))
    return n_aliases, n_supers


@settings(max_examples=80, deadline=None)
@given(annotated_entities())
def test_entity_count_law_random(tmp_path_factory, counts):
    n_aliases, n_supers = counts
    directory = tmp_path_factory.mktemp("law")
    classes = [f"S{i}" for i in range(n_supers)] + ["Leaf"]
    taxonomy = []
    for i, cid in enumerate(classes[:-1]):
        taxonomy.append((cid, classes[i - 1] if i else ""))
    taxonomy.append(("Leaf", classes[-2] if n_supers else ""))
    aliases = "|".join(f"alias {i}" for i in range(n_aliases))
    kb = make_kb(
        directory,
        taxonomy=taxonomy,
        entities=[("x", "Leaf", "The Name", aliases)],
    )
    ann = NEAnnotation((0, 0), "the name", entity_id="e:x", class_id="Leaf")
    triples = expand_entity_triples(ann, kb)
    expected = 4 + 2 * n_aliases + 2 * n_supers + n_aliases * n_supers
    assert len(triples) == expected
