from __future__ import annotations

import pytest

from semsearch.annotate import load_default_stopwords
from semsearch.kb import load_knowledge_base
from semsearch.toydata import load_toy_kb


def write_kb_files(
    directory,
    entities=(),
    taxonomy=(),
    lexicon=(),
    facts=(),
    phrases=(),
):
    """Write ad-hoc KB files; rows are given as raw TSV field tuples."""
    directory.mkdir(parents=True, exist_ok=True)
    paths = {}
    contents = {
        "entities": entities,
        "taxonomy": taxonomy,
        "lexicon": lexicon,
        "facts": facts,
        "phrases": phrases,
    }
    for name, rows in contents.items():
        path = directory / f"{name}.tsv"
        path.write_text(
            "".join("\t".join(row) + "\n" for row in rows), encoding="utf-8"
        )
        paths[name] = path
    return paths


def make_kb(directory, **kwargs):
    paths = write_kb_files(directory, **kwargs)
    return load_knowledge_base(
        paths["entities"],
        paths["taxonomy"],
        paths["lexicon"],
        paths["facts"],
        paths["phrases"],
    )


@pytest.fixture(scope="session")
def toy_kb(tmp_path_factory):
    return load_toy_kb(tmp_path_factory.mktemp("toykb"))


@pytest.fixture(scope="session")
def stopwords():
    return load_default_stopwords()
