"""End-to-end batch pipeline: corpus indexing and query-batch search for a
chosen search model."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional

from .annotate import DEFAULT_WSD_WINDOW, annotate, load_default_stopwords
from .expand import Model, QueryReport, document_terms, query_terms
from .index import Index, RankedResult, build_index, search
from .kb import KnowledgeBase

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """Settings shared by the pipeline commands."""

    entities: str = ""
    taxonomy: str = ""
    lexicon: str = ""
    facts: str = ""
    phrases: str = ""
    corpus: str = ""
    index_path: str = ""
    model: Model = Model.SEMANTIC
    wsd_window: int = DEFAULT_WSD_WINDOW
    sa: bool = True
    top_k: int = 10
    seed: int = 0


def build_document_bags(
    docs: Mapping[str, str],
    kb: KnowledgeBase,
    model: Model,
    wsd_window: int = DEFAULT_WSD_WINDOW,
    stopwords: Optional[frozenset[str]] = None,
) -> dict[str, dict[str, float]]:
    if stopwords is None:
        stopwords = load_default_stopwords()
    bags = {}
    for doc_id, text in sorted(docs.items()):
        annotated = annotate(
            text,
            kb,
            window=wsd_window,
            stopwords=stopwords,
            use_ne=model.use_ne,
            use_wn=model.use_wn,
        )
        bags[doc_id] = document_terms(annotated, kb)
    return bags


def index_corpus(
    docs: Mapping[str, str],
    kb: KnowledgeBase,
    model: Model,
    wsd_window: int = DEFAULT_WSD_WINDOW,
    stopwords: Optional[frozenset[str]] = None,
) -> Index:
    bags = build_document_bags(docs, kb, model, wsd_window, stopwords)
    return build_index(bags, model=model.value)


def run_queries(
    index: Index,
    queries: Mapping[str, str],
    kb: KnowledgeBase,
    model: Model,
    top_k: int = 10,
    sa: Optional[bool] = None,
    stopwords: Optional[frozenset[str]] = None,
) -> tuple[dict[str, list[RankedResult]], dict[str, QueryReport]]:
    """Search every query; returns rankings and per-query expansion traces.

    ``sa`` overrides the model's default spreading-activation gating
    (only meaningful for the semantic model).
    """
    if stopwords is None:
        stopwords = load_default_stopwords()
    results: dict[str, list[RankedResult]] = {}
    reports: dict[str, QueryReport] = {}
    for query_id, text in sorted(queries.items()):
        bag, report = query_terms(text, kb, model, stopwords, use_sa=sa)
        if not bag:
            log.warning("query %s produced no terms", query_id)
        results[query_id] = search(index, bag, top_k) if bag else []
        reports[query_id] = report
    return results, reports


def load_queries(path) -> dict[str, str]:
    """Read a queries file: 'query_id<TAB>query text' per line."""
    queries: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(f"{path}:{line_no}: expected 'query_id<TAB>text'")
            query_id, text = line.split("\t", 1)
            if query_id in queries:
                raise ValueError(f"{path}:{line_no}: duplicate query id {query_id!r}")
            queries[query_id] = text
    return queries
