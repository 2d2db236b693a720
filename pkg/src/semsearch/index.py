"""Inverted index over generalized terms with tf-idf weighting and cosine
ranking, plus single-file persistence.

Weighting is (1 + ln tf) * ln(1 + N/df); the +1 inside the idf logarithm
keeps corpus-wide terms (e.g. class triples occurring in every document)
from vanishing.  The built index is immutable and safe for concurrent
searches.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass
from typing import Mapping, Sequence

MAGIC = b"SVSM"
FORMAT_VERSION = 1


class IndexError_(Exception):
    """Base class for index persistence problems."""


class IndexFormatError(IndexError_):
    pass


class IndexVersionError(IndexError_):
    pass


@dataclass(frozen=True)
class RankedResult:
    doc_id: str
    score: float
    rank: int


def term_weight(tf: float, df: int, n_docs: int) -> float:
    """(1 + ln tf) * ln(1 + n_docs/df), defined for tf >= 1, 1 <= df <= N."""
    if tf < 1:
        raise ValueError(f"tf must be >= 1, got {tf}")
    if not 1 <= df <= n_docs:
        raise ValueError(f"df must be in [1, {n_docs}], got {df}")
    return (1.0 + math.log(tf)) * math.log(1.0 + n_docs / df)


def _tf_damp(weight: float) -> float:
    # Sub-unit query weights stay linear so they remain positive.
    return 1.0 + math.log(weight) if weight >= 1.0 else weight


class Index:
    """Immutable search index; construct via :func:`build_index` or
    :func:`load_index`."""

    def __init__(
        self,
        doc_ids: list[str],
        terms: list[str],
        df: list[int],
        postings: list[list[tuple[int, float]]],
        norms: list[float],
        model: str = "",
    ):
        self.doc_ids = doc_ids
        self.terms = terms
        self.term_ids = {t: i for i, t in enumerate(terms)}
        self.df = df
        self.postings = postings
        self.norms = norms
        self.model = model

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def document_frequency(self, term: str) -> int:
        tid = self.term_ids.get(term)
        return 0 if tid is None else self.df[tid]


def build_index(doc_bags: Mapping[str, Mapping[str, float]], model: str = "") -> Index:
    """Build vocabulary, postings, and norms from per-document term bags.

    Document frequency counts documents containing each term; posting
    weights come from :func:`term_weight`.  An empty corpus is an error;
    an empty document gets norm 0 and is never retrieved.
    """
    if not doc_bags:
        raise ValueError("cannot index an empty corpus")
    doc_ids = sorted(doc_bags)
    if len(doc_ids) != len(doc_bags):
        raise ValueError("duplicate document ids")
    n_docs = len(doc_ids)
    terms = sorted({t for bag in doc_bags.values() for t in bag})
    term_ids = {t: i for i, t in enumerate(terms)}
    df = [0] * len(terms)
    for bag in doc_bags.values():
        for t in bag:
            df[term_ids[t]] += 1
    postings: list[list[tuple[int, float]]] = [[] for _ in terms]
    norms = [0.0] * n_docs
    for d, doc_id in enumerate(doc_ids):
        total = 0.0
        for t, tf in sorted(doc_bags[doc_id].items()):
            if tf <= 0:
                raise ValueError(f"non-positive weight for term {t!r} in {doc_id!r}")
            tid = term_ids[t]
            w = term_weight(tf, df[tid], n_docs)
            postings[tid].append((d, w))
            total += w * w
        norms[d] = math.sqrt(total)
    return Index(doc_ids, terms, df, postings, norms, model)


def query_vector(index: Index, query_bag: Mapping[str, float]) -> dict[int, float]:
    """Weighted query vector over the index vocabulary; out-of-vocabulary
    terms contribute nothing."""
    vec: dict[int, float] = {}
    for term, weight in query_bag.items():
        if weight <= 0:
            continue
        tid = index.term_ids.get(term)
        if tid is None:
            continue
        vec[tid] = _tf_damp(weight) * math.log(1.0 + index.n_docs / index.df[tid])
    return vec


def search_vector(index: Index, qvec: Mapping[int, float], k: int) -> list[RankedResult]:
    """Cosine ranking of a prepared query vector: top-k by score, ties by
    ascending doc id, zero-score documents excluded."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not qvec:
        return []
    qnorm = math.sqrt(sum(w * w for w in qvec.values()))
    dots: dict[int, float] = {}
    for tid, qw in qvec.items():
        for d, dw in index.postings[tid]:
            dots[d] = dots.get(d, 0.0) + qw * dw
    scored = [
        (dot / (qnorm * index.norms[d]), index.doc_ids[d])
        for d, dot in dots.items()
        if dot > 0.0 and index.norms[d] > 0.0
    ]
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [
        RankedResult(doc_id=doc_id, score=score, rank=r)
        for r, (score, doc_id) in enumerate(scored[:k], start=1)
    ]


def search(index: Index, query_bag: Mapping[str, float], k: int) -> list[RankedResult]:
    return search_vector(index, query_vector(index, query_bag), k)


def _payload(index: Index) -> bytes:
    doc = {
        "version": FORMAT_VERSION,
        "model": index.model,
        "doc_ids": index.doc_ids,
        "terms": index.terms,
        "df": index.df,
        "postings": index.postings,
        "norms": index.norms,
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")


def save_index(index: Index, path) -> None:
    """Write the single-file container: magic, version, payload length,
    JSON payload, SHA-256 checksum."""
    payload = _payload(index)
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(payload)))
        fh.write(payload)
        fh.write(digest)


def load_index(path) -> Index:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 12 or not blob.startswith(MAGIC):
        raise IndexFormatError(f"{path}: not an index file (bad magic)")
    version = struct.unpack_from("<I", blob, 4)[0]
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"{path}: unsupported format version {version} (expected {FORMAT_VERSION})"
        )
    length = struct.unpack_from("<Q", blob, 8)[0]
    start = len(MAGIC) + 12
    payload = blob[start : start + length]
    digest = blob[start + length : start + length + 32]
    if len(payload) != length or len(digest) != 32:
        raise IndexFormatError(f"{path}: truncated index file")
    if hashlib.sha256(payload).digest() != digest:
        raise IndexFormatError(f"{path}: checksum mismatch (corrupt file)")
    doc = json.loads(payload.decode("utf-8"))
    return Index(
        doc_ids=doc["doc_ids"],
        terms=doc["terms"],
        df=doc["df"],
        postings=[[(d, w) for d, w in plist] for plist in doc["postings"]],
        norms=doc["norms"],
        model=doc.get("model", ""),
    )
