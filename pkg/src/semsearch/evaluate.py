"""Retrieval evaluation: average precision, MAP, eleven-level interpolated
precision-recall and F-recall curves, and the Fisher randomization
significance test with N-/N+ accounting.

Relevance is binary (graded judgments collapse at load: rel > 0 means
relevant).  All metrics are pure per query; the randomization sampler is
driven by a single seeded generator so results are reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

log = logging.getLogger(__name__)

RECALL_LEVELS = tuple(i / 10 for i in range(11))


@dataclass(frozen=True)
class CurvePoint:
    recall_level: float
    precision: float
    f: float


@dataclass(frozen=True)
class SigTestResult:
    map_a: float
    map_b: float
    diff: float
    n_minus: int
    n_plus: int
    p_two_sided: float
    n_permutations: int
    seed: Optional[int]


@dataclass(frozen=True)
class EvalReport:
    per_query_ap: dict[str, float]
    mean_ap: float
    averaged_curve: tuple[CurvePoint, ...]


def average_precision(ranking: Sequence[str], relevant_set: set[str]) -> float:
    """Mean of precision values at the ranks where relevant documents are
    retrieved; unretrieved relevant documents contribute zero."""
    if not relevant_set:
        raise ValueError("query has no relevant documents")
    hits = 0
    total = 0.0
    for rank, doc_id in enumerate(ranking, start=1):
        if doc_id in relevant_set:
            hits += 1
            total += hits / rank
    return total / len(relevant_set)


def mean_average_precision(
    run: Mapping[str, Sequence[str]], qrels: Mapping[str, set[str]]
) -> float:
    """Unweighted mean AP over the queries present in the qrels; a query
    missing from the run counts as an empty ranking."""
    if not qrels:
        raise ValueError("no evaluable queries")
    aps = [average_precision(run.get(q, []), rel) for q, rel in sorted(qrels.items())]
    return sum(aps) / len(aps)


def interpolated_curve(ranking: Sequence[str], relevant_set: set[str]) -> list[float]:
    """Interpolated precision at the eleven standard recall levels:
    P(r) = max precision at any achieved recall >= r."""
    if not relevant_set:
        raise ValueError("query has no relevant documents")
    n_rel = len(relevant_set)
    points: list[tuple[float, float]] = []  # (recall, precision) at each hit
    hits = 0
    for rank, doc_id in enumerate(ranking, start=1):
        if doc_id in relevant_set:
            hits += 1
            points.append((hits / n_rel, hits / rank))
    curve = []
    for level in RECALL_LEVELS:
        candidates = [p for r, p in points if r >= level - 1e-12]
        curve.append(max(candidates) if candidates else 0.0)
    return curve


def f_from_curve(curve: Sequence[float]) -> list[float]:
    """F at each recall level r: harmonic mean of interpolated precision
    and r, with F = 0 when both vanish (so F is always 0 at recall 0)."""
    out = []
    for level, p in zip(RECALL_LEVELS, curve):
        out.append(2.0 * p * level / (p + level) if p + level > 0 else 0.0)
    return out


def query_curve(ranking: Sequence[str], relevant_set: set[str]) -> list[CurvePoint]:
    precisions = interpolated_curve(ranking, relevant_set)
    fs = f_from_curve(precisions)
    return [
        CurvePoint(level, p, f) for level, p, f in zip(RECALL_LEVELS, precisions, fs)
    ]


def average_curves(per_query_curves: Sequence[Sequence[CurvePoint]]) -> list[CurvePoint]:
    """Arithmetic mean of precision and of F independently at each level."""
    if not per_query_curves:
        raise ValueError("no curves to average")
    n = len(per_query_curves)
    out = []
    for i, level in enumerate(RECALL_LEVELS):
        p = sum(c[i].precision for c in per_query_curves) / n
        f = sum(c[i].f for c in per_query_curves) / n
        out.append(CurvePoint(level, p, f))
    return out


def evaluate_run(
    run: Mapping[str, Sequence[str]], qrels: Mapping[str, set[str]]
) -> EvalReport:
    per_query_ap = {
        q: average_precision(run.get(q, []), rel) for q, rel in sorted(qrels.items())
    }
    curves = [query_curve(run.get(q, []), rel) for q, rel in sorted(qrels.items())]
    mean_ap = sum(per_query_ap.values()) / len(per_query_ap)
    return EvalReport(per_query_ap, mean_ap, tuple(average_curves(curves)))


def _extremity_counts(d_star: np.ndarray, d: float) -> tuple[int, int]:
    # Non-strict comparisons; for d < 0 the same |d| thresholds realize the
    # mirrored counting, so swapping the systems exchanges N- and N+.
    a = abs(d)
    n_plus = int(np.count_nonzero(d_star >= a))
    n_minus = int(np.count_nonzero(d_star <= -a))
    return n_minus, n_plus


def randomization_test(
    aps_a: Sequence[float],
    aps_b: Sequence[float],
    n_permutations: int = 100_000,
    seed: int = 0,
) -> SigTestResult:
    """Fisher randomization (permutation) test on paired per-query APs.

    Each sample independently swaps each query's pair with probability 1/2
    (sampling with replacement from the 2^n permutation space); the
    two-sided p-value is (N- + N+) / n_permutations, capped at 1.
    """
    a = np.asarray(aps_a, dtype=float)
    b = np.asarray(aps_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("AP lists differ in length")
    if a.size < 2:
        raise ValueError("need at least 2 paired queries")
    if n_permutations < 1:
        raise ValueError("n_permutations must be >= 1")
    diffs = a - b
    d = float(diffs.mean())
    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(n_permutations, diffs.size)) * 2 - 1
    d_star = signs @ diffs / diffs.size
    n_minus, n_plus = _extremity_counts(d_star, d)
    p = min(1.0, (n_minus + n_plus) / n_permutations)
    return SigTestResult(
        map_a=float(a.mean()),
        map_b=float(b.mean()),
        diff=d,
        n_minus=n_minus,
        n_plus=n_plus,
        p_two_sided=p,
        n_permutations=n_permutations,
        seed=seed,
    )


def exhaustive_randomization(
    aps_a: Sequence[float], aps_b: Sequence[float]
) -> SigTestResult:
    """Exact version over all 2^n sign assignments (n <= 20); serves as the
    oracle for the Monte Carlo sampler."""
    a = np.asarray(aps_a, dtype=float)
    b = np.asarray(aps_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("AP lists differ in length")
    n = a.size
    if n > 20:
        raise ValueError("exhaustive enumeration limited to 20 queries")
    if n < 1:
        raise ValueError("need at least 1 paired query")
    diffs = a - b
    d = float(diffs.mean())
    codes = np.arange(2**n, dtype=np.int64)
    signs = ((codes[:, None] >> np.arange(n)) & 1) * 2 - 1
    d_star = signs @ diffs / n
    n_minus, n_plus = _extremity_counts(d_star, d)
    p = min(1.0, (n_minus + n_plus) / 2**n)
    return SigTestResult(
        map_a=float(a.mean()),
        map_b=float(b.mean()),
        diff=d,
        n_minus=n_minus,
        n_plus=n_plus,
        p_two_sided=p,
        n_permutations=2**n,
        seed=None,
    )


# -- file formats ---------------------------------------------------------


class EvalFileError(Exception):
    def __init__(self, path, line_no: int, message: str):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


def load_qrels(path) -> dict[str, set[str]]:
    """Read 'query_id 0 doc_id relevance' judgments; rel > 0 is relevant.
    Queries without any relevant document are excluded with a warning."""
    relevant: dict[str, set[str]] = {}
    seen_queries: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise EvalFileError(path, line_no, "expected 4 whitespace-separated fields")
            query_id, _, doc_id, rel = parts
            try:
                rel_value = float(rel)
            except ValueError:
                raise EvalFileError(path, line_no, f"bad relevance value {rel!r}") from None
            seen_queries.add(query_id)
            if rel_value > 0:
                relevant.setdefault(query_id, set()).add(doc_id)
    for q in sorted(seen_queries - set(relevant)):
        log.warning("query %s has no relevant documents; excluded", q)
    return relevant


def load_run(path) -> dict[str, list[str]]:
    """Read a TREC-format run: 'query_id Q0 doc_id rank score run_tag'."""
    run: dict[str, list[str]] = {}
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 6:
                raise EvalFileError(path, line_no, "expected 6 whitespace-separated fields")
            query_id, _, doc_id, rank, score, _ = parts
            try:
                int(rank), float(score)
            except ValueError:
                raise EvalFileError(path, line_no, "bad rank or score") from None
            if (query_id, doc_id) in seen:
                raise EvalFileError(
                    path, line_no, f"doc {doc_id!r} repeated for query {query_id!r}"
                )
            seen.add((query_id, doc_id))
            run.setdefault(query_id, []).append(doc_id)
    return run


def write_run(path, results: Mapping[str, Sequence], run_tag: str) -> None:
    """Write ranked results ({query_id: [RankedResult, ...]}) in TREC format,
    ordered by query id then rank."""
    with open(path, "w", encoding="utf-8") as fh:
        for query_id in sorted(results):
            for res in results[query_id]:
                fh.write(
                    f"{query_id} Q0 {res.doc_id} {res.rank} {res.score:.6f} {run_tag}\n"
                )


def write_curve_csv(path, curve: Sequence[CurvePoint]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("recall_level,precision,f\n")
        for point in curve:
            fh.write(f"{point.recall_level:.1f},{point.precision:.6f},{point.f:.6f}\n")


def write_ap_csv(path, per_query_ap: Mapping[str, float], mean_ap: float) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("query_id,ap\n")
        for query_id in sorted(per_query_ap):
            fh.write(f"{query_id},{per_query_ap[query_id]:.6f}\n")
        fh.write(f"MAP,{mean_ap:.6f}\n")


def load_ap_csv(path) -> dict[str, float]:
    aps: dict[str, float] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line == "query_id,ap":
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise EvalFileError(path, line_no, "expected 'query_id,ap'")
            if parts[0] == "MAP":
                continue
            try:
                aps[parts[0]] = float(parts[1])
            except ValueError:
                raise EvalFileError(path, line_no, f"bad AP value {parts[1]!r}") from None
    return aps


def format_sigtest_line(result: SigTestResult) -> str:
    seed = result.seed if result.seed is not None else "-"
    return (
        f"{result.map_a:.6f} {result.map_b:.6f} {result.diff:.6f} "
        f"{result.n_minus} {result.n_plus} {result.p_two_sided:.6f} "
        f"{seed} {result.n_permutations}"
    )
