#!/usr/bin/env python3
"""Run the four search models over the bundled toy dataset.

Writes the dataset, builds one index per model, searches the query batch,
evaluates each run against the judgments, and compares every model pair
with the Fisher randomization test.  All artifacts (indexes, TREC run
files, curve and AP CSVs) land in the output directory.

Usage:
    python scripts/run_toy_experiment.py [--out-dir runs/toy] [--k 20]
        [--n-permutations 100000] [--seed 0]
"""

import argparse
import itertools
import sys
from pathlib import Path

from semsearch import evaluate
from semsearch.annotate import load_corpus, load_default_stopwords
from semsearch.expand import Model
from semsearch.index import save_index
from semsearch.kb import load_knowledge_base
from semsearch.pipeline import index_corpus, load_queries, run_queries
from semsearch.toydata import write_toy_dataset


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="runs/toy", type=Path)
    parser.add_argument("--k", default=20, type=int, help="results per query")
    parser.add_argument("--n-permutations", default=100_000, type=int)
    parser.add_argument("--seed", default=0, type=int)
    args = parser.parse_args(argv)

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    paths = write_toy_dataset(out / "dataset")
    kb = load_knowledge_base(
        paths["entities"], paths["taxonomy"], paths["lexicon"],
        paths["facts"], paths["phrases"],
    )
    docs = load_corpus(paths["corpus"])
    queries = load_queries(paths["queries"])
    qrels = evaluate.load_qrels(paths["qrels"])
    stopwords = load_default_stopwords()

    reports = {}
    for model in Model:
        index = index_corpus(docs, kb, model, stopwords=stopwords)
        save_index(index, out / f"{model.value}.idx")
        results, _ = run_queries(
            index, queries, kb, model, top_k=args.k, stopwords=stopwords
        )
        evaluate.write_run(out / f"{model.value}.run", results, run_tag=model.value)
        rankings = {q: [r.doc_id for r in res] for q, res in results.items()}
        report = evaluate.evaluate_run(rankings, qrels)
        evaluate.write_curve_csv(out / f"{model.value}.curve.csv", report.averaged_curve)
        evaluate.write_ap_csv(
            out / f"{model.value}.ap.csv", report.per_query_ap, report.mean_ap
        )
        reports[model] = report
        print(f"{model.value:10s} MAP {report.mean_ap:.4f}")

    print()
    print("pairwise randomization tests "
          "(map_a map_b diff n_minus n_plus p seed n_permutations):")
    order = sorted(qrels)
    for a, b in itertools.combinations(Model, 2):
        aps_a = [reports[a].per_query_ap[q] for q in order]
        aps_b = [reports[b].per_query_ap[q] for q in order]
        result = evaluate.randomization_test(
            aps_a, aps_b, args.n_permutations, args.seed
        )
        print(f"{a.value:10s} vs {b.value:10s} {evaluate.format_sigtest_line(result)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
