"""Command-line front end: ``index``, ``search``, ``eval``, ``sigtest``.

Logs go to standard error; data goes to files or standard output only.
Exit codes: 0 success, 1 empty or degenerate results, 2 input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import evaluate
from .annotate import load_corpus, load_default_stopwords, load_stopwords
from .expand import Model, QueryReport
from .index import IndexError_, load_index, save_index
from .kb import KBError, load_knowledge_base
from .pipeline import index_corpus, load_queries, run_queries

log = logging.getLogger("semsearch")

EXIT_OK = 0
EXIT_EMPTY = 1
EXIT_INPUT = 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _read_config_file(path) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{line_no}: expected key=value")
                key, value = line.split("=", 1)
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    return values


_KB_KEYS = ("entities", "taxonomy", "lexicon", "facts", "phrases")


def _apply_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the optional config file (flags win)."""
    if not getattr(args, "config", None):
        return
    values = _read_config_file(args.config)
    for key, value in values.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            continue
        if getattr(args, attr) in (None, ""):
            setattr(args, attr, value)


def _load_kb(args: argparse.Namespace):
    for key in _KB_KEYS:
        path = getattr(args, key, None)
        if not path:
            raise CliError(f"missing --{key}")
        if not Path(path).is_file():
            raise CliError(f"knowledge-base file not found: {path}")
    try:
        return load_knowledge_base(
            args.entities, args.taxonomy, args.lexicon, args.facts, args.phrases
        )
    except KBError as exc:
        raise CliError(str(exc)) from exc


def _stopwords(args: argparse.Namespace):
    if getattr(args, "stopwords", None):
        return load_stopwords(args.stopwords)
    return load_default_stopwords()


def _add_kb_flags(parser: argparse.ArgumentParser) -> None:
    for key in _KB_KEYS:
        parser.add_argument(f"--{key}", help=f"{key}.tsv knowledge-base file")
    parser.add_argument("--stopwords", help="stopword list (one word per line)")
    parser.add_argument("--config", help="key=value config file; flags override")


def cmd_index(args: argparse.Namespace) -> int:
    _apply_config(args)
    kb = _load_kb(args)
    if not args.corpus or not Path(args.corpus).is_file():
        raise CliError(f"corpus file not found: {args.corpus}")
    try:
        docs = load_corpus(args.corpus)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    if not docs:
        raise CliError(f"corpus file is empty: {args.corpus}")
    model = Model(args.model)
    index = index_corpus(docs, kb, model, args.window, _stopwords(args))
    save_index(index, args.out)
    counts = {"ne": 0, "wn": 0, "kw": 0}
    for term in index.terms:
        counts[term.split(":", 1)[0]] += 1
    log.info(
        "indexed %d docs, %d terms (%d NE, %d WN, %d keyword) -> %s",
        index.n_docs, len(index.terms), counts["ne"], counts["wn"], counts["kw"],
        args.out,
    )
    return EXIT_OK


def _format_explain(query_id: str, text: str, report: QueryReport) -> str:
    lines = [f"query {query_id}: {text}"]
    if report.interrogative is not None:
        lines.append(f"  interrogative -> {report.interrogative.encode()}")
    for ann in report.ne_annotations:
        lines.append(
            f"  entity [{ann.token_span[0]},{ann.token_span[1]}] "
            f"{ann.matched_name!r} -> {ann.entity_id} ({ann.class_id})"
        )
    for cm in report.class_mentions:
        lines.append(
            f"  class mention [{cm.token_span[0]},{cm.token_span[1]}] -> {cm.class_id}"
        )
    for ann in report.wn_annotations:
        lines.append(
            f"  sense [{ann.token_index}] {ann.lemma!r} -> {ann.sense_id} "
            f"(overlap {ann.overlap_score})"
        )
    for triple in report.chosen_triples:
        lines.append(f"  term {triple.encode()}")
    for kw in report.keywords:
        lines.append(f"  keyword kw:{kw}")
    if report.relation.relation_id is not None:
        phrase = " ".join(report.sa.relation_phrase)
        lines.append(f"  relation {report.relation.relation_id} ({phrase!r})")
        for add in report.sa.additions:
            lines.append(
                f"  activated {add.added_concept} from {add.source_concept} "
                f"weight {add.weight:g}"
            )
    elif report.relation.multi_relation:
        lines.append("  relation: multiple phrases found; expansion skipped")
    return "\n".join(lines) + "\n"


def cmd_search(args: argparse.Namespace) -> int:
    _apply_config(args)
    kb = _load_kb(args)
    try:
        index = load_index(args.index)
    except (OSError, IndexError_) as exc:
        raise CliError(str(exc)) from exc
    model = Model(args.model) if args.model else Model(index.model)
    if index.model and model.value != index.model:
        raise CliError(
            f"index was built with model {index.model!r}, requested {model.value!r}"
        )
    try:
        queries = load_queries(args.queries)
    except (OSError, ValueError) as exc:
        raise CliError(str(exc)) from exc
    results, reports = run_queries(
        index, queries, kb, model, top_k=args.k,
        sa=None if args.sa is None else args.sa,
        stopwords=_stopwords(args),
    )
    evaluate.write_run(args.out, results, run_tag=model.value)
    if args.explain:
        explain_path = f"{args.out}.explain.txt"
        with open(explain_path, "w", encoding="utf-8") as fh:
            for query_id in sorted(queries):
                fh.write(_format_explain(query_id, queries[query_id], reports[query_id]))
                fh.write("\n")
        log.info("explain report -> %s", explain_path)
    if all(not res for res in results.values()):
        log.warning("no query returned any result")
        return EXIT_EMPTY
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        qrels = evaluate.load_qrels(args.qrels)
        run = evaluate.load_run(args.run)
    except (OSError, evaluate.EvalFileError) as exc:
        raise CliError(str(exc)) from exc
    if not qrels:
        raise CliError("qrels contain no evaluable queries")
    for query_id in sorted(set(run) - set(qrels)):
        log.warning("query %s in run but not in qrels; skipped", query_id)
    report = evaluate.evaluate_run(run, qrels)
    evaluate.write_curve_csv(f"{args.out_prefix}.curve.csv", report.averaged_curve)
    evaluate.write_ap_csv(f"{args.out_prefix}.ap.csv", report.per_query_ap, report.mean_ap)
    print(f"MAP {report.mean_ap:.4f}")
    return EXIT_OK


def cmd_sigtest(args: argparse.Namespace) -> int:
    try:
        aps_a = evaluate.load_ap_csv(args.ap_csv_a)
        aps_b = evaluate.load_ap_csv(args.ap_csv_b)
    except (OSError, evaluate.EvalFileError) as exc:
        raise CliError(str(exc)) from exc
    if set(aps_a) != set(aps_b):
        raise CliError("AP files list different query ids")
    order = sorted(aps_a)
    a = [aps_a[q] for q in order]
    b = [aps_b[q] for q in order]
    try:
        if args.exact:
            result = evaluate.exhaustive_randomization(a, b)
        else:
            result = evaluate.randomization_test(a, b, args.n, args.seed)
    except ValueError as exc:
        raise CliError(str(exc)) from exc
    print(evaluate.format_sigtest_line(result))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semsearch",
        description="Generalized vector-space semantic search and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and persist a search index")
    _add_kb_flags(p)
    p.add_argument("--corpus", help="corpus file (doc_id<TAB>text per line)")
    p.add_argument("--out", required=True, help="output index file")
    p.add_argument(
        "--model", default="semantic", choices=[m.value for m in Model],
    )
    p.add_argument("--window", type=int, default=10, help="WSD context window")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="run a query batch against an index")
    _add_kb_flags(p)
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True, help="query_id<TAB>text per line")
    p.add_argument("--out", required=True, help="output run file (TREC format)")
    p.add_argument("--k", type=int, default=10, help="results per query")
    p.add_argument("--model", choices=[m.value for m in Model])
    p.add_argument("--explain", action="store_true", help="write per-query trace")
    sa_group = p.add_mutually_exclusive_group()
    sa_group.add_argument("--sa", dest="sa", action="store_true", default=None)
    sa_group.add_argument("--no-sa", dest="sa", action="store_false")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("eval", help="score a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sigtest", help="Fisher randomization test on two AP files")
    p.add_argument("ap_csv_a")
    p.add_argument("ap_csv_b")
    p.add_argument("--n", type=int, default=100_000, help="number of permutations")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--exact", action="store_true", help="exhaustive enumeration")
    p.set_defaults(func=cmd_sigtest)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s"
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        log.error("%s", exc)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
