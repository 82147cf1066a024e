"""Command-line front end wiring the library into reproducible runs.

Subcommands: build (indexes), corrupt (labeled dataset), correct
(predictions), evaluate (report), sweep (PR curve over thresholds).

Config precedence is flags > SPELLBENCH_* environment variables > built-in
defaults; `--help` shows every default. Exit codes: 0 success, 2 bad
configuration, 3 missing or malformed data, 4 scorer transport failure.

Outputs that downstream steps consume (records, stats, predictions, index
artifacts, CSVs) are byte-deterministic for a fixed seed; timings and other
run diagnostics go to stderr or to the optional summary JSON.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import threading
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

from spellbench.confusion import (
    ConfusionFormatError,
    ConfusionIndex,
    build_confusion_index,
    dump_binary,
    dump_tsv,
    load_binary,
    load_tsv,
)
from spellbench.corrector import (
    ACTION_REPLACED,
    DETECTION_ORACLE,
    DETECTION_SCAN,
    REASON_SCORER_FAILURE,
    STRATEGIES,
    STRATEGY_PROPOSED,
    CorrectorConfig,
    Suggestion,
    correct_record,
    correct_sentence_scan,
    read_predictions,
    write_predictions,
)
from spellbench.errorgen import (
    CorruptionConfig,
    ErrorGenError,
    ErrorRecord,
    build_dataset,
    load_letter_map,
    read_records,
)
from spellbench.evaluation import (
    EvaluationError,
    build_report,
    diagnostics,
    join_predictions,
    report_json,
    threshold_sweep,
    timing_metadata,
    write_diagnostics_csv,
    write_pr_csv,
    zwnj_ablation,
)
from spellbench.lexicon import Lexicon, LexiconError, dump_lexicon, load_lexicon
from spellbench.scorer import (
    ContractError,
    NgramScorer,
    OracleScorer,
    RemoteScorer,
    Scorer,
    TransportError,
)
from spellbench.textnorm import tokenize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_TRANSPORT = 4

SCORER_NGRAM = "ngram"
SCORER_ORACLE = "oracle"
SCORER_REMOTE = "remote"
SCORER_KINDS = (SCORER_NGRAM, SCORER_ORACLE, SCORER_REMOTE)

DEFAULT_THRESHOLDS = "1e-1,1e-3,1e-5,1e-7,1e-9"

ENV_PREFIX = "SPELLBENCH_"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def _env_default(name: str, fallback, cast: Callable = str):
    """Resolve one default: environment variable if set, else the fallback."""
    raw = _env(name)
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError:
        raise CliError(
            EXIT_CONFIG,
            f"environment {ENV_PREFIX}{name}={raw!r} is not a valid {cast.__name__}",
        ) from None


def _parse_thresholds(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise CliError(EXIT_CONFIG, f"bad threshold grid {text!r}") from None
    if not values:
        raise CliError(EXIT_CONFIG, "threshold grid is empty")
    return values


def _load_confusion(path: str) -> ConfusionIndex:
    if path.endswith(".bin"):
        return load_binary(path)
    return load_tsv(path)


def _check_jobs(jobs: int) -> int:
    if jobs < 1:
        raise CliError(EXIT_CONFIG, f"--jobs must be at least 1, got {jobs}")
    return jobs


def _train_ngram(corpus_path: str, alpha: float) -> NgramScorer:
    try:
        with open(corpus_path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CliError(EXIT_DATA, f"cannot read training corpus {corpus_path}: {exc}")
    token_lines = [s.tokens for s in (tokenize(line) for line in lines) if s.tokens]
    if not token_lines:
        raise CliError(EXIT_DATA, f"{corpus_path}: no usable training sentences")
    return NgramScorer.train(token_lines, alpha=alpha)


def _make_scorer_factory(args) -> tuple[str, Callable[[], Scorer]]:
    """Returns (kind, factory). The oracle kind builds per-record scorers in
    the correction loop, so its factory is never called."""
    kind = args.scorer
    if kind == SCORER_NGRAM:
        if not args.train_corpus:
            raise CliError(EXIT_CONFIG, "--scorer ngram requires --train-corpus")
        scorer = _train_ngram(args.train_corpus, args.alpha)
        return kind, lambda: scorer
    if kind == SCORER_REMOTE:
        if not args.remote_url:
            raise CliError(EXIT_CONFIG, "--scorer remote requires --remote-url")
        return kind, lambda: RemoteScorer(
            args.remote_url, timeout=args.timeout, retries=args.retries
        )
    if kind == SCORER_ORACLE:
        return kind, lambda: OracleScorer("")
    raise CliError(EXIT_CONFIG, f"unknown scorer kind {kind!r}")


def _corrector_config(args) -> CorrectorConfig:
    try:
        return CorrectorConfig(
            threshold_k=args.threshold,
            strategy=args.strategy,
            detection_mode=args.detection,
            baseline_v1_topn=args.topn,
        )
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None


# one record's prediction rows; module-level so process pools can run it
def _record_rows(
    record: ErrorRecord,
    lexicon: Lexicon,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
    config: CorrectorConfig,
    scorer_kind: str,
) -> list[tuple[int, int, Suggestion]]:
    if scorer_kind == SCORER_ORACLE:
        scorer = OracleScorer(record.original_word)
    if config.detection_mode == DETECTION_SCAN:
        scanned = correct_sentence_scan(
            record.corrupted_tokens, lexicon, confusion_index, scorer, config
        )
        return [(record.sentence_id, i, s) for i, s in scanned]
    index, suggestion = correct_record(
        record, lexicon, confusion_index, scorer, config
    )
    return [(record.sentence_id, index, suggestion)]


_CORRECT_STATE: dict = {}


def _init_correct_worker(lexicon, confusion_index, scorer, config, scorer_kind):
    _CORRECT_STATE["lexicon"] = lexicon
    _CORRECT_STATE["confusion"] = confusion_index
    _CORRECT_STATE["scorer"] = scorer
    _CORRECT_STATE["config"] = config
    _CORRECT_STATE["scorer_kind"] = scorer_kind


def _correct_chunk(records: Sequence[ErrorRecord]) -> list[tuple[int, int, Suggestion]]:
    st = _CORRECT_STATE
    rows: list[tuple[int, int, Suggestion]] = []
    for record in records:
        rows.extend(
            _record_rows(
                record,
                st["lexicon"],
                st["confusion"],
                st["scorer"],
                st["config"],
                st["scorer_kind"],
            )
        )
    return rows


def _correct_all(
    records: Sequence[ErrorRecord],
    lexicon: Lexicon,
    confusion_index: ConfusionIndex,
    config: CorrectorConfig,
    scorer_kind: str,
    scorer_factory: Callable[[], Scorer],
    jobs: int,
) -> list[tuple[int, int, Suggestion]]:
    """Rows in record order regardless of worker count."""
    if jobs <= 1 or not records:
        scorer = scorer_factory() if scorer_kind != SCORER_ORACLE else None
        rows: list[tuple[int, int, Suggestion]] = []
        for record in records:
            rows.extend(
                _record_rows(
                    record, lexicon, confusion_index, scorer, config, scorer_kind
                )
            )
        return rows
    if scorer_kind == SCORER_REMOTE:
        # IO-bound: threads, one client per thread
        local = threading.local()

        def one(record: ErrorRecord) -> list[tuple[int, int, Suggestion]]:
            scorer = getattr(local, "scorer", None)
            if scorer is None:
                scorer = local.scorer = scorer_factory()
            return _record_rows(
                record, lexicon, confusion_index, scorer, config, scorer_kind
            )

        rows = []
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(one, records):
                rows.extend(chunk)
        return rows
    # CPU-bound: processes, state shipped once per worker
    scorer = scorer_factory() if scorer_kind != SCORER_ORACLE else None
    chunksize = max(1, len(records) // (jobs * 8))
    chunks = [records[i : i + chunksize] for i in range(0, len(records), chunksize)]
    rows = []
    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_init_correct_worker,
        initargs=(lexicon, confusion_index, scorer, config, scorer_kind),
    ) as pool:
        for chunk_rows in pool.map(_correct_chunk, chunks):
            rows.extend(chunk_rows)
    return rows


def cmd_build(args) -> int:
    lexicon = load_lexicon(args.dictionary)
    adj = load_letter_map(args.adjacency)
    hmap = load_letter_map(args.homophones)
    index = build_confusion_index(lexicon, adj, hmap)
    os.makedirs(args.out_dir, exist_ok=True)
    lexicon_path = os.path.join(args.out_dir, "lexicon.tsv")
    tsv_path = os.path.join(args.out_dir, "confusion.tsv")
    bin_path = os.path.join(args.out_dir, "confusion.bin")
    dump_lexicon(lexicon, lexicon_path)
    dump_tsv(index, tsv_path)
    dump_binary(index, bin_path)
    nonempty = sum(1 for sets in index.table.values() if sets)
    print(f"words\t{len(lexicon)}")
    print(f"confusion_words\t{len(index)}")
    print(f"confusion_nonempty\t{nonempty}")
    return EXIT_OK


def cmd_corrupt(args) -> int:
    lexicon = load_lexicon(args.dictionary)
    adj = load_letter_map(args.adjacency)
    hmap = load_letter_map(args.homophones)
    try:
        config = CorruptionConfig(seed=args.seed, repetitions=args.repetitions)
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    started = time.perf_counter()
    stats = build_dataset(
        args.corpus,
        config,
        lexicon,
        adj,
        hmap,
        args.records_out,
        stats_path=args.stats_out,
        jobs=_check_jobs(args.jobs),
    )
    elapsed = time.perf_counter() - started
    for label, count in stats.rows():
        print(f"{label}\t{count}", file=sys.stderr)
    print(f"elapsed_seconds\t{elapsed:.3f}", file=sys.stderr)
    return EXIT_OK


def cmd_correct(args) -> int:
    records = read_records(args.records)
    lexicon = load_lexicon(args.lexicon)
    confusion_index = _load_confusion(args.confusion)
    config = _corrector_config(args)
    scorer_kind, scorer_factory = _make_scorer_factory(args)
    started = time.perf_counter()
    try:
        rows = _correct_all(
            records, lexicon, confusion_index, config, scorer_kind,
            scorer_factory, _check_jobs(args.jobs),
        )
    except IndexError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    elapsed = time.perf_counter() - started
    write_predictions(rows, args.out)
    replaced = sum(1 for _, _, s in rows if s.action == ACTION_REPLACED)
    failures = sum(1 for _, _, s in rows if s.reason == REASON_SCORER_FAILURE)
    summary = {
        "records": len(records),
        "rows": len(rows),
        "replaced": replaced,
        "kept": len(rows) - replaced,
        "scorer_failures": failures,
        "scorer": scorer_kind,
        "scorer_semantics": (
            scorer_factory().semantics if scorer_kind != SCORER_ORACLE
            else OracleScorer("").semantics
        ),
        "config": {
            "records": args.records,
            "lexicon": args.lexicon,
            "confusion": args.confusion,
            "threshold": args.threshold,
            "strategy": args.strategy,
            "detection": args.detection,
            "topn": args.topn,
            "jobs": args.jobs,
        },
        "timing": timing_metadata(elapsed, len(records)),
    }
    if args.summary_out:
        with open(args.summary_out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, ensure_ascii=False, indent=2, sort_keys=True)
            fh.write("\n")
    for key in ("records", "rows", "replaced", "kept", "scorer_failures"):
        print(f"{key}\t{summary[key]}", file=sys.stderr)
    print(f"elapsed_seconds\t{elapsed:.3f}", file=sys.stderr)
    if failures and args.scorer_errors == "fail":
        raise CliError(EXIT_TRANSPORT, f"{failures} scorer failures (run kept)")
    if failures:
        print(f"warning: {failures} scorer failures", file=sys.stderr)
    return EXIT_OK


def _derived_path(path: str, tag: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}.{tag}{ext or '.json'}"


def cmd_evaluate(args) -> int:
    records = read_records(args.records)
    predictions = read_predictions(args.predictions)
    joined = join_predictions(records, predictions)
    metadata = {
        "records": args.records,
        "predictions": args.predictions,
        "zwnj_ablation": bool(args.zwnj_ablation),
    }
    if args.correction_summary:
        try:
            with open(args.correction_summary, encoding="utf-8") as fh:
                metadata["correction"] = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(
                EXIT_DATA, f"bad correction summary {args.correction_summary}: {exc}"
            ) from None
    started = time.perf_counter()
    if args.zwnj_ablation:
        raw, stripped = zwnj_ablation(joined, metadata)
        elapsed = time.perf_counter() - started
        raw.metadata["timing"] = timing_metadata(elapsed, len(joined))
        stripped.metadata["timing"] = raw.metadata["timing"]
        stripped_path = _derived_path(args.report_out, "zwnj-stripped")
        _write_text(args.report_out, report_json(raw) + "\n")
        _write_text(stripped_path, report_json(stripped) + "\n")
        print(f"report\t{args.report_out}", file=sys.stderr)
        print(f"report\t{stripped_path}", file=sys.stderr)
        headline = raw
    else:
        report = build_report(joined, None, {**metadata, "zwnj_mode": "raw"})
        elapsed = time.perf_counter() - started
        report.metadata["timing"] = timing_metadata(elapsed, len(joined))
        _write_text(args.report_out, report_json(report) + "\n")
        print(f"report\t{args.report_out}", file=sys.stderr)
        headline = report
    if args.diagnostics_out:
        rows = diagnostics(
            joined, None, category=args.diag_category, etype=args.diag_etype
        )
        write_diagnostics_csv(rows, args.diagnostics_out)
        print(f"diagnostics\t{args.diagnostics_out}", file=sys.stderr)
    for name in ("accuracy", "precision", "recall", "f1"):
        micro = headline.micro.get(name)
        shown = "n/a" if micro is None else f"{micro:.4f}"
        print(f"micro_{name}\t{shown}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    records = read_records(args.records)
    lexicon = load_lexicon(args.lexicon)
    confusion_index = _load_confusion(args.confusion)
    thresholds = _parse_thresholds(args.thresholds)
    if args.scorer == SCORER_ORACLE:
        raise CliError(EXIT_CONFIG, "sweep needs a context scorer: ngram or remote")
    scorer_kind, scorer_factory = _make_scorer_factory(args)
    scorer = scorer_factory()
    try:
        points = threshold_sweep(
            records, lexicon, confusion_index, scorer,
            CorrectorConfig(strategy=STRATEGY_PROPOSED), thresholds,
        )
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, str(exc)) from None
    write_pr_csv(points, args.out)
    for point in points:
        recall = point.metric_set.recall
        shown = "n/a" if recall is None else f"{recall:.4f}"
        print(f"threshold {point.threshold:g}: recall {shown}", file=sys.stderr)
    return EXIT_OK


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _add_scorer_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--scorer",
        choices=SCORER_KINDS,
        default=_env_default("SCORER", SCORER_NGRAM),
        help="scoring backend (env SPELLBENCH_SCORER)",
    )
    sub.add_argument(
        "--train-corpus",
        default=None,
        help="training sentences for --scorer ngram, one per line",
    )
    sub.add_argument(
        "--alpha", type=float, default=1.0, help="n-gram smoothing constant"
    )
    sub.add_argument(
        "--remote-url",
        default=_env_default("REMOTE_URL", None),
        help="scoring service base URL (env SPELLBENCH_REMOTE_URL)",
    )
    sub.add_argument(
        "--timeout", type=float, default=10.0, help="remote request timeout, seconds"
    )
    sub.add_argument(
        "--retries", type=int, default=3, help="remote retry attempts on transport errors"
    )


def _add_jobs_flag(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--jobs",
        type=int,
        default=_env_default("JOBS", os.cpu_count() or 1, int),
        help="worker count (env SPELLBENCH_JOBS)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spellbench",
        description="Persian misspelling correction experiments",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def sub(name: str, handler, help_text: str) -> argparse.ArgumentParser:
        p = commands.add_parser(
            name,
            help=help_text,
            formatter_class=argparse.ArgumentDefaultsHelpFormatter,
        )
        p.set_defaults(func=handler)
        return p

    build = sub("build", cmd_build, "build lexicon and confusion index artifacts")
    build.add_argument("--dictionary", required=True, help="word or word<TAB>freq lines")
    build.add_argument("--adjacency", required=True, help="keyboard adjacency map")
    build.add_argument("--homophones", required=True, help="homophone letter map")
    build.add_argument("--out-dir", required=True, help="artifact directory")

    corrupt = sub("corrupt", cmd_corrupt, "generate a labeled error dataset")
    corrupt.add_argument("--corpus", required=True, help="raw sentences, one per line")
    corrupt.add_argument("--dictionary", required=True)
    corrupt.add_argument("--adjacency", required=True)
    corrupt.add_argument("--homophones", required=True)
    corrupt.add_argument("--records-out", required=True, help="dataset TSV to write")
    corrupt.add_argument("--stats-out", default=None, help="stats TSV to write")
    corrupt.add_argument(
        "--seed",
        type=int,
        default=_env_default("SEED", 0, int),
        help="corruption seed (env SPELLBENCH_SEED)",
    )
    corrupt.add_argument(
        "--repetitions", type=int, default=1, help="corruption passes over the corpus"
    )
    _add_jobs_flag(corrupt)

    correct = sub("correct", cmd_correct, "run correction over a dataset")
    correct.add_argument("--records", required=True, help="dataset TSV from corrupt")
    correct.add_argument("--lexicon", required=True, help="dictionary file")
    correct.add_argument("--confusion", required=True, help="confusion index (.tsv or .bin)")
    correct.add_argument("--out", required=True, help="predictions TSV to write")
    correct.add_argument(
        "--threshold",
        type=float,
        default=_env_default("THRESHOLD", 1e-5, float),
        help="real-word score threshold K (env SPELLBENCH_THRESHOLD)",
    )
    correct.add_argument(
        "--strategy",
        choices=STRATEGIES,
        default=_env_default("STRATEGY", STRATEGY_PROPOSED),
        help="correction strategy (env SPELLBENCH_STRATEGY)",
    )
    correct.add_argument(
        "--detection",
        choices=(DETECTION_ORACLE, DETECTION_SCAN),
        default=DETECTION_ORACLE,
        help="judge the labeled position only, or scan every token",
    )
    correct.add_argument(
        "--topn", type=int, default=500, help="suggestion list size for baseline_v1"
    )
    correct.add_argument(
        "--scorer-errors",
        choices=("warn", "fail"),
        default="warn",
        help="whether scorer failures only warn or fail the run",
    )
    correct.add_argument(
        "--summary-out", default=None, help="run summary JSON (counts, timings)"
    )
    _add_scorer_flags(correct)
    _add_jobs_flag(correct)

    evaluate = sub("evaluate", cmd_evaluate, "score predictions against gold records")
    evaluate.add_argument("--records", required=True, help="gold dataset TSV")
    evaluate.add_argument("--predictions", required=True, help="predictions TSV")
    evaluate.add_argument("--report-out", required=True, help="report JSON to write")
    evaluate.add_argument(
        "--diagnostics-out", default=None, help="missed-error histogram CSV"
    )
    evaluate.add_argument(
        "--diag-category", default=None, help="restrict diagnostics to one category"
    )
    evaluate.add_argument(
        "--diag-etype", default=None, help="restrict diagnostics to one error type"
    )
    evaluate.add_argument(
        "--zwnj-ablation",
        action="store_true",
        help="also judge with ZWNJ stripped and write a paired report",
    )
    evaluate.add_argument(
        "--correction-summary",
        default=None,
        help="summary JSON from correct, embedded in report metadata",
    )

    sweep = sub("sweep", cmd_sweep, "PR curve over a threshold grid")
    sweep.add_argument("--records", required=True, help="dataset TSV from corrupt")
    sweep.add_argument("--lexicon", required=True)
    sweep.add_argument("--confusion", required=True)
    sweep.add_argument("--out", required=True, help="PR CSV to write")
    sweep.add_argument(
        "--thresholds",
        default=_env_default("THRESHOLDS", DEFAULT_THRESHOLDS),
        help="comma-separated K grid (env SPELLBENCH_THRESHOLDS)",
    )
    _add_scorer_flags(sweep)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"spellbench: {exc}", file=sys.stderr)
        return exc.code
    except (TransportError, ContractError) as exc:
        print(f"spellbench: scorer: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (LexiconError, ErrorGenError, ConfusionFormatError, EvaluationError) as exc:
        print(f"spellbench: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"spellbench: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"spellbench: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
