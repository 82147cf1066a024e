"""Judging, confusion counting, metric formulas, aggregation, threshold
sweeps, ZWNJ ablation, and miss diagnostics.

Judging is word-level at the single labeled position (or the probe position
of an unchanged record): a correction counts as TP only when the replacement
equals the gold word exactly. The ZWNJ ablation re-judges the same
predictions with U+200C stripped from both sides before comparison.

Undefined metrics (zero denominators) are carried as None, rendered "n/a"
in reports, and excluded from macro means; each exclusion is listed so a
report never hides a degenerate class.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

from spellbench.corrector import (
    ACTION_REPLACED,
    ACTION_KEPT,
    REASON_SCORER_FAILURE,
    STRATEGY_PROPOSED,
    CorrectorConfig,
    RealwordScoring,
    Suggestion,
    apply_suggestion,
    probe_index,
    score_realword,
)
from spellbench.editdist import levenshtein
from spellbench.errorgen import CATEGORIES, ETYPES, ErrorRecord
from spellbench.lexicon import Lexicon
from spellbench.confusion import ConfusionIndex
from spellbench.scorer import Scorer
from spellbench.textnorm import ZwnjMode, normalize_zwnj

OUTCOME_TP = "tp"
OUTCOME_TN = "tn"
OUTCOME_FP = "fp"
OUTCOME_FN = "fn"
OUTCOMES = (OUTCOME_TP, OUTCOME_TN, OUTCOME_FP, OUTCOME_FN)

METRIC_NAMES = ("accuracy", "precision", "recall", "f1")

ZWNJ_MODE_RAW = "raw"
ZWNJ_MODE_STRIPPED = "stripped"

Transform = Callable[[str], str]


class EvaluationError(Exception):
    """Raised when gold records and predictions cannot be joined."""


def strip_zwnj(word: str) -> str:
    return normalize_zwnj(word, ZwnjMode.STRIP)


def judge(
    record: ErrorRecord, suggestion: Suggestion, transform: Transform | None = None
) -> str:
    """Classify one decision. `transform` maps both sides before equality
    (identity when None); the action itself is never transformed."""
    if record.has_error:
        if suggestion.action == ACTION_REPLACED:
            got, want = suggestion.replacement, record.original_word
            if transform is not None:
                got, want = transform(got), transform(want)
            if got == want:
                return OUTCOME_TP
        return OUTCOME_FN
    return OUTCOME_TN if suggestion.action == ACTION_KEPT else OUTCOME_FP


@dataclass
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0
    label: tuple[str, str] | None = None

    def __post_init__(self) -> None:
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    def add(self, outcome: str) -> None:
        if outcome not in OUTCOMES:
            raise ValueError(f"unknown outcome {outcome!r}")
        setattr(self, outcome, getattr(self, outcome) + 1)

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp,
            self.tn + other.tn,
            self.fp + other.fp,
            self.fn + other.fn,
            self.label if self.label == other.label else None,
        )


@dataclass(frozen=True)
class MetricSet:
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None

    def get(self, name: str) -> float | None:
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {name!r}")
        return getattr(self, name)

    def as_json(self) -> dict[str, float | str]:
        return {
            name: "n/a" if self.get(name) is None else self.get(name)
            for name in METRIC_NAMES
        }


def metrics(counts: ConfusionCounts) -> MetricSet:
    """Exact formula evaluation; zero denominators yield None."""
    total = counts.total
    accuracy = (counts.tp + counts.tn) / total if total else None
    precision = counts.tp / (counts.tp + counts.fp) if counts.tp + counts.fp else None
    recall = counts.tp / (counts.tp + counts.fn) if counts.tp + counts.fn else None
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return MetricSet(accuracy, precision, recall, f1)


def class_label(label: tuple[str, str]) -> str:
    return f"{label[0]}/{label[1]}"


@dataclass(frozen=True)
class Aggregate:
    micro: MetricSet
    macro: MetricSet
    excluded: tuple[tuple[str, str], ...]  # (class label, metric name)


def aggregate(per_class: Mapping[tuple[str, str], ConfusionCounts]) -> Aggregate:
    """Micro = metrics over summed counts; macro = unweighted mean of the
    defined per-class values. Classes are visited in sorted label order."""
    if not per_class:
        raise ValueError("at least one class required")
    items = sorted(per_class.items())
    summed = ConfusionCounts()
    for _, counts in items:
        summed = summed + counts
    micro = metrics(summed)
    per_class_metrics = [(label, metrics(counts)) for label, counts in items]
    macro_values: dict[str, float | None] = {}
    excluded: list[tuple[str, str]] = []
    for name in METRIC_NAMES:
        defined = []
        for label, mset in per_class_metrics:
            value = mset.get(name)
            if value is None:
                excluded.append((class_label(label), name))
            else:
                defined.append(value)
        macro_values[name] = sum(defined) / len(defined) if defined else None
    return Aggregate(micro, MetricSet(**macro_values), tuple(excluded))


def count_by_class(
    joined: Iterable[tuple[ErrorRecord, int, Suggestion]],
    transform: Transform | None = None,
) -> dict[tuple[str, str], ConfusionCounts]:
    out: dict[tuple[str, str], ConfusionCounts] = {}
    for record, _, suggestion in joined:
        label = (record.category, record.etype)
        counts = out.get(label)
        if counts is None:
            counts = out[label] = ConfusionCounts(label=label)
        counts.add(judge(record, suggestion, transform))
    return out


def join_predictions(
    records: Sequence[ErrorRecord],
    predictions: Sequence[tuple[int, int, Suggestion]],
) -> list[tuple[ErrorRecord, int, Suggestion]]:
    """Align gold records with prediction rows by sentence id.

    Every record needs exactly one prediction, every prediction one record,
    and a labeled error must have been judged at its labeled position.
    """
    by_id: dict[int, tuple[int, Suggestion]] = {}
    for sentence_id, token_index, suggestion in predictions:
        if sentence_id in by_id:
            raise EvaluationError(f"duplicate prediction for sentence {sentence_id}")
        by_id[sentence_id] = (token_index, suggestion)
    joined = []
    for record in records:
        row = by_id.pop(record.sentence_id, None)
        if row is None:
            raise EvaluationError(f"no prediction for sentence {record.sentence_id}")
        token_index, suggestion = row
        if not 0 <= token_index < len(record.corrupted_tokens):
            raise EvaluationError(
                f"sentence {record.sentence_id}: token index {token_index} out of range"
            )
        if record.has_error and token_index != record.error_index:
            raise EvaluationError(
                f"sentence {record.sentence_id}: judged index {token_index} "
                f"!= labeled index {record.error_index}"
            )
        if suggestion.original != record.corrupted_tokens[token_index]:
            raise EvaluationError(
                f"sentence {record.sentence_id}: prediction original "
                f"{suggestion.original!r} does not match the sentence"
            )
        joined.append((record, token_index, suggestion))
    if by_id:
        extra = sorted(by_id)[0]
        raise EvaluationError(f"prediction for unknown sentence {extra}")
    return joined


def sentence_exact_match(
    joined: Sequence[tuple[ErrorRecord, int, Suggestion]],
    transform: Transform | None = None,
) -> float | None:
    """Fraction of sentences whose corrected token sequence equals the gold
    sequence. Supplementary: with one judged position per sentence this
    coincides with word-level accuracy, but it is computed on full sentences."""
    if not joined:
        return None
    hits = 0
    for record, index, suggestion in joined:
        got = apply_suggestion(record.corrupted_tokens, index, suggestion)
        want = record.original_tokens()
        if transform is not None:
            got = tuple(transform(t) for t in got)
            want = tuple(transform(t) for t in want)
        hits += got == want
    return hits / len(joined)


@dataclass(frozen=True)
class EvalReport:
    per_class: dict[tuple[str, str], ConfusionCounts]
    micro: MetricSet
    macro: MetricSet
    excluded: tuple[tuple[str, str], ...]
    scorer_failures: int
    exact_match: float | None
    metadata: dict = field(default_factory=dict)

    @property
    def overall(self) -> ConfusionCounts:
        total = ConfusionCounts()
        for counts in self.per_class.values():
            total = total + counts
        return total


def build_report(
    joined: Sequence[tuple[ErrorRecord, int, Suggestion]],
    transform: Transform | None = None,
    metadata: Mapping | None = None,
) -> EvalReport:
    per_class = count_by_class(joined, transform)
    agg = aggregate(per_class) if per_class else None
    if agg is None:
        raise EvaluationError("cannot evaluate an empty run")
    failures = sum(
        1 for _, _, s in joined if s.reason == REASON_SCORER_FAILURE
    )
    return EvalReport(
        per_class=per_class,
        micro=agg.micro,
        macro=agg.macro,
        excluded=agg.excluded,
        scorer_failures=failures,
        exact_match=sentence_exact_match(joined, transform),
        metadata=dict(metadata or {}),
    )


def report_json(report: EvalReport) -> str:
    per_class = {}
    for label in sorted(report.per_class):
        counts = report.per_class[label]
        per_class[class_label(label)] = {
            "counts": {
                "tp": counts.tp,
                "tn": counts.tn,
                "fp": counts.fp,
                "fn": counts.fn,
            },
            "metrics": metrics(counts).as_json(),
        }
    overall = report.overall
    doc = {
        "per_class": per_class,
        "overall_counts": {
            "tp": overall.tp,
            "tn": overall.tn,
            "fp": overall.fp,
            "fn": overall.fn,
        },
        "micro": report.micro.as_json(),
        "macro": report.macro.as_json(),
        "macro_excluded": [
            {"class": label, "metric": name} for label, name in report.excluded
        ],
        "scorer_failures": report.scorer_failures,
        "sentence_exact_match": (
            "n/a" if report.exact_match is None else report.exact_match
        ),
        "metadata": report.metadata,
    }
    return json.dumps(doc, ensure_ascii=False, indent=2, sort_keys=True)


def timing_metadata(elapsed_seconds: float, n_sentences: int) -> dict:
    return {
        "wall_minutes": elapsed_seconds / 60.0,
        "ms_per_sentence": (
            1000.0 * elapsed_seconds / n_sentences if n_sentences else None
        ),
    }


def zwnj_ablation(
    joined: Sequence[tuple[ErrorRecord, int, Suggestion]],
    metadata: Mapping | None = None,
) -> tuple[EvalReport, EvalReport]:
    """The same predictions judged raw and with ZWNJ stripped from both
    sides. Corpora without ZWNJ yield an identical pair."""
    base = dict(metadata or {})
    raw = build_report(joined, None, {**base, "zwnj_mode": ZWNJ_MODE_RAW})
    stripped = build_report(
        joined, strip_zwnj, {**base, "zwnj_mode": ZWNJ_MODE_STRIPPED}
    )
    return raw, stripped


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    counts: ConfusionCounts
    metric_set: MetricSet
    replaced_ids: frozenset[int]


def realword_scorings(
    records: Sequence[ErrorRecord],
    lexicon: Lexicon,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
) -> list[tuple[ErrorRecord, RealwordScoring]]:
    """Score every record whose judged token is in the lexicon, once.

    Out-of-lexicon positions belong to the non-real pipeline, which has no
    threshold, so a sweep never touches them.
    """
    out = []
    for record in records:
        tokens = record.corrupted_tokens
        if record.has_error:
            index = record.error_index
            if not 0 <= index < len(tokens):
                raise EvaluationError(
                    f"record {record.sentence_id}: error index {index} out of range"
                )
        else:
            index = probe_index(tokens, confusion_index)
        if lexicon.contains(tokens[index]):
            out.append(
                (record, score_realword(tokens, index, confusion_index, scorer))
            )
    return out


def rethreshold(
    scorings: Sequence[tuple[ErrorRecord, RealwordScoring]],
    config: CorrectorConfig,
    transform: Transform | None = None,
) -> SweepPoint:
    counts = ConfusionCounts()
    replaced: set[int] = set()
    for record, scoring in scorings:
        suggestion = scoring.decide(config)
        counts.add(judge(record, suggestion, transform))
        if suggestion.action == ACTION_REPLACED:
            replaced.add(record.sentence_id)
    return SweepPoint(
        config.threshold_k, counts, metrics(counts), frozenset(replaced)
    )


def threshold_sweep(
    records: Sequence[ErrorRecord],
    lexicon: Lexicon,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
    config: CorrectorConfig,
    thresholds: Sequence[float],
) -> list[SweepPoint]:
    """One PR point per threshold over the real-word pipeline.

    Candidates are scored once; only the K comparison is redone, through the
    same decision function the online corrector uses.
    """
    if config.strategy != STRATEGY_PROPOSED:
        raise ValueError("threshold sweep applies to the proposed strategy only")
    if not thresholds:
        raise ValueError("at least one threshold required")
    scorings = realword_scorings(records, lexicon, confusion_index, scorer)
    return [
        rethreshold(scorings, replace(config, threshold_k=k)) for k in thresholds
    ]


def write_pr_csv(points: Sequence[SweepPoint], path: str) -> None:
    def cell(value: float | None) -> str:
        return "n/a" if value is None else repr(value)

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["threshold", "precision", "recall", "f1"])
        for point in points:
            writer.writerow(
                [
                    repr(point.threshold),
                    cell(point.metric_set.precision),
                    cell(point.metric_set.recall),
                    cell(point.metric_set.f1),
                ]
            )


DISTANCE_BINS = ("0", "1", "2", "3+")
SCORE_BINS = tuple(f"{i / 10:.1f}-{(i + 1) / 10:.1f}" for i in range(10)) + (
    "missing",
)


def diagnostics(
    joined: Sequence[tuple[ErrorRecord, int, Suggestion]],
    transform: Transform | None = None,
    category: str | None = None,
    etype: str | None = None,
) -> list[tuple[str, str, int]]:
    """Histogram rows (kind, bin, count) over missed errors.

    Distance is between the emitted word (the wrong replacement, or the
    input itself when kept) and the input word; scores bin into deciles,
    with suggestions carrying no score under "missing". All bins are
    emitted, zeros included, so the CSV schema is stable.
    """
    if category is not None and category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")
    if etype is not None and etype not in ETYPES:
        raise ValueError(f"unknown etype {etype!r}")
    distance_counts = dict.fromkeys(DISTANCE_BINS, 0)
    score_counts = dict.fromkeys(SCORE_BINS, 0)
    for record, _, suggestion in joined:
        if category is not None and record.category != category:
            continue
        if etype is not None and record.etype != etype:
            continue
        if judge(record, suggestion, transform) != OUTCOME_FN:
            continue
        distance = levenshtein(suggestion.replacement, suggestion.original)
        distance_counts[str(distance) if distance <= 2 else "3+"] += 1
        if suggestion.score is None:
            score_counts["missing"] += 1
        else:
            decile = min(int(suggestion.score * 10), 9)
            score_counts[SCORE_BINS[decile]] += 1
    rows = [("distance", b, distance_counts[b]) for b in DISTANCE_BINS]
    rows += [("score", b, score_counts[b]) for b in SCORE_BINS]
    return rows


def write_diagnostics_csv(rows: Sequence[tuple[str, str, int]], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "bin", "count"])
        for kind, bin_name, count in rows:
            writer.writerow([kind, bin_name, str(count)])
