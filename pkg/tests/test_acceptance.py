"""End-to-end correctness gates, one test per guarantee.

Every test checks one externally meaningful property of the toolkit against
an oracle implemented inline (reference DP, brute-force set construction,
hand-computed fractions), so each line of the verbose pytest output is a
direct pass/fail verdict for that guarantee. Time-bounded properties assert
their own wall-clock budget.
"""

from __future__ import annotations

import hashlib
import time
from collections import Counter, defaultdict

import numpy as np
import pytest

from spellbench.cli import EXIT_OK, main
from spellbench.confusion import build_confusion_index
from spellbench.corrector import (
    ACTION_KEPT,
    ACTION_REPLACED,
    REASON_BELOW_THRESHOLD,
    REASON_OK,
    STRATEGY_BASELINE_V1,
    STRATEGY_BASELINE_V2,
    STRATEGY_PROPOSED,
    CorrectorConfig,
    Suggestion,
    correct_record,
)
from spellbench.editdist import levenshtein
from spellbench.errorgen import (
    CorruptionConfig,
    ErrorRecord,
    LetterMap,
    inject_error,
    record_rng,
)
from spellbench.evaluation import (
    ConfusionCounts,
    aggregate,
    build_report,
    metrics,
    threshold_sweep,
    zwnj_ablation,
)
from spellbench.lexicon import Lexicon
from spellbench.scorer import NgramScorer, OracleScorer
from spellbench.textnorm import prune_line

PERSIAN = "ابپتثجچحخدذرزسشصضطظعغفقکگلمنوهی"
SWEEP_GRID = (1e-1, 1e-3, 1e-5, 1e-7, 1e-9)


def dp_distance(a: str, b: str) -> int:
    """Reference Wagner-Fischer, written independently of the library."""
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def substitution_position(a: str, b: str) -> int | None:
    """Index of the single differing letter, or None."""
    if len(a) != len(b):
        return None
    diffs = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
    return diffs[0] if len(diffs) == 1 else None


def is_adjacent_swap(a: str, b: str) -> bool:
    if len(a) != len(b):
        return False
    diffs = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
    return (
        len(diffs) == 2
        and diffs[1] == diffs[0] + 1
        and a[diffs[0]] == b[diffs[1]]
        and a[diffs[1]] == b[diffs[0]]
    )


def random_words(rng: np.random.Generator, alphabet: str, count: int) -> list[str]:
    words: set[str] = set()
    while len(words) < count:
        length = int(rng.integers(3, 9))
        letters = rng.integers(0, len(alphabet), size=length)
        words.add("".join(alphabet[i] for i in letters))
    return sorted(words)


def generate_records(lang, config: CorruptionConfig, total: int) -> list[ErrorRecord]:
    sentences = [prune_line(line, lang.lexicon).sentence for line in lang.corpus_lines]
    assert total % len(sentences) == 0
    repetitions = total // len(sentences)
    cache: dict = {}
    records = []
    for rep in range(repetitions):
        for line_index, sentence in enumerate(sentences):
            rng = record_rng(config.seed, rep, line_index)
            records.append(
                inject_error(
                    sentence,
                    config,
                    lang.lexicon,
                    lang.adj,
                    lang.hmap,
                    rng,
                    sentence_id=rep * len(sentences) + line_index,
                    cache=cache,
                )
            )
    return records


@pytest.fixture(scope="module")
def confusion_index(lang):
    return build_confusion_index(lang.lexicon, lang.adj, lang.hmap)


@pytest.fixture(scope="module")
def ngram(lang):
    return NgramScorer.train(
        [prune_line(line, lang.lexicon).sentence.tokens for line in lang.corpus_lines]
    )


@pytest.fixture(scope="module")
def dataset_10k(lang):
    return generate_records(lang, CorruptionConfig(seed=777), 10_000)


def test_levenshtein_matches_reference_dp_on_all_short_pairs():
    started = time.perf_counter()
    strings = [""]
    layer = [""]
    for _ in range(5):
        layer = [s + ch for s in layer for ch in "ابج"]
        strings.extend(layer)
    assert len(strings) == 364
    for a in strings:
        for b in strings:
            assert levenshtein(a, b) == dp_distance(a, b)
    assert levenshtein("خوان", "خامه") == 3
    assert time.perf_counter() - started < 10.0


def test_candidate_sets_match_brute_force():
    started = time.perf_counter()
    rng = np.random.default_rng(90125)
    alphabet = PERSIAN[:16]
    words = random_words(rng, alphabet, 10_000)
    lexicon = Lexicon.from_words(words)

    def brute_distance1(q: str) -> set[str]:
        out = set()
        for i in range(len(q)):
            deleted = q[:i] + q[i + 1 :]
            if deleted in lexicon.words:
                out.add(deleted)
        for i in range(len(q) + 1):
            for ch in alphabet:
                inserted = q[:i] + ch + q[i:]
                if inserted in lexicon.words:
                    out.add(inserted)
                if i < len(q):
                    substituted = q[:i] + ch + q[i + 1 :]
                    if substituted != q and substituted in lexicon.words:
                        out.add(substituted)
        return out

    def brute_swaps(q: str) -> set[str]:
        variants = {q[:i] + q[i + 1] + q[i] + q[i + 2 :] for i in range(len(q) - 1)}
        return {v for v in variants if v != q and v in lexicon.words}

    members = [words[i] for i in rng.integers(0, len(words), size=500)]
    strangers = random_words(rng, alphabet, 500)
    queries = members + strangers
    assert len(queries) == 1_000
    for q in queries:
        assert lexicon.candidates_distance1(q) == brute_distance1(q)
        assert lexicon.candidates_adjacent_swap(q) == brute_swaps(q)
    # the single-edit enumeration itself agrees with a definitional DP scan
    for q in queries[:10] + strangers[:10]:
        scan = {
            w
            for w in words
            if abs(len(w) - len(q)) <= 1 and dp_distance(w, q) == 1
        }
        assert scan == brute_distance1(q)
    assert time.perf_counter() - started < 60.0


def test_confusion_index_matches_pairwise_scan_and_is_symmetric():
    started = time.perf_counter()
    rng = np.random.default_rng(5150)
    alphabet = PERSIAN[:16]
    adj = LetterMap({
        alphabet[0]: (alphabet[1],), alphabet[1]: (alphabet[0],),
        alphabet[2]: (alphabet[3],), alphabet[3]: (alphabet[2],),
        alphabet[4]: (alphabet[5],), alphabet[5]: (alphabet[4],),
    })
    hmap = LetterMap({
        alphabet[6]: (alphabet[7],), alphabet[7]: (alphabet[6],),
        alphabet[8]: (alphabet[9],), alphabet[9]: (alphabet[8],),
    })
    base = random_words(rng, alphabet, 4_600)
    # plant relatives so the comparison is not an empty-vs-empty triviality
    planted: set[str] = set(base)
    for word in base[:150]:
        planted.add(word[1] + word[0] + word[2:])
        for table in (adj, hmap):
            for i, letter in enumerate(word):
                partners = table.of(letter)
                if partners:
                    planted.add(word[:i] + partners[0] + word[i + 1 :])
                    break
    while len(planted) < 5_000:
        planted.update(random_words(rng, alphabet, 5_000 - len(planted)))
    words = sorted(planted)[:5_000]
    assert len(words) == 5_000
    lexicon = Lexicon.from_words(words)

    def related(a: str, b: str) -> bool:
        pos = substitution_position(a, b)
        if pos is not None:
            return b[pos] in adj.of(a[pos]) or b[pos] in hmap.of(a[pos])
        return is_adjacent_swap(a, b)

    expected: dict[str, set[str]] = {w: set() for w in words}
    by_length: dict[int, list[str]] = defaultdict(list)
    for w in words:
        by_length[len(w)].append(w)
    for bucket in by_length.values():
        for i, a in enumerate(bucket):
            for b in bucket[i + 1 :]:
                if related(a, b):
                    expected[a].add(b)
                    expected[b].add(a)

    index = build_confusion_index(lexicon, adj, hmap)
    assert set(index.table) == set(words)
    for w in words:
        assert set(index.table[w]) == expected[w]
    assert sum(len(s) for s in expected.values()) > 100
    for w, members in index.table.items():
        for v in members:
            assert w in index.table[v]
    assert time.perf_counter() - started < 120.0


def test_generator_invariants_hold_on_every_record(lang):
    config = CorruptionConfig(seed=424242)
    records = generate_records(lang, config, 100_000)
    counts: Counter = Counter()
    for r in records:
        counts[(r.category, r.etype)] += 1
        if r.category == "none":
            assert r.error_index == -1
            assert r.original_word == "" and r.corrupted_word == ""
            assert r.etype == "none"
            continue
        assert 0 <= r.error_index < len(r.corrupted_tokens)
        assert r.corrupted_tokens[r.error_index] == r.corrupted_word
        assert r.corrupted_word != r.original_word
        assert lang.lexicon.contains(r.original_word)
        assert lang.lexicon.contains(r.corrupted_word) == (r.category == "real")
        if r.etype == "keyboard":
            pos = substitution_position(r.original_word, r.corrupted_word)
            assert pos is not None
            assert r.corrupted_word[pos] in lang.adj.of(r.original_word[pos])
        elif r.etype == "substitution":
            assert is_adjacent_swap(r.original_word, r.corrupted_word)
        else:
            assert r.etype == "homophone"
            pos = substitution_position(r.original_word, r.corrupted_word)
            assert pos is not None
            assert r.corrupted_word[pos] in lang.hmap.of(r.original_word[pos])

    total = len(records)
    assert total == 100_000
    p_err = 1.0 - config.p_unchanged
    p_rest = p_err * (1.0 - config.p_homophone_real)
    expected = {
        ("none", "none"): config.p_unchanged,
        ("real", "homophone"): p_err * config.p_homophone_real,
        ("real", "keyboard"): p_rest * config.p_real_branch * config.real_split[0],
        ("real", "substitution"): p_rest * config.p_real_branch * config.real_split[1],
        ("nonreal", "keyboard"): p_rest * (1 - config.p_real_branch) * config.nonreal_split[0],
        ("nonreal", "substitution"): p_rest * (1 - config.p_real_branch) * config.nonreal_split[1],
        ("nonreal", "homophone"): p_rest * (1 - config.p_real_branch) * config.nonreal_split[2],
    }
    for cell, probability in expected.items():
        assert abs(counts[cell] / total - probability) <= 0.02, cell
    assert abs(counts[("none", "none")] / total - 0.5) <= 0.01


def test_oracle_scorer_reaches_full_precision_and_recall(
    lang, confusion_index, dataset_10k
):
    started = time.perf_counter()
    config = CorrectorConfig()
    joined = []
    for record in dataset_10k:
        scorer = OracleScorer(record.original_word)
        index, suggestion = correct_record(
            record, lang.lexicon, confusion_index, scorer, config
        )
        joined.append((record, index, suggestion))
    report = build_report(joined)
    n_errors = sum(1 for r in dataset_10k if r.has_error)
    assert report.overall.tp == n_errors
    assert report.overall.fn == 0
    assert report.overall.fp == 0
    assert report.micro.get("precision") == 1.0
    assert report.micro.get("recall") == 1.0
    assert time.perf_counter() - started < 120.0


def test_metrics_match_hand_computed_values():
    # (tp, tn, fp, fn) -> (accuracy, precision, recall, f1), exact fractions
    cases = [
        ((8, 90, 1, 1), (98 / 100, 8 / 9, 8 / 9, 8 / 9)),
        ((0, 10, 0, 0), (1.0, None, None, None)),
        ((1, 0, 1, 1), (1 / 3, 1 / 2, 1 / 2, 1 / 2)),
        ((0, 0, 1, 1), (0.0, 0.0, 0.0, None)),
        ((5, 5, 5, 5), (1 / 2, 1 / 2, 1 / 2, 1 / 2)),
        ((3, 0, 1, 0), (3 / 4, 3 / 4, 1.0, 6 / 7)),
        ((2, 2, 0, 2), (4 / 6, 1.0, 1 / 2, 2 / 3)),
        ((0, 0, 0, 0), (None, None, None, None)),
        ((7, 1, 2, 0), (8 / 10, 7 / 9, 1.0, 2 * (7 / 9) / ((7 / 9) + 1.0))),
        ((1, 1, 1, 3), (2 / 6, 1 / 2, 1 / 4, 1 / 3)),
        ((0, 5, 3, 0), (5 / 8, 0.0, None, None)),
    ]
    assert len(cases) >= 10
    for (tp, tn, fp, fn), (accuracy, precision, recall, f1) in cases:
        got = metrics(ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn))
        assert got.accuracy == accuracy
        assert got.precision == precision
        assert got.recall == recall
        assert got.f1 == f1

    # two classes: micro precision pools counts, macro averages the ratios
    per_class = {
        ("real", "keyboard"): ConfusionCounts(tp=9, fp=1),
        ("real", "homophone"): ConfusionCounts(tp=1, fp=1),
    }
    agg = aggregate(per_class)
    assert agg.micro.precision == 10 / 12
    assert agg.macro.precision == 0.7


def test_threshold_replacements_nest_and_recall_never_drops(
    lang, confusion_index, ngram, dataset_10k
):
    records = dataset_10k[:1_000]
    points = threshold_sweep(
        records,
        lang.lexicon,
        confusion_index,
        ngram,
        CorrectorConfig(strategy=STRATEGY_PROPOSED),
        SWEEP_GRID,
    )
    assert [p.threshold for p in points] == list(SWEEP_GRID)
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            assert points[i].replaced_ids <= points[j].replaced_ids
    recalls = [p.metric_set.recall for p in points]
    assert all(r is not None for r in recalls)
    for earlier, later in zip(recalls, recalls[1:]):
        assert earlier <= later


def test_seeded_cli_runs_are_byte_identical(lang_files, tmp_path):
    def digest(path) -> str:
        with open(path, "rb") as fh:
            return hashlib.sha256(fh.read()).hexdigest()

    corrupt_digests = []
    correct_digests = []
    for tag in ("one", "two"):
        records = tmp_path / f"records-{tag}.tsv"
        predictions = tmp_path / f"predictions-{tag}.tsv"
        assert main([
            "corrupt",
            "--corpus", lang_files.corpus,
            "--dictionary", lang_files.dictionary,
            "--adjacency", lang_files.adjacency,
            "--homophones", lang_files.homophones,
            "--records-out", str(records),
            "--seed", "31337",
        ]) == EXIT_OK
        build_dir = tmp_path / f"artifacts-{tag}"
        assert main([
            "build",
            "--dictionary", lang_files.dictionary,
            "--adjacency", lang_files.adjacency,
            "--homophones", lang_files.homophones,
            "--out-dir", str(build_dir),
        ]) == EXIT_OK
        assert main([
            "correct",
            "--records", str(records),
            "--lexicon", str(build_dir / "lexicon.tsv"),
            "--confusion", str(build_dir / "confusion.bin"),
            "--out", str(predictions),
            "--scorer", "ngram",
            "--train-corpus", lang_files.corpus,
        ]) == EXIT_OK
        corrupt_digests.append(digest(records))
        correct_digests.append(digest(predictions))
    assert corrupt_digests[0] == corrupt_digests[1]
    assert correct_digests[0] == correct_digests[1]


def test_zwnj_stripping_flips_only_zwnj_boundary_cases(
    lang, confusion_index, dataset_10k
):
    zwnj_gold = "آب‌رو"
    record_with_zwnj = ErrorRecord(
        sentence_id=0,
        corrupted_tokens=("این", "آبدرو", "رفت"),
        error_index=1,
        original_word=zwnj_gold,
        corrupted_word="آبدرو",
        category="nonreal",
        etype="keyboard",
    )
    plain_record = ErrorRecord(
        sentence_id=1,
        corrupted_tokens=("این", "دسد", "رفت"),
        error_index=1,
        original_word="دست",
        corrupted_word="دسد",
        category="nonreal",
        etype="keyboard",
    )
    clean_record = ErrorRecord(
        sentence_id=2,
        corrupted_tokens=("این", "دست", "رفت"),
        error_index=-1,
        original_word="",
        corrupted_word="",
        category="none",
        etype="none",
    )
    joined = [
        (
            record_with_zwnj,
            1,
            Suggestion("آبدرو", "آبرو", ACTION_REPLACED, 0.9, REASON_OK),
        ),
        (plain_record, 1, Suggestion("دسد", "دست", ACTION_REPLACED, 0.9, REASON_OK)),
        (
            clean_record,
            0,
            Suggestion("این", "این", ACTION_KEPT, 0.0, REASON_BELOW_THRESHOLD),
        ),
    ]
    raw, stripped = zwnj_ablation(joined, {})
    assert raw.overall.tp == 1
    assert stripped.overall.tp == 2
    assert stripped.overall.tp > raw.overall.tp
    assert raw.overall.fn == 1 and stripped.overall.fn == 0

    # a corpus with no ZWNJ anywhere judges identically in both modes
    config = CorrectorConfig()
    clean_joined = []
    for record in dataset_10k[:1_000]:
        scorer = OracleScorer(record.original_word)
        index, suggestion = correct_record(
            record, lang.lexicon, confusion_index, scorer, config
        )
        clean_joined.append((record, index, suggestion))
    raw, stripped = zwnj_ablation(clean_joined, {})
    assert raw.per_class == stripped.per_class
    assert raw.micro == stripped.micro
    assert raw.macro == stripped.macro


def test_distance_ball_baseline_scores_more_candidates_than_proposed(
    lang, confusion_index, ngram, dataset_10k
):
    records = dataset_10k[:200]

    def mean_candidates(strategy: str) -> float:
        config = CorrectorConfig(strategy=strategy)
        totals = []
        for record in records:
            _, suggestion = correct_record(
                record, lang.lexicon, confusion_index, ngram, config
            )
            totals.append(suggestion.n_candidates)
        return sum(totals) / len(totals)

    mean_proposed = mean_candidates(STRATEGY_PROPOSED)
    mean_v1 = mean_candidates(STRATEGY_BASELINE_V1)
    mean_v2 = mean_candidates(STRATEGY_BASELINE_V2)
    assert mean_v2 > mean_proposed
    assert mean_v1 > 0
    assert mean_v2 > 0
