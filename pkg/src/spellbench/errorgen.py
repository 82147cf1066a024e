"""Error variant generation, the corruption policy, and dataset construction.

Three generators produce misspellings of a word: keyboard-neighbor
substitution, adjacent-letter swap, and homophone substitution. A variant is
a real-word error when it lands in the lexicon and a non-real-word error
otherwise.

Corruption of one sentence draws from a dedicated deterministic substream so
datasets are bit-reproducible for a fixed seed, including under parallelism.
The branch policy is:

    draw u1: if u1 < p_unchanged, leave the sentence unchanged.
    else, if any word admits a real-word homophone variant, draw u2:
        if u2 < p_homophone_real, apply a real-word homophone error.
    else draw u3: real branch with p_real_branch, otherwise non-real;
        draw u4 to pick the error type inside the branch (keyboard /
        substitution for real, keyboard / substitution / homophone for
        non-real). If the chosen sub-branch is feasible for no word, fall
        through the remaining sub-branches in a fixed order, then degrade
        to unchanged.

The target word is uniform over the words eligible for the chosen branch and
the variant uniform over that word's eligible variants (sorted), consuming
exactly two further draws.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from spellbench.lexicon import Lexicon
from spellbench.textnorm import PruneResult, Sentence, prune_line

CATEGORY_REAL = "real"
CATEGORY_NONREAL = "nonreal"
CATEGORY_NONE = "none"

ETYPE_KEYBOARD = "keyboard"
ETYPE_SUBSTITUTION = "substitution"
ETYPE_HOMOPHONE = "homophone"
ETYPE_NONE = "none"

CATEGORIES = (CATEGORY_REAL, CATEGORY_NONREAL, CATEGORY_NONE)
ETYPES = (ETYPE_KEYBOARD, ETYPE_SUBSTITUTION, ETYPE_HOMOPHONE, ETYPE_NONE)

# (category, etype) cells reported in stats, fixed order
STAT_CELLS = (
    (CATEGORY_NONE, ETYPE_NONE),
    (CATEGORY_REAL, ETYPE_KEYBOARD),
    (CATEGORY_REAL, ETYPE_SUBSTITUTION),
    (CATEGORY_REAL, ETYPE_HOMOPHONE),
    (CATEGORY_NONREAL, ETYPE_KEYBOARD),
    (CATEGORY_NONREAL, ETYPE_SUBSTITUTION),
    (CATEGORY_NONREAL, ETYPE_HOMOPHONE),
)


class ErrorGenError(Exception):
    """Raised for unusable letter-map files or unusable corpora."""


@dataclass(frozen=True)
class LetterMap:
    """Symmetric letter relation: keyboard adjacency or homophone classes."""

    neighbors: dict[str, tuple[str, ...]]

    def of(self, letter: str) -> tuple[str, ...]:
        return self.neighbors.get(letter, ())


KeyboardAdjacency = LetterMap
HomophoneMap = LetterMap


def load_letter_map(path: str) -> LetterMap:
    """Load `letter<TAB>n1,n2,...` lines and symmetrize the relation."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ErrorGenError(f"cannot read letter map {path}: {exc}") from exc
    raw: dict[str, list[str]] = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ErrorGenError(f"{path}:{lineno}: expected `letter<TAB>n1,n2,...`")
        letter = parts[0]
        if len(letter) != 1:
            raise ErrorGenError(f"{path}:{lineno}: key must be a single letter")
        targets = [t for t in parts[1].split(",") if t]
        for t in targets:
            if len(t) != 1:
                raise ErrorGenError(f"{path}:{lineno}: neighbor must be a single letter")
            if t == letter:
                raise ErrorGenError(f"{path}:{lineno}: letter may not list itself")
        raw.setdefault(letter, [])
        for t in targets:
            if t not in raw[letter]:
                raw[letter].append(t)
    # symmetric closure, preserving first-seen order
    for letter in list(raw):
        for t in raw[letter]:
            raw.setdefault(t, [])
            if letter not in raw[t]:
                raw[t].append(letter)
    return LetterMap({k: tuple(v) for k, v in raw.items() if v})


def keyboard_variants(word: str, adj: LetterMap) -> set[str]:
    """Every word obtained by one neighbor-letter substitution."""
    return _substitution_variants(word, adj)


def homophone_variants(word: str, hmap: LetterMap) -> set[str]:
    """Every word obtained by one sound-alike substitution."""
    return _substitution_variants(word, hmap)


def _substitution_variants(word: str, rel: LetterMap) -> set[str]:
    out: set[str] = set()
    for i, ch in enumerate(word):
        for repl in rel.of(ch):
            v = word[:i] + repl + word[i + 1 :]
            if v != word:
                out.add(v)
    return out


def swap_variants(word: str) -> set[str]:
    """Every word obtained by swapping one pair of adjacent unequal letters."""
    out: set[str] = set()
    for i in range(len(word) - 1):
        if word[i] != word[i + 1]:
            v = word[: i] + word[i + 1] + word[i] + word[i + 2 :]
            if v != word:
                out.add(v)
    return out


def classify_variant(variant: str, lexicon: Lexicon) -> str:
    """`real` when the variant is a lexicon word, `nonreal` otherwise."""
    return CATEGORY_REAL if lexicon.contains(variant) else CATEGORY_NONREAL


@dataclass(frozen=True)
class ErrorRecord:
    """One labeled corruption: at most one error per sentence."""

    sentence_id: int
    corrupted_tokens: tuple[str, ...]
    error_index: int
    original_word: str
    corrupted_word: str
    category: str
    etype: str

    @property
    def has_error(self) -> bool:
        return self.category != CATEGORY_NONE

    def original_tokens(self) -> tuple[str, ...]:
        if not self.has_error:
            return self.corrupted_tokens
        toks = list(self.corrupted_tokens)
        toks[self.error_index] = self.original_word
        return tuple(toks)


def unchanged_record(sentence_id: int, tokens: Sequence[str]) -> ErrorRecord:
    return ErrorRecord(
        sentence_id=sentence_id,
        corrupted_tokens=tuple(tokens),
        error_index=-1,
        original_word="",
        corrupted_word="",
        category=CATEGORY_NONE,
        etype=ETYPE_NONE,
    )


@dataclass(frozen=True)
class CorruptionConfig:
    p_unchanged: float = 0.5
    p_homophone_real: float = 0.8
    p_real_branch: float = 0.5
    real_split: tuple[float, float] = (0.5, 0.5)  # keyboard, substitution
    nonreal_split: tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    repetitions: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("p_unchanged", "p_homophone_real", "p_real_branch"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        if abs(sum(self.real_split) - 1.0) > 1e-9:
            raise ValueError("real_split must sum to 1")
        if abs(sum(self.nonreal_split) - 1.0) > 1e-9:
            raise ValueError("nonreal_split must sum to 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class WordVariants:
    """A word's variants per error type, split by lexicon membership."""

    real_keyboard: tuple[str, ...]
    nonreal_keyboard: tuple[str, ...]
    real_substitution: tuple[str, ...]
    nonreal_substitution: tuple[str, ...]
    real_homophone: tuple[str, ...]
    nonreal_homophone: tuple[str, ...]

    def get(self, category: str, etype: str) -> tuple[str, ...]:
        return getattr(self, f"{category}_{etype}")


def word_variants(
    word: str,
    lexicon: Lexicon,
    adj: LetterMap,
    hmap: LetterMap,
    cache: dict[str, WordVariants] | None = None,
) -> WordVariants:
    if cache is not None and word in cache:
        return cache[word]
    split: dict[str, tuple[str, ...]] = {}
    for etype, variants in (
        (ETYPE_KEYBOARD, keyboard_variants(word, adj)),
        (ETYPE_SUBSTITUTION, swap_variants(word)),
        (ETYPE_HOMOPHONE, homophone_variants(word, hmap)),
    ):
        real = sorted(v for v in variants if lexicon.contains(v))
        nonreal = sorted(v for v in variants if not lexicon.contains(v))
        split[f"real_{etype}"] = tuple(real)
        split[f"nonreal_{etype}"] = tuple(nonreal)
    wv = WordVariants(**split)
    if cache is not None:
        cache[word] = wv
    return wv


# Fall-through order when the drawn sub-branch is infeasible for every word.
_FALLBACK_ORDER = (
    (CATEGORY_REAL, ETYPE_KEYBOARD),
    (CATEGORY_REAL, ETYPE_SUBSTITUTION),
    (CATEGORY_NONREAL, ETYPE_KEYBOARD),
    (CATEGORY_NONREAL, ETYPE_SUBSTITUTION),
    (CATEGORY_NONREAL, ETYPE_HOMOPHONE),
)


def inject_error(
    sentence: Sentence,
    config: CorruptionConfig,
    lexicon: Lexicon,
    adj: LetterMap,
    hmap: LetterMap,
    rng: np.random.Generator,
    sentence_id: int = 0,
    cache: dict[str, WordVariants] | None = None,
) -> ErrorRecord:
    """Corrupt at most one word of a pruned sentence per the branch policy."""
    tokens = sentence.tokens
    if rng.random() < config.p_unchanged:
        return unchanged_record(sentence_id, tokens)

    per_word = [word_variants(t, lexicon, adj, hmap, cache) for t in tokens]

    def eligible(category: str, etype: str) -> list[int]:
        return [i for i, wv in enumerate(per_word) if wv.get(category, etype)]

    rh_eligible = eligible(CATEGORY_REAL, ETYPE_HOMOPHONE)
    if rh_eligible and rng.random() < config.p_homophone_real:
        return _apply(
            sentence_id, tokens, per_word, rh_eligible, CATEGORY_REAL, ETYPE_HOMOPHONE, rng
        )

    if rng.random() < config.p_real_branch:
        category = CATEGORY_REAL
        u = rng.random()
        etype = ETYPE_KEYBOARD if u < config.real_split[0] else ETYPE_SUBSTITUTION
    else:
        category = CATEGORY_NONREAL
        u = rng.random()
        kb, sub, _hom = config.nonreal_split
        if u < kb:
            etype = ETYPE_KEYBOARD
        elif u < kb + sub:
            etype = ETYPE_SUBSTITUTION
        else:
            etype = ETYPE_HOMOPHONE

    positions = eligible(category, etype)
    if not positions:
        for category, etype in _FALLBACK_ORDER:
            positions = eligible(category, etype)
            if positions:
                break
        else:
            return unchanged_record(sentence_id, tokens)
    return _apply(sentence_id, tokens, per_word, positions, category, etype, rng)


def _apply(
    sentence_id: int,
    tokens: tuple[str, ...],
    per_word: list[WordVariants],
    positions: list[int],
    category: str,
    etype: str,
    rng: np.random.Generator,
) -> ErrorRecord:
    index = positions[int(rng.integers(len(positions)))]
    variants = per_word[index].get(category, etype)
    corrupted = variants[int(rng.integers(len(variants)))]
    new_tokens = list(tokens)
    new_tokens[index] = corrupted
    return ErrorRecord(
        sentence_id=sentence_id,
        corrupted_tokens=tuple(new_tokens),
        error_index=index,
        original_word=tokens[index],
        corrupted_word=corrupted,
        category=category,
        etype=etype,
    )


def record_rng(seed: int, repetition: int, line_index: int) -> np.random.Generator:
    """Deterministic substream for one (repetition, pruned line) record."""
    return np.random.default_rng([seed, repetition, line_index])


@dataclass
class DatasetStats:
    lines_read: int = 0
    lines_kept: int = 0
    pruned_oov: int = 0
    pruned_too_short: int = 0
    pruned_too_long: int = 0
    cells: dict[tuple[str, str], int] = field(
        default_factory=lambda: {cell: 0 for cell in STAT_CELLS}
    )

    @property
    def records_total(self) -> int:
        return sum(self.cells.values())

    def count_prune(self, result: PruneResult) -> None:
        self.lines_read += 1
        if result.accepted:
            self.lines_kept += 1
        elif result.reason == "oov":
            self.pruned_oov += 1
        elif result.reason == "too_short":
            self.pruned_too_short += 1
        else:
            self.pruned_too_long += 1

    def count_record(self, record: ErrorRecord) -> None:
        self.cells[(record.category, record.etype)] += 1

    def rows(self) -> list[tuple[str, int]]:
        out = [
            ("lines_read", self.lines_read),
            ("lines_kept", self.lines_kept),
            ("pruned_oov", self.pruned_oov),
            ("pruned_too_short", self.pruned_too_short),
            ("pruned_too_long", self.pruned_too_long),
            ("records_total", self.records_total),
        ]
        for category, etype in STAT_CELLS:
            label = "none" if category == CATEGORY_NONE else f"{category}_{etype}"
            out.append((label, self.cells[(category, etype)]))
        return out

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for label, count in self.rows():
                fh.write(f"{label}\t{count}\n")


def prune_corpus(lines: Iterable[str], lexicon: Lexicon, stats: DatasetStats) -> list[Sentence]:
    kept: list[Sentence] = []
    for line in lines:
        result = prune_line(line, lexicon)
        stats.count_prune(result)
        if result.accepted:
            assert result.sentence is not None
            kept.append(result.sentence)
    return kept


# per-process state for parallel dataset builds; workers only memoize their
# own variant cache, so results are identical to the sequential path
_INJECT_STATE: dict = {}


def _init_inject_worker(
    config: CorruptionConfig, lexicon: Lexicon, adj: LetterMap, hmap: LetterMap
) -> None:
    _INJECT_STATE["config"] = config
    _INJECT_STATE["lexicon"] = lexicon
    _INJECT_STATE["adj"] = adj
    _INJECT_STATE["hmap"] = hmap
    _INJECT_STATE["cache"] = {}


def _inject_chunk(
    tasks: Sequence[tuple[int, int, int, Sentence]],
) -> list[ErrorRecord]:
    st = _INJECT_STATE
    return [
        inject_error(
            sentence,
            st["config"],
            st["lexicon"],
            st["adj"],
            st["hmap"],
            record_rng(st["config"].seed, rep, line_index),
            sentence_id=sentence_id,
            cache=st["cache"],
        )
        for rep, line_index, sentence_id, sentence in tasks
    ]


def _iter_records_parallel(
    sentences: Sequence[Sentence],
    config: CorruptionConfig,
    lexicon: Lexicon,
    adj: LetterMap,
    hmap: LetterMap,
    jobs: int,
) -> Iterator[ErrorRecord]:
    tasks = [
        (rep, i, rep * len(sentences) + i, sentence)
        for rep in range(config.repetitions)
        for i, sentence in enumerate(sentences)
    ]
    chunksize = max(1, len(tasks) // (jobs * 8))
    chunks = [tasks[i : i + chunksize] for i in range(0, len(tasks), chunksize)]
    with ProcessPoolExecutor(
        max_workers=jobs,
        initializer=_init_inject_worker,
        initargs=(config, lexicon, adj, hmap),
    ) as pool:
        for records in pool.map(_inject_chunk, chunks):
            yield from records


def build_dataset(
    corpus_path: str,
    config: CorruptionConfig,
    lexicon: Lexicon,
    adj: LetterMap,
    hmap: LetterMap,
    records_path: str,
    stats_path: str | None = None,
    jobs: int = 1,
) -> DatasetStats:
    """Prune a corpus, corrupt it `repetitions` times, write records and stats.

    Records are appended repetition after repetition; sentence_id is
    `repetition * kept_line_count + line_index`, so ids are unique across the
    whole file and joinable from prediction files. Every record has its own
    RNG substream, so `jobs` does not change the output bytes.
    """
    try:
        with open(corpus_path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ErrorGenError(f"cannot read corpus {corpus_path}: {exc}") from exc
    stats = DatasetStats()
    sentences = prune_corpus(lines, lexicon, stats)
    if not sentences:
        raise ErrorGenError(f"{corpus_path}: no line survived pruning")
    if jobs > 1:
        records: Iterable[ErrorRecord] = _iter_records_parallel(
            sentences, config, lexicon, adj, hmap, jobs
        )
    else:
        cache: dict[str, WordVariants] = {}
        records = (
            inject_error(
                sentence,
                config,
                lexicon,
                adj,
                hmap,
                record_rng(config.seed, rep, line_index),
                sentence_id=rep * len(sentences) + line_index,
                cache=cache,
            )
            for rep in range(config.repetitions)
            for line_index, sentence in enumerate(sentences)
        )
    with open(records_path, "w", encoding="utf-8", newline="\n") as out:
        for record in records:
            stats.count_record(record)
            out.write(format_record(record) + "\n")
    if stats_path is not None:
        stats.write(stats_path)
    return stats


def format_record(record: ErrorRecord) -> str:
    return "\t".join(
        (
            str(record.sentence_id),
            " ".join(record.corrupted_tokens),
            str(record.error_index),
            record.original_word,
            record.corrupted_word,
            record.category,
            record.etype,
        )
    )


def parse_record(line: str, lineno: int = 0, path: str = "<records>") -> ErrorRecord:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 7:
        raise ErrorGenError(f"{path}:{lineno}: expected 7 tab-separated fields")
    sid, sentence, index, original, corrupted, category, etype = parts
    if category not in CATEGORIES or etype not in ETYPES:
        raise ErrorGenError(f"{path}:{lineno}: unknown category/etype {category}/{etype}")
    try:
        record = ErrorRecord(
            sentence_id=int(sid),
            corrupted_tokens=tuple(sentence.split(" ")) if sentence else (),
            error_index=int(index),
            original_word=original,
            corrupted_word=corrupted,
            category=category,
            etype=etype,
        )
    except ValueError as exc:
        raise ErrorGenError(f"{path}:{lineno}: {exc}") from exc
    return record


def read_records(path: str) -> list[ErrorRecord]:
    try:
        with open(path, encoding="utf-8") as fh:
            return [
                parse_record(line, lineno, path)
                for lineno, line in enumerate(fh, start=1)
                if line.strip()
            ]
    except OSError as exc:
        raise ErrorGenError(f"cannot read records {path}: {exc}") from exc


def eval_retention_filter(
    records: Iterable[ErrorRecord], confusion_index
) -> Iterator[ErrorRecord]:
    """Keep corrupted records, and unchanged records whose sentence contains
    at least one word with a non-empty real-word confusion set."""
    for record in records:
        if record.has_error:
            yield record
        elif any(confusion_index.confusion_set(t) for t in record.corrupted_tokens):
            yield record
