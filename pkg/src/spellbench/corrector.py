"""Correction pipelines: non-real-word, real-word, and the two baselines.

The non-real pipeline scores the union of distance-1 and adjacent-swap
candidates and always takes the best one (a word known to be misspelled has
no reason to survive). The real-word pipeline scores the word's confusion
set and replaces only when the best score clears the threshold K and the
distance guard. Ties break by score, then smaller Levenshtein distance to
the observed word, then lexicographically, so runs are reproducible.

Scorer failures never abort a run: the word is kept and the failure recorded
in the suggestion's reason.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from spellbench.confusion import ConfusionIndex
from spellbench.editdist import levenshtein, within_distance
from spellbench.errorgen import ErrorRecord
from spellbench.lexicon import Lexicon
from spellbench.scorer import MaskedQuery, ScoredCandidate, Scorer, ScorerError

ACTION_REPLACED = "replaced"
ACTION_KEPT = "kept"

REASON_OK = "ok"
REASON_BELOW_THRESHOLD = "below_threshold"
REASON_DISTANCE_GUARD = "distance_guard"
REASON_NO_CANDIDATES = "no_candidates"
REASON_SCORER_FAILURE = "scorer_failure"

STRATEGY_PROPOSED = "proposed"
STRATEGY_BASELINE_V1 = "baseline_v1"
STRATEGY_BASELINE_V2 = "baseline_v2"
STRATEGIES = (STRATEGY_PROPOSED, STRATEGY_BASELINE_V1, STRATEGY_BASELINE_V2)

DETECTION_ORACLE = "oracle"
DETECTION_SCAN = "scan"


@dataclass(frozen=True)
class Suggestion:
    original: str
    replacement: str
    action: str
    score: float | None
    reason: str
    n_candidates: int = 0

    def __post_init__(self) -> None:
        if (self.action == ACTION_KEPT) != (self.replacement == self.original):
            raise ValueError("kept iff replacement equals original")
        if self.action == ACTION_REPLACED and (self.score is None or self.reason != REASON_OK):
            raise ValueError("replacements carry a score and reason `ok`")


def kept(original: str, reason: str, score: float | None = None, n_candidates: int = 0) -> Suggestion:
    return Suggestion(original, original, ACTION_KEPT, score, reason, n_candidates)


@dataclass(frozen=True)
class CorrectorConfig:
    threshold_k: float = 1e-5
    max_distance: int = 2
    strategy: str = STRATEGY_PROPOSED
    detection_mode: str = DETECTION_ORACLE
    baseline_v1_topn: int = 500

    def __post_init__(self) -> None:
        if not 0.0 < self.threshold_k < 1.0:
            raise ValueError("threshold_k must be in (0, 1)")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.detection_mode not in (DETECTION_ORACLE, DETECTION_SCAN):
            raise ValueError(f"unknown detection mode {self.detection_mode!r}")
        if self.baseline_v1_topn < 1:
            raise ValueError("baseline_v1_topn must be >= 1")


@dataclass(frozen=True)
class MaskedSlot:
    """A sentence with one position marked; candidates attached later."""

    tokens: tuple[str, ...]
    mask_index: int

    def with_candidates(self, candidates: Sequence[str]) -> MaskedQuery:
        return MaskedQuery(self.tokens, self.mask_index, tuple(candidates))


def mask_word(tokens: Sequence[str], index: int) -> MaskedSlot:
    if not 0 <= index < len(tokens):
        raise IndexError(f"token index {index} out of range for {len(tokens)} tokens")
    return MaskedSlot(tuple(tokens), index)


def _best(scored: Sequence[ScoredCandidate], original: str) -> ScoredCandidate:
    return min(
        scored, key=lambda sc: (-sc.score, levenshtein(sc.word, original), sc.word)
    )


def _ordered_candidates(cands: set[str], original: str) -> list[str]:
    return sorted(cands, key=lambda w: (levenshtein(w, original), w))


def correct_nonreal(
    tokens: Sequence[str], index: int, lexicon: Lexicon, scorer: Scorer
) -> Suggestion:
    """Correct an out-of-lexicon word: best candidate wins, no threshold."""
    slot = mask_word(tokens, index)
    word = slot.tokens[index]
    candidates = _ordered_candidates(
        lexicon.candidates_distance1(word) | lexicon.candidates_adjacent_swap(word),
        word,
    )
    if not candidates:
        return kept(word, REASON_NO_CANDIDATES)
    try:
        scored = scorer.score(slot.with_candidates(candidates))
    except ScorerError:
        return kept(word, REASON_SCORER_FAILURE, n_candidates=len(candidates))
    best = _best(scored, word)
    return Suggestion(
        original=word,
        replacement=best.word,
        action=ACTION_REPLACED,
        score=best.score,
        reason=REASON_OK,
        n_candidates=len(candidates),
    )


def decide_realword(
    word: str, best: ScoredCandidate, config: CorrectorConfig, n_candidates: int
) -> Suggestion:
    """Threshold and distance-guard decision for a scored real-word winner.

    Shared by the online pipeline and the score-once threshold sweep so the
    two paths cannot drift apart.
    """
    if best.score < config.threshold_k:
        return kept(word, REASON_BELOW_THRESHOLD, best.score, n_candidates)
    if levenshtein(best.word, word) > config.max_distance:
        return kept(word, REASON_DISTANCE_GUARD, best.score, n_candidates)
    return Suggestion(
        original=word,
        replacement=best.word,
        action=ACTION_REPLACED,
        score=best.score,
        reason=REASON_OK,
        n_candidates=n_candidates,
    )


@dataclass(frozen=True)
class RealwordScoring:
    """Scorer output for one in-lexicon position, before the K decision.

    Caching these lets a threshold sweep score once and re-decide per K
    while running the identical decision code as the online pipeline.
    """

    word: str
    n_candidates: int
    best: ScoredCandidate | None = None
    failure_reason: str | None = None

    def decide(self, config: CorrectorConfig) -> Suggestion:
        if self.best is None:
            return kept(self.word, self.failure_reason, n_candidates=self.n_candidates)
        return decide_realword(self.word, self.best, config, self.n_candidates)


def score_realword(
    tokens: Sequence[str],
    index: int,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
) -> RealwordScoring:
    slot = mask_word(tokens, index)
    word = slot.tokens[index]
    candidates = confusion_index.confusion_set(word)
    if not candidates:
        return RealwordScoring(word, 0, failure_reason=REASON_NO_CANDIDATES)
    try:
        scored = scorer.score(slot.with_candidates(candidates))
    except ScorerError:
        return RealwordScoring(
            word, len(candidates), failure_reason=REASON_SCORER_FAILURE
        )
    return RealwordScoring(word, len(candidates), best=_best(scored, word))


def correct_realword(
    tokens: Sequence[str],
    index: int,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
    config: CorrectorConfig,
) -> Suggestion:
    """Correct an in-lexicon word via its confusion set, threshold K applied."""
    return score_realword(tokens, index, confusion_index, scorer).decide(config)


def baseline_v1(
    tokens: Sequence[str],
    index: int,
    scorer: Scorer,
    topn: int,
) -> Suggestion:
    """Open-vocabulary top-N suggestion filtered to distance <= 2.

    The best survivor by (distance, model rank) wins; the scorer must expose
    `top_candidates`.
    """
    slot = mask_word(tokens, index)
    word = slot.tokens[index]
    if not hasattr(scorer, "top_candidates"):
        raise TypeError("baseline_v1 needs a scorer with top-N support")
    try:
        top = scorer.top_candidates(slot.tokens, index, topn)
    except ScorerError:
        return kept(word, REASON_SCORER_FAILURE)
    survivors = [
        (levenshtein(sc.word, word), rank, sc)
        for rank, sc in enumerate(top)
        if within_distance(sc.word, word, 2)
    ]
    if not survivors:
        return kept(word, REASON_NO_CANDIDATES, n_candidates=len(top))
    _, _, best = min(survivors)
    if best.word == word:
        return kept(word, REASON_OK, best.score, n_candidates=len(top))
    return Suggestion(
        original=word,
        replacement=best.word,
        action=ACTION_REPLACED,
        score=best.score,
        reason=REASON_OK,
        n_candidates=len(top),
    )


def baseline_v2(
    tokens: Sequence[str],
    index: int,
    lexicon: Lexicon,
    scorer: Scorer,
) -> Suggestion:
    """Score the full distance-2 ball around the word; best candidate wins."""
    slot = mask_word(tokens, index)
    word = slot.tokens[index]
    ball = [w for w in lexicon if within_distance(w, word, 2)]
    candidates = _ordered_candidates(set(ball), word)
    if not candidates:
        return kept(word, REASON_NO_CANDIDATES)
    try:
        scored = scorer.score(slot.with_candidates(candidates))
    except ScorerError:
        return kept(word, REASON_SCORER_FAILURE, n_candidates=len(candidates))
    best = _best(scored, word)
    if best.word == word:
        return kept(word, REASON_OK, best.score, n_candidates=len(candidates))
    return Suggestion(
        original=word,
        replacement=best.word,
        action=ACTION_REPLACED,
        score=best.score,
        reason=REASON_OK,
        n_candidates=len(candidates),
    )


def probe_index(tokens: Sequence[str], confusion_index: ConfusionIndex) -> int:
    """Judged position for a record with no labeled error: the first token
    that could be a real-word error, falling back to the first token."""
    for i, token in enumerate(tokens):
        if confusion_index.confusion_set(token):
            return i
    return 0


def correct_at(
    tokens: Sequence[str],
    index: int,
    lexicon: Lexicon,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
    config: CorrectorConfig,
) -> Suggestion:
    """Route one position through the configured strategy."""
    if config.strategy == STRATEGY_BASELINE_V1:
        return baseline_v1(tokens, index, scorer, config.baseline_v1_topn)
    if config.strategy == STRATEGY_BASELINE_V2:
        return baseline_v2(tokens, index, lexicon, scorer)
    if lexicon.contains(tokens[index]):
        return correct_realword(tokens, index, confusion_index, scorer, config)
    return correct_nonreal(tokens, index, lexicon, scorer)


def correct_record(
    record: ErrorRecord,
    lexicon: Lexicon,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
    config: CorrectorConfig,
) -> tuple[int, Suggestion]:
    """Oracle-mode correction: exactly one judged position per record."""
    tokens = record.corrupted_tokens
    if record.has_error:
        index = record.error_index
        if not 0 <= index < len(tokens):
            raise IndexError(
                f"record {record.sentence_id}: error index {index} out of range"
            )
    else:
        index = probe_index(tokens, confusion_index)
    return index, correct_at(tokens, index, lexicon, confusion_index, scorer, config)


def correct_sentence_scan(
    tokens: Sequence[str],
    lexicon: Lexicon,
    confusion_index: ConfusionIndex,
    scorer: Scorer,
    config: CorrectorConfig,
) -> list[tuple[int, Suggestion]]:
    """Scan mode: every token is processed through its matching pipeline."""
    return [
        (i, correct_at(tokens, i, lexicon, confusion_index, scorer, config))
        for i in range(len(tokens))
    ]


def apply_suggestion(tokens: Sequence[str], index: int, suggestion: Suggestion) -> tuple[str, ...]:
    out = list(tokens)
    out[index] = suggestion.replacement
    return tuple(out)


# ------------------------------------------------------------- prediction IO


def format_prediction(sentence_id: int, token_index: int, s: Suggestion) -> str:
    score = "" if s.score is None else repr(s.score)
    return "\t".join(
        (str(sentence_id), str(token_index), s.original, s.replacement, s.action, score, s.reason)
    )


def parse_prediction(line: str, lineno: int = 0, path: str = "<predictions>") -> tuple[int, int, Suggestion]:
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 7:
        raise ValueError(f"{path}:{lineno}: expected 7 tab-separated fields")
    sid, index, original, replacement, action, score, reason = parts
    suggestion = Suggestion(
        original=original,
        replacement=replacement,
        action=action,
        score=float(score) if score else None,
        reason=reason,
    )
    return int(sid), int(index), suggestion


def write_predictions(rows: Sequence[tuple[int, int, Suggestion]], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sentence_id, token_index, suggestion in rows:
            fh.write(format_prediction(sentence_id, token_index, suggestion) + "\n")


def read_predictions(path: str) -> list[tuple[int, int, Suggestion]]:
    with open(path, encoding="utf-8") as fh:
        return [
            parse_prediction(line, lineno, path)
            for lineno, line in enumerate(fh, start=1)
            if line.strip()
        ]
