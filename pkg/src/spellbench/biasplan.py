"""Masking plans for the biased fine-tuning schedule.

Each non-error word is independently selected with probability 0.15; selected
words get one of mask / random_replace / keep with probabilities
0.80 / 0.10 / 0.10 and a loss flag. The labeled error word (if any) is kept
out of the 15% pool, always carries the loss flag, and passes through the
same 0.80 / 0.10 / 0.10 split. Actions are whole-word: subword alignment is
the consumer's job.

The plan's random replacement words exist in memory for direct consumers;
the serialized training file carries only the four aligned columns
(original tokens, corrupted tokens, action codes, loss flags), and the
fine-tuning script draws its own replacement tokens from its vocabulary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from spellbench.errorgen import ErrorRecord
from spellbench.lexicon import Lexicon

ACTION_MASK = "m"
ACTION_RANDOM = "r"
ACTION_KEEP = "k"
ACTION_NONE = "n"
ACTIONS = (ACTION_MASK, ACTION_RANDOM, ACTION_KEEP, ACTION_NONE)


@dataclass(frozen=True)
class MaskingPlan:
    actions: tuple[str, ...]
    loss_flags: tuple[bool, ...]
    replacements: tuple[str | None, ...]

    def __post_init__(self) -> None:
        if not len(self.actions) == len(self.loss_flags) == len(self.replacements):
            raise ValueError("plan columns must align")


@dataclass(frozen=True)
class PlanConfig:
    p_select: float = 0.15
    p_mask: float = 0.80
    p_random: float = 0.10
    p_keep: float = 0.10
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_select <= 1.0:
            raise ValueError("p_select must be in [0, 1]")
        if abs(self.p_mask + self.p_random + self.p_keep - 1.0) > 1e-9:
            raise ValueError("action probabilities must sum to 1")


def plan_rng(seed: int, sentence_id: int) -> np.random.Generator:
    return np.random.default_rng([seed, sentence_id])


def _draw_action(rng: np.random.Generator, config: PlanConfig) -> str:
    u = rng.random()
    if u < config.p_mask:
        return ACTION_MASK
    if u < config.p_mask + config.p_random:
        return ACTION_RANDOM
    return ACTION_KEEP


def _draw_replacement(
    rng: np.random.Generator, words: Sequence[str], original: str
) -> str | None:
    if not words:
        return None
    for _ in range(64):
        word = words[int(rng.integers(len(words)))]
        if word != original:
            return word
    return None  # degenerate lexicon: every draw hit the original


def build_masking_plan(
    record: ErrorRecord,
    lexicon: Lexicon,
    rng: np.random.Generator,
    config: PlanConfig = PlanConfig(),
) -> MaskingPlan:
    """One deterministic plan per record given its substream."""
    words = lexicon.word_list
    actions: list[str] = []
    flags: list[bool] = []
    replacements: list[str | None] = []
    for i, token in enumerate(record.corrupted_tokens):
        if i == record.error_index:
            action = _draw_action(rng, config)
        elif rng.random() < config.p_select:
            action = _draw_action(rng, config)
        else:
            actions.append(ACTION_NONE)
            flags.append(False)
            replacements.append(None)
            continue
        replacement = None
        if action == ACTION_RANDOM:
            replacement = _draw_replacement(rng, words, token)
            if replacement is None:
                action = ACTION_KEEP
        actions.append(action)
        flags.append(True)
        replacements.append(replacement)
    return MaskingPlan(tuple(actions), tuple(flags), tuple(replacements))


def build_masking_plans(
    records: Iterable[ErrorRecord],
    lexicon: Lexicon,
    config: PlanConfig = PlanConfig(),
) -> list[MaskingPlan]:
    return [
        build_masking_plan(r, lexicon, plan_rng(config.seed, r.sentence_id), config)
        for r in records
    ]


def format_training_line(record: ErrorRecord, plan: MaskingPlan) -> str:
    """Four TAB-separated aligned columns of space-separated fields."""
    originals = record.original_tokens()
    n = len(record.corrupted_tokens)
    if not (len(originals) == len(plan.actions) == len(plan.loss_flags) == n):
        raise ValueError(
            f"record {record.sentence_id}: plan does not align with tokens"
        )
    return "\t".join(
        (
            " ".join(originals),
            " ".join(record.corrupted_tokens),
            " ".join(plan.actions),
            " ".join("1" if f else "0" for f in plan.loss_flags),
        )
    )


def emit_training_file(
    records: Sequence[ErrorRecord], plans: Sequence[MaskingPlan], path: str
) -> None:
    if len(records) != len(plans):
        raise ValueError("one plan per record required")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record, plan in zip(records, plans):
            fh.write(format_training_line(record, plan) + "\n")
