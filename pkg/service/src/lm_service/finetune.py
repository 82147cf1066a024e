"""Biased fine-tuning from four-column training files.

A training line has four TAB-separated columns of space-separated fields,
aligned token by token: original tokens, corrupted tokens, action codes
(m mask, r random-replace, k keep, n untouched), loss flags (0/1). Lines
whose columns misalign are rejected one by one with a logged reason; the
rest still train.

Model inputs come from the corrupted tokens transformed by the actions.
A flagged word occupies exactly as many piece slots as its original token
so the cross-entropy labels align: `m` fills them with mask tokens, `r`
with a same-width word drawn from the training file's own vocabulary, and
`k` keeps the corrupted pieces. When a replacement of the right width
cannot be found, or kept pieces do not fit, the slots fall back to masks.
Loss applies exactly at flagged positions; everything else is ignored via
the -100 label convention. Batches with no flagged position are skipped,
so a file with zero flags is a no-op that touches no weights.

Runs are deterministic for a fixed seed: lines stay in file order and all
replacement draws come from one seeded generator.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import torch

from lm_service.model import ModelError

log = logging.getLogger(__name__)

ACTIONS = frozenset("mrkn")
IGNORE = -100
REPLACEMENT_DRAWS = 16


@dataclass(frozen=True)
class TrainingLine:
    originals: tuple[str, ...]
    corrupted: tuple[str, ...]
    actions: tuple[str, ...]
    flags: tuple[bool, ...]


@dataclass(frozen=True)
class Rejection:
    line_no: int
    reason: str


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 1
    batch_size: int = 32
    lr: float = 5e-5
    seed: int = 0
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.lr <= 0:
            raise ValueError("lr must be positive")


@dataclass
class FinetuneResult:
    losses: list[float] = field(default_factory=list)
    rejections: list[Rejection] = field(default_factory=list)
    checkpoints: list[str] = field(default_factory=list)
    n_lines: int = 0

    @property
    def steps(self) -> int:
        return len(self.losses)


def parse_line(line_no: int, line: str) -> TrainingLine:
    columns = line.rstrip("\n").split("\t")
    if len(columns) != 4:
        raise ValueError(f"expected 4 columns, found {len(columns)}")
    originals, corrupted, actions, flags = (c.split() for c in columns)
    counts = {len(originals), len(corrupted), len(actions), len(flags)}
    if counts == {0}:
        raise ValueError("empty line")
    if len(counts) != 1:
        raise ValueError(
            "columns misaligned: "
            f"{len(originals)}/{len(corrupted)}/{len(actions)}/{len(flags)} fields"
        )
    bad = sorted(set(actions) - ACTIONS)
    if bad:
        raise ValueError(f"unknown action codes {bad}")
    if not set(flags) <= {"0", "1"}:
        raise ValueError("loss flags must be 0 or 1")
    return TrainingLine(
        tuple(originals), tuple(corrupted), tuple(actions),
        tuple(f == "1" for f in flags),
    )


def parse_training_file(path: str) -> tuple[list[TrainingLine], list[Rejection]]:
    lines: list[TrainingLine] = []
    rejections: list[Rejection] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                lines.append(parse_line(line_no, raw))
            except ValueError as exc:
                rejections.append(Rejection(line_no, str(exc)))
                log.warning("line %d rejected: %s", line_no, exc)
    return lines, rejections


def _draw_replacement(
    rng: random.Random, vocab: Sequence[str], pieces, width: int, avoid: str
) -> list[int] | None:
    if not vocab:
        return None
    for _ in range(REPLACEMENT_DRAWS):
        word = vocab[rng.randrange(len(vocab))]
        ids = pieces(word)
        if word != avoid and len(ids) == width:
            return ids
    return None


def build_example(
    line: TrainingLine,
    tokenizer,
    rng: random.Random,
    vocab: Sequence[str],
) -> tuple[list[int], list[int]]:
    """Input ids and aligned labels for one line, specials included."""

    def pieces(word: str) -> list[int]:
        return tokenizer.convert_tokens_to_ids(tokenizer.tokenize(word))

    mask = tokenizer.mask_token_id
    ids: list[int] = [tokenizer.cls_token_id]
    labels: list[int] = [IGNORE]
    for original, corrupted, action, flagged in zip(
        line.originals, line.corrupted, line.actions, line.flags
    ):
        if flagged:
            target = pieces(original)
            if not target:
                raise ValueError(f"flagged word {original!r} tokenizes to nothing")
            width = len(target)
            if action == "m":
                slot = [mask] * width
            elif action == "r":
                slot = _draw_replacement(rng, vocab, pieces, width, corrupted)
                if slot is None:
                    slot = [mask] * width
            else:  # k, or a stray n: present the corrupted form
                slot = pieces(corrupted)
                if len(slot) != width:
                    slot = [mask] * width
            ids.extend(slot)
            labels.extend(target)
        else:
            slot = pieces(corrupted)
            if action == "m":
                slot = [mask] * max(1, len(slot))
            elif action == "r":
                drawn = _draw_replacement(
                    rng, vocab, pieces, len(slot), corrupted
                ) if slot else None
                if drawn is not None:
                    slot = drawn
            ids.extend(slot)
            labels.extend([IGNORE] * len(slot))
    ids.append(tokenizer.sep_token_id)
    labels.append(IGNORE)
    return ids, labels


def _batches(examples, batch_size: int, pad_id: int, device: str):
    for start in range(0, len(examples), batch_size):
        chunk = examples[start : start + batch_size]
        width = max(len(ids) for ids, _ in chunk)
        input_ids, labels, attention = [], [], []
        for ids, labs in chunk:
            pad = width - len(ids)
            input_ids.append(ids + [pad_id] * pad)
            labels.append(labs + [IGNORE] * pad)
            attention.append([1] * len(ids) + [0] * pad)
        yield (
            torch.tensor(input_ids, device=device),
            torch.tensor(attention, device=device),
            torch.tensor(labels, device=device),
        )


def finetune(
    model_path: str,
    train_path: str,
    out_dir: str,
    config: TrainConfig = TrainConfig(),
) -> FinetuneResult:
    """Fine-tune a fill-mask model on a training file; saves checkpoints.

    Writes one checkpoint directory per epoch plus `final` under out_dir
    and returns the per-step loss history alongside the rejection log.
    """
    from transformers import AutoModelForMaskedLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(model_path)
    if tokenizer.mask_token_id is None:
        raise ModelError(f"model {model_path!r} has no mask token")
    model = AutoModelForMaskedLM.from_pretrained(model_path)
    model.to(config.device)
    model.train()

    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)
    result = FinetuneResult()
    lines, result.rejections = parse_training_file(train_path)
    vocab = sorted({word for line in lines for word in line.originals})

    position_limit = getattr(model.config, "max_position_embeddings", None)
    examples: list[tuple[list[int], list[int]]] = []
    for line_no, line in enumerate(lines, start=1):
        try:
            ids, labels = build_example(line, tokenizer, rng, vocab)
            if position_limit is not None and len(ids) > position_limit:
                raise ValueError(
                    f"needs {len(ids)} positions, model allows {position_limit}"
                )
        except ValueError as exc:
            result.rejections.append(Rejection(line_no, str(exc)))
            log.warning("line %d rejected: %s", line_no, exc)
            continue
        examples.append((ids, labels))
    result.n_lines = len(examples)

    pad_id = tokenizer.pad_token_id
    if pad_id is None:
        pad_id = tokenizer.sep_token_id
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.lr)
    out = Path(out_dir)
    for epoch in range(1, config.epochs + 1):
        for input_ids, attention, labels in _batches(
            examples, config.batch_size, pad_id, config.device
        ):
            if not (labels != IGNORE).any():
                continue  # nothing to learn from; a step would only drift
            loss = model(
                input_ids=input_ids, attention_mask=attention, labels=labels
            ).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            result.losses.append(float(loss.detach()))
        checkpoint = out / f"checkpoint-{epoch}"
        model.save_pretrained(checkpoint)
        tokenizer.save_pretrained(checkpoint)
        result.checkpoints.append(str(checkpoint))

    final = out / "final"
    model.save_pretrained(final)
    tokenizer.save_pretrained(final)
    result.checkpoints.append(str(final))
    return result
