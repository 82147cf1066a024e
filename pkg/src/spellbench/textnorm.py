"""Unicode normalization, ZWNJ handling, tokenization, and corpus pruning.

Comparison everywhere in the package happens on NFC-normalized scalar values.
ZWNJ (U+200C) is the only zero-width character treated specially: it survives
tokenization (it is word-internal in Persian compounds) and can be stripped
globally for the normalization comparison mode.
"""

from __future__ import annotations

import enum
import functools
import unicodedata
from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from spellbench.lexicon import Lexicon

ZWNJ = "‌"

MIN_TOKENS = 5
MAX_TOKENS = 256

REASON_OOV = "oov"
REASON_TOO_SHORT = "too_short"
REASON_TOO_LONG = "too_long"


class ZwnjMode(enum.Enum):
    PRESERVE = "preserve"
    STRIP = "strip"


@dataclass(frozen=True)
class Sentence:
    """A tokenized line. `raw` keeps the original text, `tokens` the words."""

    tokens: tuple[str, ...]
    raw: str

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class PruneResult:
    """Outcome of prune_line: an accepted Sentence or a rejection reason."""

    sentence: Sentence | None
    reason: str | None

    @property
    def accepted(self) -> bool:
        return self.sentence is not None


def normalize_zwnj(text: str, mode: ZwnjMode) -> str:
    """Strip every U+200C (mode=strip, NFC output) or return text unchanged."""
    if mode is ZwnjMode.PRESERVE:
        return text
    return unicodedata.normalize("NFC", text.replace(ZWNJ, ""))


# Latin letters per the removal rules: Basic Latin plus the Latin-1 letter
# ranges. Other scripts are untouched.
_LATIN_RANGES = (
    (0x41, 0x5A),
    (0x61, 0x7A),
    (0xC0, 0xD6),
    (0xD8, 0xF6),
    (0xF8, 0xFF),
)


@functools.lru_cache(maxsize=8192)
def _removable(ch: str) -> bool:
    cp = ord(ch)
    for lo, hi in _LATIN_RANGES:
        if lo <= cp <= hi:
            return True
    # numerics N*, punctuation P*, symbols S*
    return unicodedata.category(ch)[0] in "NPS"


def tokenize(line: str) -> Sentence:
    """Split a line into word tokens.

    NFC-normalizes, deletes numerics, punctuation, symbols, and Latin
    letters, then splits on whitespace runs. ZWNJ survives inside tokens.
    """
    normalized = unicodedata.normalize("NFC", line)
    cleaned = "".join(ch for ch in normalized if not _removable(ch))
    return Sentence(tokens=tuple(cleaned.split()), raw=line)


def prune_line(line: str, lexicon: Lexicon) -> PruneResult:
    """Accept a line iff every token is in the lexicon and 5 <= count <= 256.

    Rejections carry a machine-readable reason: oov before the length checks.
    """
    sentence = tokenize(line)
    for token in sentence.tokens:
        if not lexicon.contains(token):
            return PruneResult(sentence=None, reason=REASON_OOV)
    n = len(sentence.tokens)
    if n < MIN_TOKENS:
        return PruneResult(sentence=None, reason=REASON_TOO_SHORT)
    if n > MAX_TOKENS:
        return PruneResult(sentence=None, reason=REASON_TOO_LONG)
    return PruneResult(sentence=sentence, reason=None)
