"""Precomputed real-word confusion index.

For every lexicon word, the in-lexicon words reachable by one adjacent swap,
one keyboard-neighbor substitution, or one homophone substitution. The letter
relations are symmetric and transposition is its own inverse, so membership
is symmetric by construction. Sets are ordered by ascending Levenshtein
distance to the key, then lexicographically, so downstream tie-breaking is
reproducible.
"""

from __future__ import annotations

import struct
import unicodedata
from dataclasses import dataclass

from spellbench.editdist import levenshtein
from spellbench.errorgen import (
    LetterMap,
    homophone_variants,
    keyboard_variants,
    swap_variants,
)
from spellbench.lexicon import Lexicon

_MAGIC = b"SPBCONF\x00"
_VERSION = 1


class ConfusionFormatError(Exception):
    """Raised when a serialized index cannot be parsed."""


@dataclass(frozen=True)
class ConfusionIndex:
    table: dict[str, tuple[str, ...]]

    def confusion_set(self, word: str) -> tuple[str, ...]:
        return self.table.get(unicodedata.normalize("NFC", word), ())

    def __len__(self) -> int:
        return len(self.table)


def build_confusion_index(lexicon: Lexicon, adj: LetterMap, hmap: LetterMap) -> ConfusionIndex:
    table: dict[str, tuple[str, ...]] = {}
    for word in lexicon:
        variants = (
            swap_variants(word)
            | keyboard_variants(word, adj)
            | homophone_variants(word, hmap)
        )
        hits = [v for v in variants if v != word and v in lexicon.words]
        hits.sort(key=lambda v: (levenshtein(v, word), v))
        table[word] = tuple(hits)
    return ConfusionIndex(table)


def dump_tsv(index: ConfusionIndex, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word in sorted(index.table):
            fh.write(f"{word}\t{','.join(index.table[word])}\n")


def load_tsv(path: str) -> ConfusionIndex:
    table: dict[str, tuple[str, ...]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ConfusionFormatError(f"{path}:{lineno}: expected `word<TAB>c1,c2,...`")
            word, joined = parts
            table[word] = tuple(c for c in joined.split(",") if c)
    return ConfusionIndex(table)


def dump_binary(index: ConfusionIndex, path: str) -> None:
    payload = "\n".join(
        f"{word}\t{','.join(index.table[word])}" for word in sorted(index.table)
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack(">HI", _VERSION, len(payload)))
        fh.write(payload)


def load_binary(path: str) -> ConfusionIndex:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[: len(_MAGIC)] != _MAGIC:
        raise ConfusionFormatError(f"{path}: bad magic header")
    header_end = len(_MAGIC) + 6
    version, size = struct.unpack(">HI", blob[len(_MAGIC) : header_end])
    if version != _VERSION:
        raise ConfusionFormatError(f"{path}: unsupported format version {version}")
    payload = blob[header_end : header_end + size]
    if len(payload) != size:
        raise ConfusionFormatError(f"{path}: truncated payload")
    table: dict[str, tuple[str, ...]] = {}
    text = payload.decode("utf-8")
    if text:
        for entry in text.split("\n"):
            word, _, joined = entry.partition("\t")
            table[word] = tuple(c for c in joined.split(",") if c)
    return ConfusionIndex(table)
