"""Dictionary storage, membership tests, and fast candidate queries.

The distance-1 index is a deletion-neighborhood scheme: every word is keyed
by itself and by each of its single-character deletions. Two strings within
one edit of each other always share such a key, so a query inspects only the
words behind its own keys and verifies each with the exact distance. The
scheme is an optimization only; answers are defined by brute-force
Levenshtein filtering and tested against it.
"""

from __future__ import annotations

import unicodedata
from typing import Iterable, Iterator

from spellbench.editdist import levenshtein


class LexiconError(Exception):
    """Raised when a dictionary file cannot be read or parsed."""


def _nfc(s: str) -> str:
    return unicodedata.normalize("NFC", s)


class Lexicon:
    """Immutable word set with frequencies and a distance-1 candidate index."""

    __slots__ = ("words", "frequencies", "alphabet", "_word_list", "_dist1_index")

    def __init__(self, entries: Iterable[tuple[str, int]]):
        frequencies: dict[str, int] = {}
        for word, freq in entries:
            word = _nfc(word)
            if not word:
                continue
            frequencies[word] = frequencies.get(word, 0) + freq
        self.frequencies = frequencies
        self.words = frozenset(frequencies)
        self.alphabet = frozenset(ch for w in self.words for ch in w)
        self._word_list = tuple(sorted(self.words))
        index: dict[str, list[int]] = {}
        for wid, w in enumerate(self._word_list):
            for key in _deletion_keys(w):
                index.setdefault(key, []).append(wid)
        self._dist1_index = index

    @classmethod
    def from_words(cls, words: Iterable[str]) -> Lexicon:
        return cls((w, 1) for w in words)

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self) -> Iterator[str]:
        return iter(self._word_list)

    @property
    def word_list(self) -> tuple[str, ...]:
        """All words, sorted, for indexed access (e.g. uniform sampling)."""
        return self._word_list

    def contains(self, word: str) -> bool:
        return _nfc(word) in self.words

    def frequency(self, word: str) -> int:
        return self.frequencies.get(_nfc(word), 0)

    def candidates_distance1(self, word: str) -> set[str]:
        """Exactly the lexicon words at Levenshtein distance 1 from `word`."""
        query = _nfc(word)
        seen: set[int] = set()
        for key in _deletion_keys(query):
            ids = self._dist1_index.get(key)
            if ids:
                seen.update(ids)
        out: set[str] = set()
        for wid in seen:
            w = self._word_list[wid]
            if levenshtein(w, query) == 1:
                out.add(w)
        return out

    def candidates_adjacent_swap(self, word: str) -> set[str]:
        """Lexicon words reachable from `word` by one adjacent transposition."""
        query = _nfc(word)
        out: set[str] = set()
        for i in range(len(query) - 1):
            if query[i] != query[i + 1]:
                v = query[: i] + query[i + 1] + query[i] + query[i + 2 :]
                if v in self.words:
                    out.add(v)
        return out


def _deletion_keys(word: str) -> set[str]:
    keys = {word}
    for i in range(len(word)):
        keys.add(word[: i] + word[i + 1 :])
    return keys


def load_lexicon(path: str) -> Lexicon:
    """Load a dictionary file: one `word` or `word<TAB>frequency` per line.

    Lines starting with `#` and blank lines are skipped; duplicate words are
    merged by summing frequencies (absent frequencies count as 1).
    """
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise LexiconError(f"cannot read dictionary file {path}: {exc}") from exc
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise LexiconError(
            f"{path}: invalid UTF-8 at byte offset {exc.start}"
        ) from exc

    def entries() -> Iterator[tuple[str, int]]:
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) == 1:
                yield parts[0], 1
            elif len(parts) == 2:
                try:
                    freq = int(parts[1])
                except ValueError:
                    raise LexiconError(
                        f"{path}:{lineno}: frequency is not an integer: {parts[1]!r}"
                    ) from None
                if freq < 0:
                    raise LexiconError(f"{path}:{lineno}: negative frequency")
                yield parts[0], freq
            else:
                raise LexiconError(f"{path}:{lineno}: expected `word` or `word<TAB>frequency`")

    return Lexicon(entries())


def dump_lexicon(lexicon: Lexicon, path: str) -> None:
    """Write the normalized dictionary as sorted `word<TAB>frequency` lines."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for word in lexicon.word_list:
            fh.write(f"{word}\t{lexicon.frequencies[word]}\n")
