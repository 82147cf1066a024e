"""Shared synthetic-language fixtures.

The language is built so that every corruption branch is feasible in every
sentence, which makes Monte-Carlo branch frequencies directly comparable to
the configured probabilities:

    prefix families (body letters are in no letter relation):
      س+body / ص+body   both in lexicon, س~ص homophones  -> real homophone
      م+body / ن+body   both in lexicon, م~ن adjacent    -> real keyboard
      کت+body / تک+body both in lexicon                  -> real substitution
      ب+body            in lexicon, پ+body never         -> non-real keyboard
                        (its swaps are OOV)              -> non-real substitution
      ز+body            in lexicon, ذ+body never         -> non-real homophone

Every corpus line is one word from each of the five groups, so each line has
exactly 5 tokens, all in the lexicon.
"""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from spellbench.errorgen import LetterMap
from spellbench.lexicon import Lexicon

BODY_LETTERS = "دروهای"

ADJACENCY_LINES = ["م\tن", "ب\tپ"]
HOMOPHONE_LINES = ["س\tص", "ز\tذ"]


@dataclass(frozen=True)
class SynthLanguage:
    lexicon: Lexicon
    adj: LetterMap
    hmap: LetterMap
    words: tuple[str, ...]
    corpus_lines: tuple[str, ...]

    def dictionary_text(self) -> str:
        return "\n".join(self.words) + "\n"

    def corpus_text(self) -> str:
        return "\n".join(self.corpus_lines) + "\n"

    def adjacency_text(self) -> str:
        return "\n".join(ADJACENCY_LINES) + "\n"

    def homophone_text(self) -> str:
        return "\n".join(HOMOPHONE_LINES) + "\n"


def _symmetrized(pairs: list[str]) -> LetterMap:
    table: dict[str, tuple[str, ...]] = {}
    for line in pairs:
        a, b = line.split("\t")
        table[a] = (b,)
        table[b] = (a,)
    return LetterMap(table)


def build_language(
    n_rh: int = 24,
    n_rk: int = 24,
    n_rs: int = 24,
    n_nk: int = 12,
    n_nh: int = 12,
    n_lines: int = 400,
) -> SynthLanguage:
    bodies = [a + b for a in BODY_LETTERS for b in BODY_LETTERS]
    rh = bodies[:n_rh]
    rk = bodies[:n_rk]
    rs = bodies[:n_rs]
    nk = bodies[:n_nk]
    nh = bodies[:n_nh]

    words: set[str] = set()
    for body in rh:
        words.update({"س" + body, "ص" + body})
    for body in rk:
        words.update({"م" + body, "ن" + body})
    for body in rs:
        words.update({"کت" + body, "تک" + body})
    for body in nk:
        words.add("ب" + body)
    for body in nh:
        words.add("ز" + body)

    lines = []
    for i in range(n_lines):
        w1 = ("س" if i % 2 == 0 else "ص") + rh[i % n_rh]
        w2 = ("م" if (i // 2) % 2 == 0 else "ن") + rk[(i * 7 + 3) % n_rk]
        w3 = ("کت" if (i // 4) % 2 == 0 else "تک") + rs[(i * 5 + 1) % n_rs]
        w4 = "ب" + nk[(i * 3 + 2) % n_nk]
        w5 = "ز" + nh[(i * 11 + 5) % n_nh]
        lines.append(" ".join((w1, w2, w3, w4, w5)))

    return SynthLanguage(
        lexicon=Lexicon.from_words(sorted(words)),
        adj=_symmetrized(ADJACENCY_LINES),
        hmap=_symmetrized(HOMOPHONE_LINES),
        words=tuple(sorted(words)),
        corpus_lines=tuple(lines),
    )


@pytest.fixture(scope="session")
def lang() -> SynthLanguage:
    return build_language()


@dataclass(frozen=True)
class LanguageFiles:
    dictionary: str
    adjacency: str
    homophones: str
    corpus: str


def write_language(language: SynthLanguage, directory) -> LanguageFiles:
    d = directory / "dictionary.tsv"
    a = directory / "adjacency.tsv"
    h = directory / "homophones.tsv"
    c = directory / "corpus.txt"
    d.write_text(language.dictionary_text(), encoding="utf-8")
    a.write_text(language.adjacency_text(), encoding="utf-8")
    h.write_text(language.homophone_text(), encoding="utf-8")
    c.write_text(language.corpus_text(), encoding="utf-8")
    return LanguageFiles(str(d), str(a), str(h), str(c))


@pytest.fixture(scope="session")
def lang_files(lang, tmp_path_factory) -> LanguageFiles:
    return write_language(lang, tmp_path_factory.mktemp("lang"))
