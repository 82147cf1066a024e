"""Tests for lexicon loading and candidate queries."""

from __future__ import annotations

import random
import unicodedata

import pytest

from spellbench.editdist import is_adjacent_transposition, levenshtein
from spellbench.lexicon import Lexicon, LexiconError, load_lexicon


def test_load_deduplicates(tmp_path):
    p = tmp_path / "dict.txt"
    p.write_text("cat\ndog\ncat\n", encoding="utf-8")
    lex = load_lexicon(str(p))
    assert len(lex) == 2
    assert lex.contains("cat") and lex.contains("dog")


def test_load_empty_file(tmp_path):
    p = tmp_path / "dict.txt"
    p.write_text("", encoding="utf-8")
    assert len(load_lexicon(str(p))) == 0


def test_load_frequencies_and_comments(tmp_path):
    p = tmp_path / "dict.txt"
    p.write_text("# a comment\ncat\t3\ndog\n\ncat\t2\n", encoding="utf-8")
    lex = load_lexicon(str(p))
    assert lex.frequency("cat") == 5  # duplicates merged by summing
    assert lex.frequency("dog") == 1
    assert lex.frequency("absent") == 0


def test_load_bad_frequency(tmp_path):
    p = tmp_path / "dict.txt"
    p.write_text("cat\tlots\n", encoding="utf-8")
    with pytest.raises(LexiconError) as exc:
        load_lexicon(str(p))
    assert "dict.txt:1" in str(exc.value)


def test_load_missing_file(tmp_path):
    with pytest.raises(LexiconError) as exc:
        load_lexicon(str(tmp_path / "nope.txt"))
    assert "nope.txt" in str(exc.value)


def test_load_invalid_utf8_names_byte_offset(tmp_path):
    p = tmp_path / "dict.txt"
    p.write_bytes(b"cat\n\xff\xfe\n")
    with pytest.raises(LexiconError) as exc:
        load_lexicon(str(p))
    assert "byte offset 4" in str(exc.value)


def test_load_roundtrip_10000_words(tmp_path):
    rng = random.Random(3)
    words = {
        "".join(rng.choice("ابپتثجچ") for _ in range(rng.randint(2, 8)))
        for _ in range(10_000)
    }
    p = tmp_path / "dict.txt"
    p.write_text("\n".join(sorted(words)) + "\n", encoding="utf-8")
    lex = load_lexicon(str(p))
    assert len(lex) == len(words)
    assert all(lex.contains(w) for w in words)


def test_contains_is_nfc_invariant():
    decomposed = "آ"  # composes to U+0622
    composed = unicodedata.normalize("NFC", decomposed)
    lex = Lexicon.from_words([decomposed])
    assert lex.contains(composed)
    assert lex.contains(decomposed)


def test_contains_basic():
    lex = Lexicon.from_words(["cat", "dog"])
    assert lex.contains("cat")
    assert not lex.contains("cta")


def test_alphabet_is_union_of_letters():
    lex = Lexicon.from_words(["ab", "bc"])
    assert lex.alphabet == frozenset("abc")


def test_candidates_distance1_examples():
    lex = Lexicon.from_words(["cat", "cot", "act", "dog"])
    assert lex.candidates_distance1("cta") == set()
    lex2 = Lexicon.from_words(["cat", "cot", "coat"])
    assert lex2.candidates_distance1("cot") == {"cat", "coat"}
    assert Lexicon.from_words([]).candidates_distance1("x") == set()


def test_candidates_distance1_excludes_query_itself():
    lex = Lexicon.from_words(["cat", "cot"])
    assert lex.candidates_distance1("cat") == {"cot"}


def test_candidates_adjacent_swap_examples():
    lex = Lexicon.from_words(["cat", "cot", "act", "dog"])
    assert lex.candidates_adjacent_swap("cta") == {"cat"}
    lex2 = Lexicon.from_words(["aab", "aba"])
    assert lex2.candidates_adjacent_swap("aab") == {"aba"}
    lex3 = Lexicon.from_words(["ba"])
    assert lex3.candidates_adjacent_swap("ab") == {"ba"}


def test_candidate_queries_match_brute_force():
    rng = random.Random(9)
    alphabet = "ابپتث"
    words = sorted(
        {
            "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 6)))
            for _ in range(800)
        }
    )
    lex = Lexicon.from_words(words)
    queries = [rng.choice(words) for _ in range(60)] + [
        "".join(rng.choice(alphabet) for _ in range(rng.randint(1, 7)))
        for _ in range(60)
    ]
    for q in queries:
        expected_d1 = {w for w in words if levenshtein(w, q) == 1}
        assert lex.candidates_distance1(q) == expected_d1
        expected_swap = {w for w in words if is_adjacent_transposition(q, w)}
        assert lex.candidates_adjacent_swap(q) == expected_swap


def test_swap_candidates_satisfy_predicates():
    rng = random.Random(13)
    alphabet = "ابپت"
    words = {
        "".join(rng.choice(alphabet) for _ in range(rng.randint(2, 5)))
        for _ in range(200)
    }
    lex = Lexicon.from_words(words)
    for q in list(words)[:80]:
        for cand in lex.candidates_adjacent_swap(q):
            assert is_adjacent_transposition(q, cand)
            assert levenshtein(q, cand) <= 2
