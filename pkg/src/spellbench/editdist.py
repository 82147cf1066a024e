"""Levenshtein distance and the adjacent-transposition predicate.

All distances operate on unicode scalar sequences, not bytes or grapheme
clusters. Standard unit-cost Levenshtein (insertion, deletion, substitution)
is the only distance used; a transposition is a separate predicate, never an
edit operation.
"""

from __future__ import annotations


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance between two strings."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(b) < len(a):
        a, b = b, a
    # two-row DP, rows indexed by prefixes of the shorter string
    prev = list(range(len(a) + 1))
    cur = [0] * (len(a) + 1)
    for j, cb in enumerate(b, start=1):
        cur[0] = j
        for i, ca in enumerate(a, start=1):
            cost = 0 if ca == cb else 1
            cur[i] = min(prev[i] + 1, cur[i - 1] + 1, prev[i - 1] + cost)
        prev, cur = cur, prev
    return prev[len(a)]


def is_adjacent_transposition(a: str, b: str) -> bool:
    """True iff b equals a with exactly one pair of adjacent letters swapped.

    Requires equal lengths, a != b, and exactly one crossed adjacent pair;
    every other position must agree.
    """
    if len(a) != len(b) or a == b:
        return False
    diffs = [i for i in range(len(a)) if a[i] != b[i]]
    if len(diffs) != 2:
        return False
    i, j = diffs
    return j == i + 1 and a[i] == b[j] and a[j] == b[i]


def within_distance(a: str, b: str, k: int) -> bool:
    """Equivalent to levenshtein(a, b) <= k, with early exit.

    Abandons the DP as soon as every cell of a row exceeds k, so the common
    reject case is cheap for small k.
    """
    if k < 0:
        return False
    if abs(len(a) - len(b)) > k:
        return False
    if a == b:
        return True
    if len(b) < len(a):
        a, b = b, a
    prev = list(range(len(a) + 1))
    for j, cb in enumerate(b, start=1):
        cur = [j] + [0] * len(a)
        for i, ca in enumerate(a, start=1):
            cost = 0 if ca == cb else 1
            cur[i] = min(prev[i] + 1, cur[i - 1] + 1, prev[i - 1] + cost)
        if min(cur) > k:
            return False
        prev = cur
    return prev[-1] <= k
