"""Spelling-error benchmark toolkit.

Generates labeled misspelling corpora (keyboard, adjacent-swap, and homophone
errors, split into real-word and non-real-word categories), corrects them with
edit-distance candidate generation plus a pluggable masked-word scorer, and
evaluates the results with per-type confusion counts, micro/macro metrics,
threshold sweeps, and a ZWNJ-normalization comparison.
"""

__version__ = "0.1.0"
