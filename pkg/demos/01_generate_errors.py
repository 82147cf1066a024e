"""Turn a clean Persian corpus into a labeled misspelling dataset.

Every line is corrupted at most once: a word is swapped for a keyboard
neighbor, an adjacent-letter transposition, or a homophone spelling. When the
broken form is still a dictionary word it is a real-word error (the hard
case); otherwise a non-real-word error. Half the lines are left untouched so
the evaluation also measures false alarms.

Run from the repository root:

    python3 demos/01_generate_errors.py
"""

import os

from spellbench.errorgen import (
    CorruptionConfig,
    build_dataset,
    load_letter_map,
    read_records,
)
from spellbench.lexicon import load_lexicon

DATA = os.path.join(os.path.dirname(__file__), "data")
OUT = os.path.join(os.path.dirname(__file__), "out")


def main() -> None:
    os.makedirs(OUT, exist_ok=True)
    lexicon = load_lexicon(os.path.join(DATA, "dictionary.tsv"))
    adj = load_letter_map(os.path.join(DATA, "adjacency.tsv"))
    hmap = load_letter_map(os.path.join(DATA, "homophones.tsv"))
    print(f"dictionary: {len(lexicon)} words")

    records_path = os.path.join(OUT, "records.tsv")
    config = CorruptionConfig(seed=7, repetitions=8)
    stats = build_dataset(
        os.path.join(DATA, "corpus.txt"), config, lexicon, adj, hmap, records_path
    )
    for label, count in stats.rows():
        print(f"  {label:24s} {count}")
    print(f"wrote {records_path}")

    # a few corrupted sentences next to what they originally said
    print("\nsamples:")
    shown = 0
    for record in read_records(records_path):
        if not record.has_error:
            continue
        print(f"  [{record.category}/{record.etype}]")
        print(f"    was : {' '.join(record.original_tokens())}")
        print(f"    now : {' '.join(record.corrupted_tokens)}")
        shown += 1
        if shown == 4:
            break

    # same seed, same bytes: the dataset is reproducible
    again = os.path.join(OUT, "records-again.tsv")
    build_dataset(os.path.join(DATA, "corpus.txt"), config, lexicon, adj, hmap, again)
    with open(records_path, "rb") as a, open(again, "rb") as b:
        assert a.read() == b.read()
    os.remove(again)
    print("\nrerun with the same seed produced identical bytes")


if __name__ == "__main__":
    main()
