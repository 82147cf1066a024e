"""Emit a masked-training file from a labeled error dataset.

Each sentence becomes one line with four aligned columns: original tokens,
corrupted tokens, an action per token, and a loss flag per token. The labeled
error word always trains (flag 1) and 15% of the clean words join it; every
training word is masked 80% of the time, swapped for a random dictionary word
10%, and kept as-is 10%. Actions: m=mask, r=random, k=keep, n=untouched.

    python3 demos/04_masking_plans.py
"""

import collections
import os

from spellbench.biasplan import (
    PlanConfig,
    build_masking_plans,
    emit_training_file,
)
from spellbench.errorgen import read_records
from spellbench.lexicon import load_lexicon

DATA = os.path.join(os.path.dirname(__file__), "data")
OUT = os.path.join(os.path.dirname(__file__), "out")


def main() -> None:
    records_path = os.path.join(OUT, "records.tsv")
    if not os.path.exists(records_path):
        import runpy

        runpy.run_path(
            os.path.join(os.path.dirname(__file__), "01_generate_errors.py"),
            run_name="__main__",
        )
    lexicon = load_lexicon(os.path.join(DATA, "dictionary.tsv"))
    records = read_records(records_path)
    config = PlanConfig(seed=11)
    plans = build_masking_plans(records, lexicon, config)

    training_path = os.path.join(OUT, "training.tsv")
    emit_training_file(records, plans, training_path)
    print(f"wrote {training_path} ({len(records)} lines)")

    actions = collections.Counter()
    flagged = total = 0
    for plan in plans:
        actions.update(plan.actions)
        flagged += sum(plan.loss_flags)
        total += len(plan.loss_flags)
    print(f"tokens: {total}, in training loss: {flagged}")
    for code, label in (("m", "masked"), ("r", "random"), ("k", "kept"), ("n", "untouched")):
        print(f"  {code} {label:10s} {actions[code]}")

    print("\nfirst two lines, column by column:")
    with open(training_path, encoding="utf-8") as fh:
        for _ in range(2):
            original, corrupted, acts, flags = fh.readline().rstrip("\n").split("\t")
            print(f"  original : {original}")
            print(f"  corrupted: {corrupted}")
            print(f"  actions  : {acts}")
            print(f"  loss     : {flags}")
            print()


if __name__ == "__main__":
    main()
