"""Trade precision against recall by sweeping the replacement threshold K.

A real-word replacement only happens when the best confusion-set candidate
scores at least K. Lowering K makes the corrector bolder: every sentence it
replaced at a higher K it still replaces at a lower one, so recall can only
go up while precision usually pays for it. Sentences are scored once and
re-thresholded, which is exactly equivalent to rerunning the pipeline.

    python3 demos/03_threshold_sweep.py
"""

import os

from spellbench.confusion import build_confusion_index
from spellbench.corrector import CorrectorConfig
from spellbench.errorgen import load_letter_map, read_records
from spellbench.evaluation import threshold_sweep, write_pr_csv
from spellbench.lexicon import load_lexicon
from spellbench.scorer import NgramScorer
from spellbench.textnorm import tokenize

DATA = os.path.join(os.path.dirname(__file__), "data")
OUT = os.path.join(os.path.dirname(__file__), "out")

# The bigram scorer normalizes over each confusion set, and most sets here
# hold a single rival, so scores cluster near 0.5 and 1.0; the grid has to
# straddle that range for K to bite at all.
GRID = (0.99, 0.9, 0.7, 0.4, 0.1)


def main() -> None:
    records_path = os.path.join(OUT, "records.tsv")
    if not os.path.exists(records_path):
        import runpy

        runpy.run_path(
            os.path.join(os.path.dirname(__file__), "01_generate_errors.py"),
            run_name="__main__",
        )
    lexicon = load_lexicon(os.path.join(DATA, "dictionary.tsv"))
    adj = load_letter_map(os.path.join(DATA, "adjacency.tsv"))
    hmap = load_letter_map(os.path.join(DATA, "homophones.tsv"))
    confusion = build_confusion_index(lexicon, adj, hmap)
    with open(os.path.join(DATA, "corpus.txt"), encoding="utf-8") as fh:
        scorer = NgramScorer.train([s.tokens for s in map(tokenize, fh) if s.tokens])

    records = read_records(records_path)
    points = threshold_sweep(
        records, lexicon, confusion, scorer, CorrectorConfig(), GRID
    )

    fmt = lambda v: "  n/a" if v is None else f"{v:.3f}"
    print(f"{'K':>8s}  {'precision':>9s}  {'recall':>6s}  {'f1':>6s}  replaced")
    for point in points:
        m = point.metric_set
        print(
            f"{point.threshold:>8.2f}  {fmt(m.precision):>9s}  {fmt(m.recall):>6s}"
            f"  {fmt(m.f1):>6s}  {len(point.replaced_ids)}"
        )

    # bolder settings strictly contain the cautious ones
    for cautious, bold in zip(points, points[1:]):
        assert cautious.replaced_ids <= bold.replaced_ids

    csv_path = os.path.join(OUT, "pr_curve.csv")
    write_pr_csv(points, csv_path)
    print(f"\nwrote {csv_path}")


if __name__ == "__main__":
    main()
