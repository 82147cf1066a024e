"""Correct the misspelled dataset and score the result.

Out-of-dictionary words are replaced by the best-scoring dictionary word
within edit distance 2. In-dictionary words are only replaced when a
confusion-set alternative scores at least K under the context scorer, which
here is a bigram model trained on the same clean corpus.

Needs demos/out/records.tsv from 01_generate_errors.py (runs it if missing).

    python3 demos/02_correct_and_evaluate.py
"""

import os

from spellbench.confusion import build_confusion_index
from spellbench.corrector import CorrectorConfig, correct_record
from spellbench.errorgen import load_letter_map, read_records
from spellbench.evaluation import build_report, report_json
from spellbench.lexicon import load_lexicon
from spellbench.scorer import NgramScorer
from spellbench.textnorm import tokenize

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
    adj = load_letter_map(os.path.join(DATA, "adjacency.tsv"))
    hmap = load_letter_map(os.path.join(DATA, "homophones.tsv"))
    confusion = build_confusion_index(lexicon, adj, hmap)

    with open(os.path.join(DATA, "corpus.txt"), encoding="utf-8") as fh:
        scorer = NgramScorer.train(
            [s.tokens for s in map(tokenize, fh) if s.tokens]
        )

    config = CorrectorConfig(threshold_k=1e-5)
    records = read_records(records_path)
    joined = []
    for record in records:
        index, suggestion = correct_record(record, lexicon, confusion, scorer, config)
        joined.append((record, index, suggestion))

    report = build_report(joined, None, {"scorer": "bigram", "threshold": 1e-5})
    print(f"{len(records)} records")
    overall = report.overall
    print(f"counts: tp={overall.tp} tn={overall.tn} fp={overall.fp} fn={overall.fn}")
    for name in ("accuracy", "precision", "recall", "f1"):
        micro = report.micro.get(name)
        macro = report.macro.get(name)
        fmt = lambda v: "n/a" if v is None else f"{v:.3f}"
        print(f"  {name:10s} micro {fmt(micro)}   macro {fmt(macro)}")

    # one corrected error and one miss, if present
    def show(pred, title):
        record, index, s = pred
        print(f"\n{title}")
        print(f"  sentence : {' '.join(record.corrupted_tokens)}")
        print(f"  position {index}: {s.original} -> {s.replacement} ({s.action}, {s.reason})")
        if record.has_error:
            print(f"  truth    : {record.original_word}")

    hit = next(
        (j for j in joined if j[0].has_error and j[2].replacement == j[0].original_word),
        None,
    )
    miss = next(
        (j for j in joined if j[0].has_error and j[2].replacement != j[0].original_word),
        None,
    )
    if hit:
        show(hit, "a corrected error:")
    if miss:
        show(miss, "a miss:")

    report_path = os.path.join(OUT, "report.json")
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report_json(report) + "\n")
    print(f"\nfull report: {report_path}")


if __name__ == "__main__":
    main()
