import hashlib

import numpy as np
import pytest

from spellbench.biasplan import (
    ACTION_KEEP,
    ACTION_MASK,
    ACTION_NONE,
    ACTION_RANDOM,
    ACTIONS,
    MaskingPlan,
    PlanConfig,
    build_masking_plan,
    build_masking_plans,
    emit_training_file,
    format_training_line,
    plan_rng,
)
from spellbench.errorgen import ErrorRecord, unchanged_record
from spellbench.lexicon import Lexicon


def make_error_record(tokens, error_index, original_word):
    return ErrorRecord(
        sentence_id=7,
        corrupted_tokens=tuple(tokens),
        error_index=error_index,
        original_word=original_word,
        corrupted_word=tokens[error_index],
        category="real",
        etype="keyboard",
    )


@pytest.fixture(scope="module")
def small_lexicon():
    return Lexicon.from_words(["دست", "دوست", "درست", "راست", "رست"])


class TestPlanConfig:
    def test_defaults(self):
        cfg = PlanConfig()
        assert cfg.p_select == 0.15
        assert (cfg.p_mask, cfg.p_random, cfg.p_keep) == (0.80, 0.10, 0.10)

    def test_rejects_bad_select(self):
        with pytest.raises(ValueError):
            PlanConfig(p_select=1.5)

    def test_rejects_non_normalized_actions(self):
        with pytest.raises(ValueError):
            PlanConfig(p_mask=0.7, p_random=0.1, p_keep=0.1)


class TestPlanStructure:
    def test_columns_align(self, small_lexicon):
        rec = unchanged_record(1, ("دست", "دوست", "درست", "راست", "رست"))
        plan = build_masking_plan(rec, small_lexicon, plan_rng(0, 1))
        assert len(plan.actions) == len(rec.corrupted_tokens)
        assert len(plan.loss_flags) == len(rec.corrupted_tokens)
        assert len(plan.replacements) == len(rec.corrupted_tokens)
        assert all(a in ACTIONS for a in plan.actions)

    def test_misaligned_plan_rejected(self):
        with pytest.raises(ValueError):
            MaskingPlan(("m", "n"), (True,), (None, None))

    def test_none_implies_no_loss(self, small_lexicon):
        for seed in range(50):
            rec = unchanged_record(seed, ("دست", "دوست", "درست", "راست", "رست"))
            plan = build_masking_plan(rec, small_lexicon, plan_rng(0, seed))
            for action, flag in zip(plan.actions, plan.loss_flags):
                if action == ACTION_NONE:
                    assert not flag
                else:
                    assert flag

    def test_replacement_only_for_random(self, small_lexicon):
        for seed in range(200):
            rec = unchanged_record(seed, ("دست", "دوست", "درست", "راست", "رست"))
            plan = build_masking_plan(rec, small_lexicon, plan_rng(3, seed))
            for token, action, repl in zip(
                rec.corrupted_tokens, plan.actions, plan.replacements
            ):
                if action == ACTION_RANDOM:
                    assert repl is not None
                    assert repl != token
                    assert small_lexicon.contains(repl)
                else:
                    assert repl is None


class TestErrorWordRule:
    def test_error_position_always_loss(self, small_lexicon):
        rec = make_error_record(
            ("دست", "دوست", "خرست", "راست", "رست"), 2, "درست"
        )
        for seed in range(100):
            plan = build_masking_plan(rec, small_lexicon, plan_rng(seed, 7))
            assert plan.loss_flags[2]
            assert plan.actions[2] != ACTION_NONE

    def test_error_word_sees_full_action_split(self, small_lexicon):
        # excluded from the 15% gate, so all three actions appear quickly
        rec = make_error_record(
            ("دست", "دوست", "خرست", "راست", "رست"), 2, "درست"
        )
        seen = set()
        for seed in range(300):
            plan = build_masking_plan(rec, small_lexicon, plan_rng(seed, 7))
            seen.add(plan.actions[2])
        assert seen == {ACTION_MASK, ACTION_RANDOM, ACTION_KEEP}

    def test_no_selection_seed_gives_all_none(self, small_lexicon):
        rec = unchanged_record(11, ("دست", "دوست", "درست"))
        for seed in range(50):
            plan = build_masking_plan(rec, small_lexicon, plan_rng(seed, 11))
            if all(a == ACTION_NONE for a in plan.actions):
                assert not any(plan.loss_flags)
                assert all(r is None for r in plan.replacements)
                return
        pytest.fail("no seed in range produced an all-none plan")


class TestFrequencies:
    def test_selection_and_action_split(self, small_lexicon):
        # one long no-error record, per-word draws: 0.15 +- 0.003 selected,
        # actions 0.80/0.10/0.10 +- 0.01 within selected
        n = 1_000_000
        rec = unchanged_record(0, ("دست",) * n)
        plan = build_masking_plan(rec, small_lexicon, plan_rng(0, 0))
        counts = {a: 0 for a in ACTIONS}
        for a in plan.actions:
            counts[a] += 1
        selected = n - counts[ACTION_NONE]
        assert abs(selected / n - 0.15) < 0.003
        assert abs(counts[ACTION_MASK] / selected - 0.80) < 0.01
        assert abs(counts[ACTION_RANDOM] / selected - 0.10) < 0.01
        assert abs(counts[ACTION_KEEP] / selected - 0.10) < 0.01

    def test_replacements_roughly_uniform(self, small_lexicon):
        rec = unchanged_record(0, ("دست",) * 200_000)
        plan = build_masking_plan(
            rec, small_lexicon, plan_rng(1, 0), PlanConfig(p_select=1.0)
        )
        hits = {w: 0 for w in small_lexicon.word_list if w != "دست"}
        total = 0
        for repl in plan.replacements:
            if repl is not None:
                hits[repl] += 1
                total += 1
        assert total > 0
        for count in hits.values():
            assert abs(count / total - 1 / len(hits)) < 0.01


class TestTrainingFile:
    def test_line_format(self, small_lexicon):
        rec = make_error_record(("دست", "خرست", "راست"), 1, "درست")
        plan = MaskingPlan(
            ("n", "m", "r"), (False, True, True), (None, None, "دوست")
        )
        line = format_training_line(rec, plan)
        cols = line.split("\t")
        assert len(cols) == 4
        assert cols[0] == "دست درست راست"
        assert cols[1] == "دست خرست راست"
        assert cols[2] == "n m r"
        assert cols[3] == "0 1 1"

    def test_misaligned_line_rejected(self, small_lexicon):
        rec = make_error_record(("دست", "خرست", "راست"), 1, "درست")
        plan = MaskingPlan(("n", "m"), (False, True), (None, None))
        with pytest.raises(ValueError):
            format_training_line(rec, plan)

    def test_one_line_per_record(self, small_lexicon, tmp_path):
        records = [
            unchanged_record(i, ("دست", "دوست", "درست", "راست", "رست"))
            for i in range(100)
        ]
        plans = build_masking_plans(records, small_lexicon)
        path = tmp_path / "train.tsv"
        emit_training_file(records, plans, str(path))
        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 100
        for line in lines:
            cols = line.split("\t")
            assert len(cols) == 4
            widths = {len(col.split(" ")) for col in cols}
            assert widths == {5}

    def test_rerun_digest_identical(self, small_lexicon, tmp_path):
        records = [
            ErrorRecord(
                sentence_id=i,
                corrupted_tokens=("دست", "خرست", "راست", "رست", "دوست"),
                error_index=1,
                original_word="درست",
                corrupted_word="خرست",
                category="real",
                etype="keyboard",
            )
            for i in range(50)
        ]
        digests = []
        for name in ("a.tsv", "b.tsv"):
            plans = build_masking_plans(records, small_lexicon, PlanConfig(seed=9))
            path = tmp_path / name
            emit_training_file(records, plans, str(path))
            digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
        assert digests[0] == digests[1]

    def test_plan_count_mismatch_rejected(self, small_lexicon, tmp_path):
        records = [unchanged_record(0, ("دست", "دوست", "درست"))]
        with pytest.raises(ValueError):
            emit_training_file(records, [], str(tmp_path / "x.tsv"))


class TestDeterminism:
    def test_same_substream_same_plan(self, small_lexicon):
        rec = make_error_record(("دست", "خرست", "راست", "رست"), 1, "درست")
        a = build_masking_plan(rec, small_lexicon, plan_rng(4, 7))
        b = build_masking_plan(rec, small_lexicon, plan_rng(4, 7))
        assert a == b

    def test_different_records_different_streams(self, small_lexicon):
        # sentence_id feeds the substream, so long identical sentences diverge
        toks = ("دست",) * 200
        plans = build_masking_plans(
            [unchanged_record(0, toks), unchanged_record(1, toks)], small_lexicon
        )
        assert plans[0] != plans[1]
