import itertools
import random

import pytest

from cskit.errors import EmptyReference
from cskit.langtok import LanguageTag, Token, expand_tokens, tokenize
from cskit.scoring import (
    EditAlignment,
    SystemSource,
    align_edit,
    cer,
    merge_wer_reports,
    morph_cs_wer,
    oracle_select,
    wer,
)


def brute_edit_distance(a, b, memo=None):
    """Exhaustive-recursion oracle, independent of the DP implementation."""
    if memo is None:
        memo = {}
    key = (a, b)
    if key in memo:
        return memo[key]
    if not a:
        value = len(b)
    elif not b:
        value = len(a)
    else:
        value = brute_edit_distance(a[1:], b[1:], memo) + (0 if a[0] == b[0] else 1)
        value = min(value, brute_edit_distance(a[1:], b, memo) + 1)
        value = min(value, brute_edit_distance(a, b[1:], memo) + 1)
    memo[key] = value
    return value


def en(*words):
    return [Token(w, LanguageTag.ENGLISH) for w in words]


def ar(*words):
    return [Token(w, LanguageTag.ARABIC) for w in words]


class TestAlignEdit:
    def test_identical(self):
        alignment = align_edit(en("A", "B"), en("A", "B"))
        assert alignment.cost == 0
        assert all(op.kind == "correct" for op in alignment.ops)

    def test_single_substitution(self):
        alignment = align_edit(en("A", "B", "C"), en("A", "X", "C"))
        assert alignment.cost == 1
        assert [op.kind for op in alignment.ops] == ["correct", "substitute", "correct"]

    def test_empty_sequences_allowed(self):
        assert align_edit([], []).cost == 0
        assert align_edit(en("A"), []).cost == 1
        assert align_edit([], en("A")).cost == 1

    def test_projections_reproduce_inputs(self):
        rng = random.Random(3)
        for _ in range(200):
            ref = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
            hyp = [rng.choice("abc") for _ in range(rng.randint(0, 8))]
            alignment = align_edit(ref, hyp)
            ref_side = [op.ref_index for op in alignment.ops if op.ref_index is not None]
            hyp_side = [op.hyp_index for op in alignment.ops if op.hyp_index is not None]
            assert ref_side == list(range(len(ref)))
            assert hyp_side == list(range(len(hyp)))
            assert alignment.cost == sum(1 for op in alignment.ops if op.kind != "correct")

    def test_matches_brute_force_small(self):
        memo = {}
        for la, lb in itertools.product(range(5), repeat=2):
            for a in itertools.product("ab", repeat=la):
                for b in itertools.product("ab", repeat=lb):
                    assert align_edit(a, b).cost == brute_edit_distance(a, b, memo)

    def test_cost_symmetry_swaps_del_ins(self):
        rng = random.Random(9)
        for _ in range(100):
            a = [rng.choice("abc") for _ in range(rng.randint(0, 7))]
            b = [rng.choice("abc") for _ in range(rng.randint(0, 7))]
            fwd = align_edit(a, b)
            bwd = align_edit(b, a)
            assert fwd.cost == bwd.cost
            f_counts = fwd.counts()
            b_counts = bwd.counts()
            assert f_counts[0] == b_counts[0]  # substitutions
            assert f_counts[1] == b_counts[2]  # deletions <-> insertions
            assert f_counts[2] == b_counts[1]

    def test_deterministic_tie_break(self):
        a1 = align_edit(en("A", "B"), en("B", "A"))
        a2 = align_edit(en("A", "B"), en("B", "A"))
        assert a1 == a2
        assert isinstance(a1, EditAlignment)


class TestWer:
    def test_all_correct(self):
        ref = ar("X", "Y") + en("Z")
        report = wer(ref, list(ref))
        assert report.wer == 0.0
        assert report.language(LanguageTag.ARABIC).wer == 0.0
        assert report.language(LanguageTag.ENGLISH).wer == 0.0

    def test_english_wer_can_exceed_one(self):
        report = wer(en("GOOD"), en("BAD", "WORSE"))
        lang = report.language(LanguageTag.ENGLISH)
        assert lang.n_sub == 1 and lang.n_ins == 1
        assert lang.wer == 2.0
        assert report.wer == 2.0

    def test_deletion_charged_to_reference_language(self):
        report = wer(ar("X") + en("Y"), ar("X"))
        assert report.language(LanguageTag.ARABIC).wer == 0.0
        assert report.language(LanguageTag.ENGLISH).wer == 1.0

    def test_insertion_charged_to_hypothesis_language(self):
        report = wer(ar("X"), ar("X") + en("NEW"))
        assert report.language(LanguageTag.ARABIC).wer == 0.0
        lang_en = report.language(LanguageTag.ENGLISH)
        assert lang_en.n_ins == 1 and lang_en.n_ref == 0
        assert lang_en.wer == float("inf")

    def test_counts_decompose_by_language(self):
        rng = random.Random(17)
        vocab_ar = ar("عن", "من", "هو")
        vocab_en = en("ONE", "TWO", "THREE")
        for _ in range(100):
            ref = [rng.choice(vocab_ar + vocab_en) for _ in range(rng.randint(1, 9))]
            hyp = [rng.choice(vocab_ar + vocab_en) for _ in range(rng.randint(0, 9))]
            report = wer(ref, hyp)
            assert sum(lw.n_sub + lw.n_del for lw in report.per_language.values()) == (
                report.n_sub + report.n_del
            )
            assert sum(lw.n_ins for lw in report.per_language.values()) == report.n_ins
            assert report.n_cor + report.n_sub + report.n_del == report.n_ref

    def test_empty_reference(self):
        with pytest.raises(EmptyReference):
            wer([], en("A"))

    def test_merge_reports(self):
        r1 = wer(en("A"), en("A"))
        r2 = wer(en("B"), en("X"))
        merged = merge_wer_reports([r1, r2])
        assert merged.n_ref == 2 and merged.n_sub == 1
        assert merged.wer == 0.5


class TestCer:
    def test_identical(self):
        assert cer("ABC", "ABC") == 0.0

    def test_one_of_three(self):
        assert cer("ABC", "ABD") == pytest.approx(1 / 3)

    def test_spaces_count_by_default(self):
        assert cer("A B", "AB") == pytest.approx(1 / 3)
        assert cer("A B", "AB", include_spaces=False) == 0.0

    def test_empty_reference(self):
        with pytest.raises(EmptyReference):
            cer("", "ABC")

    def test_matches_brute_force(self):
        rng = random.Random(4)
        memo = {}
        for _ in range(300):
            a = "".join(rng.choice("xyz") for _ in range(rng.randint(1, 8)))
            b = "".join(rng.choice("xyz") for _ in range(rng.randint(0, 8)))
            assert cer(a, b) == brute_edit_distance(a, b, memo) / len(a)


class TestOracleSelect:
    def test_lower_wer_wins(self):
        ref = en("A", "B", "C")
        hyp_a = en("A", "X", "Y")
        hyp_b = en("A", "B", "X")
        chosen, source = oracle_select(ref, hyp_a, hyp_b)
        assert source is SystemSource.B
        assert chosen == hyp_b

    def test_tie_prefers_a(self):
        ref = en("A", "B")
        hyp_a = en("A", "X")
        hyp_b = en("Y", "B")
        _, source = oracle_select(ref, hyp_a, hyp_b)
        assert source is SystemSource.A

    def test_corpus_oracle_bound(self):
        rng = random.Random(23)
        vocab = en("P", "Q", "R", "S")
        total_a = total_b = total_o = total_n = 0
        for _ in range(60):
            ref = [rng.choice(vocab) for _ in range(rng.randint(1, 8))]
            hyp_a = [t if rng.random() > 0.3 else en("WA")[0] for t in ref]
            hyp_b = [t if rng.random() > 0.3 else en("WB")[0] for t in ref]
            ea = wer(ref, hyp_a).errors
            eb = wer(ref, hyp_b).errors
            total_a += ea
            total_b += eb
            total_o += min(ea, eb)
            total_n += len(ref)
        assert total_o <= min(total_a, total_b)


MORPH = "ال+TASK#ات"


class TestMorphCsWer:
    def test_fully_correct(self):
        ref = expand_tokens(tokenize(MORPH))
        report = morph_cs_wer(ref, list(ref))
        assert not report.is_empty
        assert report.overall_rate == 0.0
        assert report.arabic_affix_rate == 0.0
        assert report.english_stem_rate == 0.0

    def test_suffix_deleted(self):
        ref = expand_tokens(tokenize(MORPH))
        hyp = ref[:2]  # drop the suffix token
        report = morph_cs_wer(ref, hyp)
        assert report.arabic_affix_rate == 0.5
        assert report.english_stem_rate == 0.0
        assert report.overall_rate == pytest.approx(1 / 3)

    def test_no_morph_tokens_is_empty_report(self):
        ref = expand_tokens(tokenize("انا DEEP"))
        report = morph_cs_wer(ref, list(ref))
        assert report.is_empty
        assert report.overall_rate == 0.0
