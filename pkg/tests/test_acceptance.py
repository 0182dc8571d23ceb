"""Acceptance suite: one test per criterion, each printing a PASS line.

The criteria are property-based plus fixture-exact; absolute corpus
error rates from real ASR systems are out of scope by design.
"""

import itertools
import math
import random
import time

import numpy as np
import pytest

from cskit import combine, fixtures, metrics, nbest, scoring
from cskit.aligner import LinkSet, decode, one_to_one, train, train_bidirectional
from cskit.combine import (
    BorrowPolicy,
    HYBRID_TO_E2E,
    ConfidenceVector,
    borrow_words,
    espnet_confidence,
    kaldi_confidence,
    select_by_confidence,
    train_selector,
)
from cskit.langtok import LanguageTag, Token, expand_tokens, tokenize
from cskit.metrics import cmi
from cskit.nbest import Hypothesis, NBestList
from cskit.scoring import SystemSource, align_edit, cer, merge_wer_reports, wer
from cskit.textnorm import normalize_text

AR_TOKEN = Token("عن", LanguageTag.ARABIC)
EN_TOKEN = Token("WORD", LanguageTag.ENGLISH)
LI_TOKEN = Token("2015", LanguageTag.LANG_INDEPENDENT)


def _passed(num, name):
    print(f"ACCEPTANCE {num:02d} {name}: PASS")


def _tokens(tags):
    return [{"a": AR_TOKEN, "e": EN_TOKEN, "u": LI_TOKEN}[t] for t in tags]


def test_01_cmi_exactness():
    start = time.monotonic()
    assert cmi(_tokens("aaaaa")).value == 0.0
    assert cmi(_tokens("aaaeee")).value == 0.5
    rng = random.Random(101)
    swap = {"a": "e", "e": "a", "u": "u"}
    for _ in range(1000):
        tags = "".join(rng.choice("aeu") for _ in range(rng.randint(1, 20)))
        value = cmi(_tokens(tags)).value
        assert 0.0 <= value <= 0.5
        assert value == cmi(_tokens(swap[t] for t in tags)).value
    elapsed = time.monotonic() - start
    assert elapsed < 1.0, f"took {elapsed:.2f}s"
    _passed(1, "CMI exactness and label-swap invariance")


def test_02_edit_distance_oracle_equivalence():
    start = time.monotonic()
    seqs = [
        "".join(p)
        for length in range(7)
        for p in itertools.product("abc", repeat=length)
    ]
    assert len(seqs) == 1093

    # independent oracle: memoized exhaustive recursion over suffix pairs
    memo = {}

    def brute(a, b):
        key = (a, b)
        value = memo.get(key)
        if value is not None:
            return value
        if not a:
            value = len(b)
        elif not b:
            value = len(a)
        else:
            value = brute(a[1:], b[1:]) + (0 if a[0] == b[0] else 1)
            d = brute(a[1:], b) + 1
            if d < value:
                value = d
            i = brute(a, b[1:]) + 1
            if i < value:
                value = i
        memo[key] = value
        return value

    align_fn = align_edit
    cer_fn = cer
    for a in seqs:
        len_a = len(a)
        for b in seqs:
            expected = brute(a, b)
            assert align_fn(a, b).cost == expected
            if len_a:
                assert cer_fn(a, b) == expected / len_a
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"took {elapsed:.2f}s"
    _passed(2, f"edit-distance equals brute force on all {len(seqs)**2} pairs")


def test_03_language_wer_attribution():
    report = wer(
        [Token("GOOD", LanguageTag.ENGLISH)],
        [Token("BAD", LanguageTag.ENGLISH), Token("WORSE", LanguageTag.ENGLISH)],
    )
    english = report.language(LanguageTag.ENGLISH)
    assert english.n_ref == 1 and english.n_sub == 1 and english.n_ins == 1
    assert english.wer == 2.0
    _passed(3, "English WER reaches 200% via insertion attribution")


def _nbest_lists(fixture):
    lists_a = {}
    lists_b = {}
    grouped_a = {}
    grouped_b = {}
    for utt_id, rank, am, lm, text in fixture.nbest_a:
        grouped_a.setdefault(utt_id, []).append(
            Hypothesis(utt_id, rank, text, tuple(tokenize(text)), score_am=am, score_lm=lm)
        )
    for utt_id, rank, score, text in fixture.nbest_b:
        grouped_b.setdefault(utt_id, []).append(
            Hypothesis(utt_id, rank, text, tuple(tokenize(text)), score_single=score)
        )
    for utt_id, hyps in grouped_a.items():
        lists_a[utt_id] = NBestList(utt_id, "A", tuple(sorted(hyps, key=lambda h: h.rank)))
    for utt_id, hyps in grouped_b.items():
        lists_b[utt_id] = NBestList(utt_id, "B", tuple(sorted(hyps, key=lambda h: h.rank)))
    return lists_a, lists_b


def test_04_oracle_bound_on_random_fixtures():
    start = time.monotonic()
    rng = random.Random(404)
    for trial in range(100):
        spec = fixtures.FixtureSpec(
            n_sentences=12,
            cs_ratio=rng.uniform(0.3, 0.9),
            p_a=rng.uniform(0.05, 0.5),
            p_b=rng.uniform(0.05, 0.5),
            q_a=rng.uniform(0.0, 0.15),
            q_b=rng.uniform(0.0, 0.15),
            score_noise=rng.uniform(0.0, 0.4),
            nbest_size=3,
            seed=trial,
        )
        fixture = fixtures.generate(spec)
        lists_a, lists_b = _nbest_lists(fixture)
        refs = {u: tuple(tokenize(t)) for u, t in fixture.refs}

        total = {"a": 0, "b": 0, "oracle": 0, "selection": 0, "n": 0}
        for utt_id, ref in refs.items():
            ref = expand_tokens(ref)
            errs_a = wer(ref, expand_tokens(lists_a[utt_id].one_best.tokens)).errors
            errs_b = wer(ref, expand_tokens(lists_b[utt_id].one_best.tokens)).errors
            conf_a = kaldi_confidence(lists_a[utt_id])
            conf_b = espnet_confidence(lists_b[utt_id])
            _, source = select_by_confidence(conf_a, conf_b, None, None)
            total["a"] += errs_a
            total["b"] += errs_b
            total["oracle"] += min(errs_a, errs_b)
            total["selection"] += errs_a if source is SystemSource.A else errs_b
            total["n"] += len(ref)
        assert total["oracle"] <= min(total["a"], total["b"])
        assert total["selection"] >= total["oracle"]
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"took {elapsed:.2f}s"
    _passed(4, "oracle lower-bounds both systems and confidence selection, 100 fixtures")


def _e2e(scores):
    return NBestList(
        "u",
        "B",
        tuple(
            Hypothesis("u", r, "T", (Token("T", LanguageTag.ENGLISH),), score_single=s)
            for r, s in enumerate(scores, 1)
        ),
    )


def _hybrid(rows):
    return NBestList(
        "u",
        "A",
        tuple(
            Hypothesis("u", r, "T", (Token("T", LanguageTag.ENGLISH),), score_am=am, score_lm=lm)
            for r, (am, lm) in enumerate(rows, 1)
        ),
    )


def test_05_confidence_score_equations():
    rng = random.Random(55)
    for _ in range(200):
        scores = [rng.uniform(-40, 10) for _ in range(rng.randint(1, 20))]
        conf = espnet_confidence(_e2e(scores))
        assert abs(sum(conf.probs) - 1.0) <= 1e-9
        shifted = espnet_confidence(_e2e([s + 13.25 for s in scores]))
        assert shifted.best_index == conf.best_index

        rows = [(rng.uniform(0, 80), rng.uniform(0, 12)) for _ in range(rng.randint(1, 20))]
        kconf = kaldi_confidence(_hybrid(rows))
        assert abs(sum(kconf.probs) - 1.0) <= 1e-9
        kshift = kaldi_confidence(_hybrid([(am + 16.0, lm + 2.0) for am, lm in rows]))
        assert kshift.best_index == kconf.best_index

    # hand-computed combined scores for a 3-hypothesis list with w = 8:
    # k_i = -lm_i - am_i/8 over (am, lm) in (16,2) (24,3) (40,5)
    conf = kaldi_confidence(_hybrid([(16.0, 2.0), (24.0, 3.0), (40.0, 5.0)]), lm_weight=8.0)
    assert conf.raw == (-4.0, -6.0, -10.0)
    denom = 1.0 + math.exp(-2.0) + math.exp(-6.0)
    expected = (1.0 / denom, math.exp(-2.0) / denom, math.exp(-6.0) / denom)
    for p, q in zip(conf.probs, expected):
        assert abs(p - q) <= 1e-9
    _passed(5, "confidence vectors normalized, shift-invariant, hand-checked")


def test_06_discriminant_classifier():
    rng = np.random.default_rng(606)
    x_a = rng.normal(0.0, 0.4, size=(80, 6))
    x_b = rng.normal(3.0, 0.4, size=(80, 6))
    features = np.vstack([x_a, x_b])
    labels = ["A"] * 80 + ["B"] * 80
    model = train_selector(features, labels)
    assert all(model.predict(x) == l for x, l in zip(features, labels))

    features = rng.normal(size=(1000, 6))
    labels = ["A" if rng.random() < 0.55 else "B" for _ in range(1000)]
    model = train_selector(features, labels)
    accuracy = np.mean([model.predict(x) == l for x, l in zip(features, labels)])
    majority = max(labels.count("A"), labels.count("B")) / 1000
    assert abs(accuracy - majority) <= 0.05

    # selections invariant under a joint invertible affine feature transform
    base = rng.normal(size=(300, 6))
    labels = ["A" if row[1] - row[4] > 0 else "B" for row in base]
    matrix = rng.normal(size=(6, 6)) + 5.0 * np.eye(6)
    moved = base @ matrix.T + rng.normal(size=6)
    m1 = train_selector(base, labels)
    m2 = train_selector(moved, labels)
    assert all(m1.predict(x) == m2.predict(z) for x, z in zip(base, moved))
    _passed(6, "discriminant classifier separable/majority/affine checks")


def test_07_aligner():
    start = time.monotonic()
    rng = random.Random(707)
    vocab = [f"w{i}" for i in range(60)]
    pairs = []
    for _ in range(1000):
        sent = [rng.choice(vocab) for _ in range(rng.randint(4, 9))]
        pairs.append((list(sent), list(sent)))
    model = train(pairs, iterations=5)
    for before, after in zip(model.log_likelihoods, model.log_likelihoods[1:]):
        assert after >= before - 1e-9
    for src, tgt in pairs[:50]:
        links = decode(model, src, tgt)
        assert links.links == frozenset((i, i) for i in range(len(src)))
    both = train_bidirectional(pairs[:100])
    for src, tgt in pairs[:20]:
        assert both.links(src, tgt).is_one_to_one()
    for _ in range(300):
        fwd = LinkSet(frozenset(
            (rng.randrange(8), rng.randrange(8)) for _ in range(rng.randint(0, 16))
        ))
        bwd = LinkSet(frozenset(
            (rng.randrange(8), rng.randrange(8)) for _ in range(rng.randint(0, 16))
        ))
        assert one_to_one(fwd, bwd).is_one_to_one()
    elapsed = time.monotonic() - start
    assert elapsed < 10.0, f"took {elapsed:.2f}s"
    _passed(7, "aligner EM monotone, identity links, injective symmetrization")


def test_08_hybrid_combination_on_committed_fixture(fixture200_dir):
    start = time.monotonic()
    refs = nbest.load_references(fixture200_dir / "refs.tsv")
    lists_a = nbest.load_nbest(fixture200_dir / "nbest_a.tsv", nbest.HYBRID, "A")
    lists_b = nbest.load_nbest(fixture200_dir / "nbest_b.tsv", nbest.E2E, "B")
    lexicon = nbest.load_lexicon(fixture200_dir / "lexicon.txt")
    freq = nbest.load_frequency_table(fixture200_dir / "freq.tsv")
    expected = dict(
        line.split("=", 1)
        for line in (fixture200_dir / "expected.kv").read_text("utf-8").splitlines()
    )

    def corpus(hyps):
        return merge_wer_reports(
            wer(expand_tokens(refs[u].tokens), expand_tokens(hyps[u]))
            for u in sorted(refs)
        )

    report_a = corpus({u: lists_a[u].one_best.tokens for u in lists_a})
    report_b = corpus({u: lists_b[u].one_best.tokens for u in lists_b})

    # measured error rates must match the generator's independent edit count
    assert report_a.errors == int(expected["errors_a"])
    assert report_b.errors == int(expected["errors_b"])
    assert report_a.n_ref == int(expected["total_ref"])
    assert report_a.wer == float(expected["wer_a"])
    assert report_b.wer == float(expected["wer_b"])

    oracle_errors = 0
    for u in sorted(refs):
        ref = expand_tokens(refs[u].tokens)
        ea = wer(ref, expand_tokens(lists_a[u].one_best.tokens)).errors
        eb = wer(ref, expand_tokens(lists_b[u].one_best.tokens)).errors
        oracle_errors += min(ea, eb)
    assert oracle_errors == int(expected["oracle_errors"])
    oracle_wer = oracle_errors / report_a.n_ref

    results = combine.hybrid_combine(lists_a, lists_b, lexicon, freq)
    hybrid = corpus({u: r.tokens for u, r in results.items()})
    assert hybrid.wer < report_a.wer
    assert hybrid.wer < report_b.wer
    assert hybrid.wer >= oracle_wer
    elapsed = time.monotonic() - start
    assert elapsed < 30.0, f"took {elapsed:.2f}s"
    _passed(
        8,
        f"hybrid {100 * hybrid.wer:.1f}% in [oracle {100 * oracle_wer:.1f}%, "
        f"best single {100 * min(report_a.wer, report_b.wer):.1f}%)",
    )


def test_09_selection_plus_borrowing_micro_example():
    # one utterance where the weaker-scored system has one wrong English
    # word; selection keeps the better hypothesis (score 0.43 over 0.20)
    # and word borrowing repairs the remaining substitution to WER 0.
    ref = tokenize("هو STANDARDS GOOD عن")
    hyp_a = tokenize("هو STANDARDS BAD قق")  # hybrid: 2 errors
    hyp_b = tokenize("هو STUDENTS GOOD عن")  # e2e: 1 error

    conf_a = ConfidenceVector((0.20,) + (0.8 / 19,) * 19, (0.0,) * 20)
    conf_b = ConfidenceVector((0.43,) + (0.57 / 19,) * 19, (0.0,) * 20)
    chosen, source = select_by_confidence(conf_a, conf_b, hyp_a, hyp_b)
    assert source is SystemSource.B
    assert wer(ref, chosen).wer == pytest.approx(0.25)

    links = LinkSet(frozenset({(1, 1)}))  # STUDENTS <-> STANDARDS
    lexicon = nbest.Lexicon(frozenset({"STANDARDS"}), 1)
    freq = nbest.FrequencyTable({"STANDARDS": 40})
    merged, replacements = borrow_words(
        chosen, hyp_a, links, lexicon, freq, BorrowPolicy(), HYBRID_TO_E2E
    )
    assert replacements == [(1, "STUDENTS", "STANDARDS")]
    assert wer(ref, merged).wer == 0.0
    _passed(9, "score 0.43 beats 0.20, borrowed word reaches WER 0.0")


def test_10_normalization_idempotence_and_oov():
    rng = random.Random(1010)
    arabic = "ابتجدرسعفقلمنهويىأإآ"
    other = "ABCdefXYZ .,!?،؟[]0123"
    for _ in range(1000):
        text = "".join(rng.choice(arabic + other + "  ") for _ in range(rng.randint(0, 50)))
        once = normalize_text(text)
        assert normalize_text(once) == once

    # normalizing corpus and lexicon together never increases the OOV rate
    from cskit.nbest import Lexicon, oov_rate
    from cskit.textnorm import normalize_lexicon_keys

    words = ["أحمد", "احمد", "deep", "DEEP",
             "في", "فى", "model", "TASK"]
    for _ in range(200):
        lexicon_words = set(rng.sample(words, rng.randint(1, len(words))))
        corpus = [rng.choice(words) for _ in range(rng.randint(1, 30))]

        raw_lex = Lexicon(frozenset(lexicon_words), len(lexicon_words))
        raw_tokens = [Token(w, LanguageTag.ARABIC) for w in corpus]
        raw_rate = oov_rate(raw_tokens, raw_lex)

        norm_words, _ = normalize_lexicon_keys(lexicon_words)
        norm_lex = Lexicon(frozenset(norm_words), len(lexicon_words))
        norm_tokens = [Token(normalize_text(w), LanguageTag.ARABIC) for w in corpus]
        norm_rate = oov_rate(norm_tokens, norm_lex)
        assert norm_rate <= raw_rate
    _passed(10, "normalization idempotent; OOV never increases after normalization")
