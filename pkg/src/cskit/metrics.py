"""Code-switching statistics: CMI, switch counts, corpus-level reports.

The Code-Mixing Index of a sentence with per-language word counts w_i,
n total words and u language-independent words is

    CMI = (sum(w_i) - max(w_i)) / (n - u)

0 for monolingual sentences, 0.5 for a balanced bilingual sentence.
All operations expect expanded tokens (no MorphCS compounds), so that
an Arabic affix attached to an English stem counts as separate tokens.
"""

from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

from .errors import EmptyCorpus, EmptySentence
from .langtok import LanguageTag, classify_affix, expand_tokens, load_affix_inventory

LEXICAL_TAGS = (LanguageTag.ARABIC, LanguageTag.ENGLISH)


class SentenceType(Enum):
    MONOLINGUAL_ARABIC = "monolingual_arabic"
    MONOLINGUAL_ENGLISH = "monolingual_english"
    CODE_MIXED = "code_mixed"
    EMPTY = "empty"


@dataclass(frozen=True)
class CmiValue:
    value: float
    n: int
    u: int
    per_language_counts: dict


def _check_expanded(tokens):
    if any(t.tag is LanguageTag.MORPH_CS for t in tokens):
        raise ValueError("tokens must be expanded first (MorphCS compound found)")


def cmi(tokens) -> CmiValue:
    """Code-Mixing Index of one expanded token list.

    Returns 0 by convention when every token is language-independent.
    Raises EmptySentence on an empty token list.
    """
    if not tokens:
        raise EmptySentence("cannot compute CMI of an empty sentence")
    _check_expanded(tokens)
    counts = Counter(t.tag for t in tokens)
    n = len(tokens)
    u = counts.get(LanguageTag.LANG_INDEPENDENT, 0)
    lang_counts = {tag: counts.get(tag, 0) for tag in LEXICAL_TAGS}
    if n - u == 0:
        value = 0.0
    else:
        value = (sum(lang_counts.values()) - max(lang_counts.values())) / (n - u)
    return CmiValue(value, n, u, lang_counts)


def classify_sentence(tokens) -> SentenceType:
    """Code-mixed iff both Arabic and English tokens are present;
    language-independent tokens are ignored for the classification."""
    _check_expanded(tokens)
    counts = Counter(t.tag for t in tokens)
    has_ar = counts.get(LanguageTag.ARABIC, 0) > 0
    has_en = counts.get(LanguageTag.ENGLISH, 0) > 0
    if has_ar and has_en:
        return SentenceType.CODE_MIXED
    if has_ar:
        return SentenceType.MONOLINGUAL_ARABIC
    if has_en:
        return SentenceType.MONOLINGUAL_ENGLISH
    return SentenceType.EMPTY


def switch_counts(tokens):
    """(arabic->english, english->arabic) switch point counts.

    Language-independent tokens are transparent: they are skipped when
    testing adjacency, so [Ar, LangIndep, En] contains one Ar->En switch.
    """
    _check_expanded(tokens)
    tags = [t.tag for t in tokens if t.tag in LEXICAL_TAGS]
    ar_to_en = 0
    en_to_ar = 0
    for prev, cur in zip(tags, tags[1:]):
        if prev is LanguageTag.ARABIC and cur is LanguageTag.ENGLISH:
            ar_to_en += 1
        elif prev is LanguageTag.ENGLISH and cur is LanguageTag.ARABIC:
            en_to_ar += 1
    return ar_to_en, en_to_ar


@dataclass
class CorpusCsReport:
    n_sentences: int = 0
    pct_monolingual_arabic: float = 0.0
    pct_monolingual_english: float = 0.0
    pct_cs_sentences: float = 0.0
    pct_empty_sentences: float = 0.0
    pct_tokens_per_language: dict = field(default_factory=dict)
    avg_switches_ar_to_en: float = 0.0
    avg_switches_en_to_ar: float = 0.0
    pct_cs_start_arabic: float = 0.0
    pct_sentences_with_morph_cs: float = 0.0
    morph_cs_word_count: int = 0
    affix_frequency_table: Counter = field(default_factory=Counter)
    corpus_cmi: float = 0.0
    cs_sentence_cmi: float = 0.0

    def kv_lines(self):
        lines = [f"n_sentences={self.n_sentences}"]
        for name in (
            "pct_monolingual_arabic",
            "pct_monolingual_english",
            "pct_cs_sentences",
            "pct_empty_sentences",
        ):
            lines.append(f"{name}={getattr(self, name):.1f}")
        for tag in LanguageTag:
            if tag in self.pct_tokens_per_language:
                lines.append(f"pct_tokens_{tag.value}={self.pct_tokens_per_language[tag]:.1f}")
        lines.append(f"avg_switches_ar_to_en={self.avg_switches_ar_to_en:.2f}")
        lines.append(f"avg_switches_en_to_ar={self.avg_switches_en_to_ar:.2f}")
        lines.append(f"pct_cs_start_arabic={self.pct_cs_start_arabic:.1f}")
        lines.append(f"pct_sentences_with_morph_cs={self.pct_sentences_with_morph_cs:.1f}")
        lines.append(f"morph_cs_word_count={self.morph_cs_word_count}")
        lines.append(f"corpus_cmi={self.corpus_cmi:.4f}")
        lines.append(f"cs_sentence_cmi={self.cs_sentence_cmi:.4f}")
        for (cls, affix), count in sorted(
            self.affix_frequency_table.items(), key=lambda kv: (-kv[1], kv[0])
        ):
            lines.append(f"affix_{cls}_{affix}={count}")
        return lines

    def table_lines(self):
        rows = [
            ("Sentences", f"{self.n_sentences}"),
            ("Monolingual Arabic sentences (%)", f"{self.pct_monolingual_arabic:.1f}"),
            ("Monolingual English sentences (%)", f"{self.pct_monolingual_english:.1f}"),
            ("Code-switched sentences (%)", f"{self.pct_cs_sentences:.1f}"),
            ("Empty sentences (%)", f"{self.pct_empty_sentences:.1f}"),
        ]
        for tag in LanguageTag:
            if tag in self.pct_tokens_per_language:
                rows.append(
                    (f"Tokens {tag.value} (%)", f"{self.pct_tokens_per_language[tag]:.1f}")
                )
        rows += [
            ("Avg switches Ar->En per CS sentence", f"{self.avg_switches_ar_to_en:.2f}"),
            ("Avg switches En->Ar per CS sentence", f"{self.avg_switches_en_to_ar:.2f}"),
            ("CS sentences starting in Arabic (%)", f"{self.pct_cs_start_arabic:.1f}"),
            ("Sentences with morphological CS (%)", f"{self.pct_sentences_with_morph_cs:.1f}"),
            ("Morphological CS words", f"{self.morph_cs_word_count}"),
            ("Corpus CMI", f"{self.corpus_cmi:.4f}"),
            ("CS-sentence CMI", f"{self.cs_sentence_cmi:.4f}"),
        ]
        width = max(len(name) for name, _ in rows)
        return [f"{name:<{width}}  {value:>8}" for name, value in rows]


def corpus_report(corpus, inventory=None, cmi_mode: str = "sentence_mean") -> CorpusCsReport:
    """Aggregate code-switching statistics over a list of Utterances.

    ``cmi_mode`` selects the corpus aggregation: 'sentence_mean' (default,
    unweighted mean of sentence CMIs) or 'token_weighted' (weighted by each
    sentence's lexical token count).  Sentences whose lexical tokens are
    all language-independent are excluded from the CMI averages.
    """
    if not corpus:
        raise EmptyCorpus("corpus_report needs at least one utterance")
    if cmi_mode not in ("sentence_mean", "token_weighted"):
        raise ValueError(f"unknown cmi_mode {cmi_mode!r}")
    if inventory is None:
        inventory = load_affix_inventory()

    n = len(corpus)
    type_counts = Counter()
    token_counts = Counter()
    switch_totals = [0, 0]
    cs_start_ar = 0
    sentences_with_morph = 0
    morph_words = 0
    affix_table = Counter()
    cmi_weighted_sum = 0.0
    cmi_weight = 0.0
    cs_cmi_sum = 0.0
    cs_count = 0

    for utt in corpus:
        raw_tokens = list(utt.tokens)
        morph = [t for t in raw_tokens if t.tag is LanguageTag.MORPH_CS]
        if morph:
            sentences_with_morph += 1
            morph_words += len(morph)
            for tok in morph:
                dec = tok.decomposition
                pair = (
                    inventory.circumfix_pair(dec.prefix, dec.suffix)
                    if dec.prefix and dec.suffix
                    else None
                )
                if pair is not None:
                    affix_table[(pair.affix_class, pair.form)] += 1
                    continue
                if dec.prefix:
                    affix_table[(classify_affix(dec.prefix, inventory, "prefix"), dec.prefix)] += 1
                if dec.suffix:
                    affix_table[(classify_affix(dec.suffix, inventory, "suffix"), dec.suffix)] += 1

        tokens = expand_tokens(raw_tokens)
        for tok in tokens:
            token_counts[tok.tag] += 1
        stype = classify_sentence(tokens) if tokens else SentenceType.EMPTY
        type_counts[stype] += 1

        if tokens:
            value = cmi(tokens)
            if value.n - value.u > 0:
                weight = 1.0 if cmi_mode == "sentence_mean" else float(value.n - value.u)
                cmi_weighted_sum += value.value * weight
                cmi_weight += weight
            if stype is SentenceType.CODE_MIXED:
                cs_count += 1
                cs_cmi_sum += value.value
                a2e, e2a = switch_counts(tokens)
                switch_totals[0] += a2e
                switch_totals[1] += e2a
                lexical = [t for t in tokens if t.tag in LEXICAL_TAGS]
                if lexical and lexical[0].tag is LanguageTag.ARABIC:
                    cs_start_ar += 1

    total_tokens = sum(token_counts.values())
    report = CorpusCsReport(
        n_sentences=n,
        pct_monolingual_arabic=100.0 * type_counts[SentenceType.MONOLINGUAL_ARABIC] / n,
        pct_monolingual_english=100.0 * type_counts[SentenceType.MONOLINGUAL_ENGLISH] / n,
        pct_cs_sentences=100.0 * type_counts[SentenceType.CODE_MIXED] / n,
        pct_empty_sentences=100.0 * type_counts[SentenceType.EMPTY] / n,
        pct_tokens_per_language={
            tag: 100.0 * count / total_tokens for tag, count in token_counts.items()
        }
        if total_tokens
        else {},
        avg_switches_ar_to_en=switch_totals[0] / cs_count if cs_count else 0.0,
        avg_switches_en_to_ar=switch_totals[1] / cs_count if cs_count else 0.0,
        pct_cs_start_arabic=100.0 * cs_start_ar / cs_count if cs_count else 0.0,
        pct_sentences_with_morph_cs=100.0 * sentences_with_morph / n,
        morph_cs_word_count=morph_words,
        affix_frequency_table=affix_table,
        corpus_cmi=cmi_weighted_sum / cmi_weight if cmi_weight else 0.0,
        cs_sentence_cmi=cs_cmi_sum / cs_count if cs_count else 0.0,
    )
    return report
