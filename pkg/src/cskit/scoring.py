"""Edit-distance alignment and error rates for code-switched ASR output.

WER = (S + D + I) / N over reference tokens; it exceeds 100% when the
hypothesis inserts more than it gets right.  Language-specific WER charges
substitutions and deletions to the REFERENCE token's language and
insertions to the HYPOTHESIS token's language - the only attribution under
which a language's WER can exceed 100% the way over-generating systems do.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

from .errors import EmptyReference
from .langtok import LanguageTag, Token


class SystemSource(Enum):
    A = "A"
    B = "B"


class EditOp(NamedTuple):
    kind: str  # "correct" | "substitute" | "delete" | "insert"
    ref_index: int | None
    hyp_index: int | None


class EditAlignment(NamedTuple):
    """Ordered edit operations turning the reference into the hypothesis.

    Projecting the reference side of ``ops`` reproduces the reference,
    projecting the hypothesis side reproduces the hypothesis, and ``cost``
    (the number of non-correct ops) is minimal for unit costs.
    """

    ops: tuple
    cost: int

    def counts(self):
        s = d = i = c = 0
        for op in self.ops:
            if op.kind == "correct":
                c += 1
            elif op.kind == "substitute":
                s += 1
            elif op.kind == "delete":
                d += 1
            else:
                i += 1
        return s, d, i, c


def _surfaces(seq):
    if isinstance(seq, str):
        return seq
    return [t.surface if isinstance(t, Token) else t for t in seq]


def _edit_cost(rs, hs) -> int:
    """Two-row Levenshtein distance with unit costs (cost only, no ops)."""
    m = len(hs)
    prev = list(range(m + 1))
    cur = [0] * (m + 1)
    for i, r in enumerate(rs, 1):
        cur[0] = i
        for j in range(1, m + 1):
            if r == hs[j - 1]:
                cur[j] = prev[j - 1]
            else:
                a = prev[j - 1]
                b = prev[j]
                c = cur[j - 1]
                best = a if a < b else b
                if c < best:
                    best = c
                cur[j] = best + 1
        prev, cur = cur, prev
    return prev[m]


def align_edit(ref, hyp) -> EditAlignment:
    """Minimal-cost edit alignment between two token sequences.

    Parameters
    ----------
    ref, hyp : sequences of Token (or plain strings)
        Both already normalized and expanded.

    Returns
    -------
    EditAlignment
        Deterministic: when costs tie during the backward scan from the
        DP-table corner, Correct is preferred over Substitute over Delete
        over Insert.
    """
    rs = _surfaces(ref)
    hs = _surfaces(hyp)
    n, m = len(rs), len(hs)
    dp = [list(range(m + 1))]
    for i in range(1, n + 1):
        r = rs[i - 1]
        prev = dp[i - 1]
        cur = [i] + [0] * m
        for j in range(1, m + 1):
            if r == hs[j - 1]:
                cur[j] = prev[j - 1]
            else:
                a = prev[j - 1]
                b = prev[j]
                c = cur[j - 1]
                best = a if a < b else b
                if c < best:
                    best = c
                cur[j] = best + 1
        dp.append(cur)

    ops = []
    i, j = n, m
    while i > 0 or j > 0:
        cost = dp[i][j]
        if i > 0 and j > 0 and rs[i - 1] == hs[j - 1] and dp[i - 1][j - 1] == cost:
            ops.append(EditOp("correct", i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and j > 0 and dp[i - 1][j - 1] + 1 == cost:
            ops.append(EditOp("substitute", i - 1, j - 1))
            i -= 1
            j -= 1
        elif i > 0 and dp[i - 1][j] + 1 == cost:
            ops.append(EditOp("delete", i - 1, None))
            i -= 1
        else:
            ops.append(EditOp("insert", None, j - 1))
            j -= 1
    ops.reverse()
    return EditAlignment(tuple(ops), dp[n][m])


@dataclass
class LanguageWer:
    n_ref: int = 0
    n_sub: int = 0
    n_del: int = 0
    n_ins: int = 0

    @property
    def errors(self):
        return self.n_sub + self.n_del + self.n_ins

    @property
    def wer(self):
        if self.n_ref == 0:
            return float("inf") if self.errors else 0.0
        return self.errors / self.n_ref


@dataclass
class WerReport:
    n_ref: int = 0
    n_sub: int = 0
    n_del: int = 0
    n_ins: int = 0
    n_cor: int = 0
    per_language: dict = field(default_factory=dict)

    @property
    def errors(self):
        return self.n_sub + self.n_del + self.n_ins

    @property
    def wer(self):
        if self.n_ref == 0:
            raise EmptyReference("WER undefined for an empty reference")
        return self.errors / self.n_ref

    def language(self, tag) -> LanguageWer:
        return self.per_language.get(tag, LanguageWer())

    def add(self, other: "WerReport"):
        self.n_ref += other.n_ref
        self.n_sub += other.n_sub
        self.n_del += other.n_del
        self.n_ins += other.n_ins
        self.n_cor += other.n_cor
        for tag, lw in other.per_language.items():
            mine = self.per_language.setdefault(tag, LanguageWer())
            mine.n_ref += lw.n_ref
            mine.n_sub += lw.n_sub
            mine.n_del += lw.n_del
            mine.n_ins += lw.n_ins
        return self

    def kv_lines(self):
        lines = [
            f"n_ref={self.n_ref}",
            f"substitutions={self.n_sub}",
            f"deletions={self.n_del}",
            f"insertions={self.n_ins}",
            f"correct={self.n_cor}",
            f"overall_wer={self.wer:.6f}",
            f"overall_wer_pct={100.0 * self.wer:.1f}",
        ]
        for tag in LanguageTag:
            if tag in self.per_language:
                lw = self.per_language[tag]
                lines.append(f"{tag.value}_n_ref={lw.n_ref}")
                lines.append(f"{tag.value}_wer={lw.wer:.6f}")
                lines.append(f"{tag.value}_wer_pct={100.0 * lw.wer:.1f}")
        return lines

    def table_lines(self):
        header = f"{'':<18}{'N':>8}{'Sub':>7}{'Del':>7}{'Ins':>7}{'WER%':>9}"
        lines = [header]
        lines.append(
            f"{'overall':<18}{self.n_ref:>8}{self.n_sub:>7}{self.n_del:>7}"
            f"{self.n_ins:>7}{100.0 * self.wer:>9.1f}"
        )
        for tag in LanguageTag:
            if tag in self.per_language:
                lw = self.per_language[tag]
                pct = 100.0 * lw.wer
                pct_str = f"{pct:>9.1f}" if pct != float("inf") else f"{'inf':>9}"
                lines.append(
                    f"{tag.value:<18}{lw.n_ref:>8}{lw.n_sub:>7}{lw.n_del:>7}"
                    f"{lw.n_ins:>7}{pct_str}"
                )
        return lines


def wer(ref, hyp, alignment: EditAlignment | None = None) -> WerReport:
    """Word error rate of one hypothesis against one reference.

    Parameters
    ----------
    ref, hyp : lists of Token
        Expanded, normalized token sequences.
    alignment : EditAlignment, optional
        Reuse a precomputed alignment instead of aligning again.

    Returns
    -------
    WerReport
        Overall counts plus per-language attribution: substitutions and
        deletions charged to the reference token's language, insertions to
        the hypothesis token's language; each language's denominator is its
        reference token count.
    """
    if not ref:
        raise EmptyReference("empty reference")
    if alignment is None:
        alignment = align_edit(ref, hyp)
    report = WerReport()
    report.n_ref = len(ref)
    for tok in ref:
        report.per_language.setdefault(tok.tag, LanguageWer()).n_ref += 1
    for op in alignment.ops:
        if op.kind == "correct":
            report.n_cor += 1
        elif op.kind == "substitute":
            report.n_sub += 1
            report.per_language.setdefault(ref[op.ref_index].tag, LanguageWer()).n_sub += 1
        elif op.kind == "delete":
            report.n_del += 1
            report.per_language.setdefault(ref[op.ref_index].tag, LanguageWer()).n_del += 1
        else:
            report.n_ins += 1
            report.per_language.setdefault(hyp[op.hyp_index].tag, LanguageWer()).n_ins += 1
    return report


def merge_wer_reports(reports) -> WerReport:
    total = WerReport()
    for report in reports:
        total.add(report)
    return total


def cer_counts(ref: str, hyp: str, include_spaces: bool = True):
    """(character edit distance, reference character count) for corpus sums."""
    ref = " ".join(ref.split())
    hyp = " ".join(hyp.split())
    if not include_spaces:
        ref = ref.replace(" ", "")
        hyp = hyp.replace(" ", "")
    if not ref:
        raise EmptyReference("empty reference string")
    return _edit_cost(ref, hyp), len(ref)


def cer(ref: str, hyp: str, include_spaces: bool = True) -> float:
    """Character error rate between two normalized strings.

    Inter-token whitespace is collapsed to single spaces, which count as
    characters unless ``include_spaces`` is False.
    """
    distance, n_chars = cer_counts(ref, hyp, include_spaces)
    return distance / n_chars


def oracle_select(ref, hyp_a, hyp_b):
    """Pick the hypothesis with strictly lower WER; ties go to system A.

    Returns (chosen token list, SystemSource).
    """
    wer_a = wer(ref, hyp_a).wer
    wer_b = wer(ref, hyp_b).wer
    if wer_b < wer_a:
        return hyp_b, SystemSource.B
    return hyp_a, SystemSource.A


@dataclass
class MorphCsReport:
    """Error rates restricted to tokens expanded out of MorphCS compounds.

    Substitutions and deletions of affix/stem reference tokens are counted;
    insertions have no reference-side origin and are excluded.
    """

    n_affix_ref: int = 0
    n_stem_ref: int = 0
    affix_errors: int = 0
    stem_errors: int = 0

    @property
    def is_empty(self):
        return self.n_affix_ref + self.n_stem_ref == 0

    @property
    def arabic_affix_rate(self):
        return self.affix_errors / self.n_affix_ref if self.n_affix_ref else 0.0

    @property
    def english_stem_rate(self):
        return self.stem_errors / self.n_stem_ref if self.n_stem_ref else 0.0

    @property
    def overall_rate(self):
        n = self.n_affix_ref + self.n_stem_ref
        return (self.affix_errors + self.stem_errors) / n if n else 0.0

    def add(self, other: "MorphCsReport"):
        self.n_affix_ref += other.n_affix_ref
        self.n_stem_ref += other.n_stem_ref
        self.affix_errors += other.affix_errors
        self.stem_errors += other.stem_errors
        return self


def morph_cs_wer(ref, hyp, alignment: EditAlignment | None = None) -> MorphCsReport:
    """Error rates over intra-word CS constituents only.

    The reference must be expanded so that affix/stem tokens carry their
    ``morph_role``.  Returns an empty report when the reference contains
    no such tokens.
    """
    if alignment is None:
        alignment = align_edit(ref, hyp)
    report = MorphCsReport()
    for tok in ref:
        if tok.morph_role == "affix":
            report.n_affix_ref += 1
        elif tok.morph_role == "stem":
            report.n_stem_ref += 1
    if report.is_empty:
        return report
    for op in alignment.ops:
        if op.kind in ("substitute", "delete"):
            role = ref[op.ref_index].morph_role
            if role == "affix":
                report.affix_errors += 1
            elif role == "stem":
                report.stem_errors += 1
    return report
