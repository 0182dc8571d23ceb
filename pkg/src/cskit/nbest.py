"""File I/O for references, N-best lists, lexicons, and frequency tables.

All files are UTF-8 text with TAB as the only field separator:

* references:        `utt_id<TAB>text`
* N-best (hybrid):   `utt_id<TAB>rank<TAB>am<TAB>lm<TAB>text`
* N-best (e2e):      `utt_id<TAB>rank<TAB>score<TAB>text`
* lexicon:           one headword per line, optional pronunciation after a
                     TAB (ignored)
* frequency table:   `token<TAB>count`

Text is normalized and tokenized on load; scores are stored raw (the
hybrid am/lm columns are the decoder's unnormalized log costs) and only
interpreted by the combination module.  Loaded structures are immutable.
"""

from dataclasses import dataclass, field

from . import textnorm
from .errors import (
    DuplicateUtterance,
    EmptyCorpus,
    ParseError,
    RankGap,
    ScoreArityMismatch,
)
from .langtok import Token, Utterance, tokenize

HYBRID = "hybrid"
E2E = "e2e"
SYSTEM_KINDS = (HYBRID, E2E)

DEFAULT_MAX_N = 20


@dataclass(frozen=True)
class Hypothesis:
    utt_id: str
    rank: int
    text: str
    tokens: tuple
    score_single: float | None = None
    score_am: float | None = None
    score_lm: float | None = None


@dataclass(frozen=True)
class NBestList:
    utt_id: str
    system_id: str
    hypotheses: tuple  # sorted by rank, ranks 1..N without gaps

    @property
    def n(self):
        return len(self.hypotheses)

    @property
    def one_best(self) -> Hypothesis:
        return self.hypotheses[0]


@dataclass(frozen=True)
class Lexicon:
    words: frozenset
    source_entry_count: int
    merges: int = 0

    def __contains__(self, word):
        surface = word.surface if isinstance(word, Token) else word
        return surface in self.words


@dataclass(frozen=True)
class FrequencyTable:
    counts: dict = field(default_factory=dict)

    def count(self, word) -> int:
        surface = word.surface if isinstance(word, Token) else word
        return self.counts.get(surface, 0)


def _read_lines(path):
    with open(path, encoding="utf-8") as f:
        data = f.read()
    for lineno, line in enumerate(data.splitlines(), 1):
        if line.strip():
            yield lineno, line


def load_references(path, cfg: textnorm.NormalizationConfig = textnorm.DEFAULT_CONFIG):
    """Load `utt_id<TAB>text` lines into a map utt_id -> Utterance."""
    refs = {}
    for lineno, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(path, lineno, f"expected `utt_id<TAB>text`, got {len(fields)} fields")
        utt_id, text = fields
        if utt_id in refs:
            raise DuplicateUtterance(utt_id)
        normalized = textnorm.normalize_text(text, cfg)
        refs[utt_id] = Utterance(utt_id, tuple(tokenize(normalized)), normalized)
    return refs


def _is_float(value):
    try:
        float(value)
        return True
    except ValueError:
        return False


def _parse_score(path, lineno, value, label):
    try:
        return float(value)
    except ValueError:
        raise ParseError(path, lineno, f"bad {label} score: {value!r}") from None


def load_nbest(
    path,
    system_kind: str,
    system_id: str | None = None,
    max_n: int = DEFAULT_MAX_N,
    cfg: textnorm.NormalizationConfig = textnorm.DEFAULT_CONFIG,
):
    """Load an N-best file into a map utt_id -> NBestList.

    ``system_kind`` is 'hybrid' (two score columns: acoustic, language
    model) or 'e2e' (one score column).  Ranks must be 1..N without gaps
    and N may not exceed ``max_n``.
    """
    if system_kind not in SYSTEM_KINDS:
        raise ValueError(f"system_kind must be one of {SYSTEM_KINDS}, got {system_kind!r}")
    if system_id is None:
        system_id = system_kind
    per_utt = {}
    for lineno, line in _read_lines(path):
        fields = line.split("\t")
        n_fields = 5 if system_kind == HYBRID else 4
        if len(fields) != n_fields:
            # a line shaped like the other kind (score columns parse as
            # numbers) is an arity mismatch, anything else a parse error
            other = 4 if system_kind == HYBRID else 5
            if len(fields) == other and all(
                _is_float(fields[k]) for k in range(2, other - 1)
            ):
                raise ScoreArityMismatch(
                    f"{path}:{lineno}: score column count does not match kind {system_kind!r}"
                )
            raise ParseError(path, lineno, f"expected {n_fields} tab-separated fields")
        utt_id = fields[0]
        try:
            rank = int(fields[1])
        except ValueError:
            raise ParseError(path, lineno, f"bad rank: {fields[1]!r}") from None
        if rank < 1:
            raise ParseError(path, lineno, f"ranks are 1-based, got {rank}")
        text = fields[-1]
        normalized = textnorm.normalize_text(text, cfg)
        tokens = tuple(tokenize(normalized))
        if system_kind == HYBRID:
            hyp = Hypothesis(
                utt_id,
                rank,
                normalized,
                tokens,
                score_am=_parse_score(path, lineno, fields[2], "acoustic"),
                score_lm=_parse_score(path, lineno, fields[3], "language-model"),
            )
        else:
            hyp = Hypothesis(
                utt_id,
                rank,
                normalized,
                tokens,
                score_single=_parse_score(path, lineno, fields[2], "confidence"),
            )
        per_utt.setdefault(utt_id, []).append(hyp)

    lists = {}
    for utt_id, hyps in per_utt.items():
        ranks = [h.rank for h in hyps]
        if sorted(ranks) != list(range(1, len(ranks) + 1)):
            raise RankGap(utt_id, ranks)
        if len(ranks) > max_n:
            raise ParseError(path, 0, f"utterance {utt_id} has {len(ranks)} hypotheses > max {max_n}")
        hyps.sort(key=lambda h: h.rank)
        lists[utt_id] = NBestList(utt_id, system_id, tuple(hyps))
    return lists


def load_lexicon(path, cfg: textnorm.NormalizationConfig = textnorm.DEFAULT_CONFIG) -> Lexicon:
    """Load headwords (pronunciations after a TAB are ignored) and
    normalize them; duplicates after normalization are merged."""
    raw = []
    for _, line in _read_lines(path):
        raw.append(line.split("\t")[0].strip())
    words, merges = textnorm.normalize_lexicon_keys(set(raw), cfg)
    return Lexicon(frozenset(words), source_entry_count=len(raw), merges=merges)


def load_frequency_table(
    path, cfg: textnorm.NormalizationConfig = textnorm.DEFAULT_CONFIG
) -> FrequencyTable:
    """Load `token<TAB>count` lines; counts of normalized duplicates add up."""
    counts = {}
    for lineno, line in _read_lines(path):
        fields = line.split("\t")
        if len(fields) != 2:
            raise ParseError(path, lineno, "expected `token<TAB>count`")
        token = textnorm.normalize_text(fields[0], cfg)
        try:
            count = int(fields[1])
        except ValueError:
            raise ParseError(path, lineno, f"bad count: {fields[1]!r}") from None
        if count < 1:
            raise ParseError(path, lineno, f"counts must be >= 1, got {count}")
        if token:
            counts[token] = counts.get(token, 0) + count
    return FrequencyTable(counts)


def oov_rate(tokens, lexicon: Lexicon) -> float:
    """Fraction of token instances absent from the lexicon."""
    total = 0
    missing = 0
    for tok in tokens:
        total += 1
        if tok not in lexicon:
            missing += 1
    if total == 0:
        raise EmptyCorpus("oov_rate needs at least one token")
    return missing / total
