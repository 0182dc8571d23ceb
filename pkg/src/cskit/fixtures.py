"""Deterministic synthetic fixtures for corpus-free evaluation.

The generator builds a reference corpus plus two N-best sets with planted
substitution errors and writes the expected error counts alongside, so the
scoring pipeline can be checked against an independent count: corrupted
words are always drawn from separate "wrong" vocabularies that never occur
in any reference, which makes the minimal edit distance of a hypothesis
exactly equal to the number of corrupted positions.

System A plays the hybrid (lexicon-bound) role and corrupts Arabic tokens
at ``p_a`` (plus English at the smaller ``q_a``); system B plays the
end-to-end role and corrupts English at ``p_b`` (plus Arabic at ``q_b``).
Confidence scores are constructed so that each system's softmax-normalized
1-best confidence equals ``1 - errors/len`` (clamped), optionally blurred
with uniform noise, which makes confidence selection mirror oracle
selection when the noise is zero.

The Arabic vocabulary is split into a lexicon-OOV part, an in-lexicon
infrequent part, and an in-lexicon frequent part so that every word-level
borrowing rule (and its refusal cases) fires on realistic data.
"""

import math
import random
from dataclasses import dataclass, field, asdict
from pathlib import Path

# Arabic letters safe under normalization (no Hamzated Alif, no dotted Ya,
# nothing the normalizer would rewrite)
_AR_LETTERS = "بتجحدرزسشصطعفقكلمنهوا"
_EN_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"

_CONF_FLOOR = 0.25
_CONF_CEIL = 0.95


@dataclass(frozen=True)
class FixtureSpec:
    n_sentences: int = 100
    cs_ratio: float = 0.6
    arabic_share: float = 0.65  # P(token is Arabic) inside a code-mixed sentence
    p_a: float = 0.2  # system A corruption rate on Arabic tokens
    p_b: float = 0.2  # system B corruption rate on English tokens
    q_a: float = 0.0  # system A corruption rate on English tokens
    q_b: float = 0.0  # system B corruption rate on Arabic tokens
    nbest_size: int = 5
    score_noise: float = 0.0
    lex_oov_share: float = 0.3  # Arabic vocab fractions: OOV / infrequent / frequent
    lex_infrequent_share: float = 0.4
    min_len: int = 4
    max_len: int = 12
    seed: int = 0

    def validate(self):
        for name in ("cs_ratio", "arabic_share", "p_a", "p_b", "q_a", "q_b",
                     "lex_oov_share", "lex_infrequent_share"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.lex_oov_share + self.lex_infrequent_share > 1.0:
            raise ValueError("Arabic lexicon shares exceed 1")
        if self.nbest_size < 1:
            raise ValueError("nbest_size must be >= 1")
        if not 2 <= self.min_len <= self.max_len:
            raise ValueError("need 2 <= min_len <= max_len")


@dataclass
class UtteranceExpectation:
    utt_id: str
    n_ref: int
    errors_a: int
    errors_b: int


@dataclass
class Fixture:
    spec: FixtureSpec
    refs: list  # (utt_id, text)
    nbest_a: list  # (utt_id, rank, am, lm, text)
    nbest_b: list  # (utt_id, rank, score, text)
    lexicon_words: list
    freq_counts: list  # (word, count)
    expected: list = field(default_factory=list)  # UtteranceExpectation

    @property
    def total_ref(self):
        return sum(e.n_ref for e in self.expected)

    @property
    def total_errors_a(self):
        return sum(e.errors_a for e in self.expected)

    @property
    def total_errors_b(self):
        return sum(e.errors_b for e in self.expected)

    @property
    def oracle_errors(self):
        return sum(min(e.errors_a, e.errors_b) for e in self.expected)

    @property
    def wer_a(self):
        return self.total_errors_a / self.total_ref

    @property
    def wer_b(self):
        return self.total_errors_b / self.total_ref

    @property
    def oracle_wer(self):
        return self.oracle_errors / self.total_ref


def _make_vocab(rng, letters, size, lengths, taken):
    vocab = []
    while len(vocab) < size:
        word = "".join(rng.choice(letters) for _ in range(rng.randint(*lengths)))
        if word not in taken:
            taken.add(word)
            vocab.append(word)
    return vocab


def _tail_score(confidence, n):
    """Raw score for ranks 2..n such that softmax([0, t, ..., t])[0] equals
    the requested 1-best confidence."""
    return math.log((1.0 / confidence - 1.0) / (n - 1))


def _scores_for(confidence, n):
    if n == 1:
        return [0.0]
    return [0.0] + [_tail_score(confidence, n)] * (n - 1)


def generate(spec: FixtureSpec) -> Fixture:
    """Build the full fixture for a spec; deterministic in the seed."""
    spec.validate()
    rng = random.Random(spec.seed)
    taken = set()
    ar_vocab = _make_vocab(rng, _AR_LETTERS, 80, (3, 6), taken)
    en_vocab = _make_vocab(rng, _EN_LETTERS, 80, (3, 8), taken)
    ar_wrong = _make_vocab(rng, _AR_LETTERS, 60, (3, 6), taken)
    en_wrong = _make_vocab(rng, _EN_LETTERS, 60, (3, 8), taken)

    n_oov = int(len(ar_vocab) * spec.lex_oov_share)
    n_inf = int(len(ar_vocab) * spec.lex_infrequent_share)
    ar_oov = set(ar_vocab[:n_oov])
    ar_infrequent = set(ar_vocab[n_oov:n_oov + n_inf])
    ar_frequent = set(ar_vocab[n_oov + n_inf:])

    lexicon_words = sorted(ar_infrequent | ar_frequent | set(en_vocab))
    freq_counts = (
        [(w, 10) for w in sorted(ar_infrequent)]
        + [(w, 1000) for w in sorted(ar_frequent)]
        + [(w, 100) for w in sorted(en_vocab)]
    )

    fixture = Fixture(spec, [], [], [], lexicon_words, freq_counts)
    for index in range(spec.n_sentences):
        utt_id = f"utt{index:04d}"
        length = rng.randint(spec.min_len, spec.max_len)
        draw = rng.random()
        if draw < spec.cs_ratio:
            tags = ["ar" if rng.random() < spec.arabic_share else "en" for _ in range(length)]
            if "ar" not in tags:
                tags[rng.randrange(length)] = "ar"
            if "en" not in tags:
                tags[rng.randrange(length)] = "en"
        elif draw < spec.cs_ratio + (1.0 - spec.cs_ratio) * 0.9:
            tags = ["ar"] * length
        else:
            tags = ["en"] * length
        ar_words = iter(rng.sample(ar_vocab, tags.count("ar")))
        en_words = iter(rng.sample(en_vocab, tags.count("en")))
        words = [next(ar_words) if tag == "ar" else next(en_words) for tag in tags]
        fixture.refs.append((utt_id, " ".join(words)))

        hyps = {}
        errors = {}
        for system, ar_rate, en_rate, wrong_ar, wrong_en in (
            ("a", spec.p_a, spec.q_a, ar_wrong, en_wrong),
            ("b", spec.q_b, spec.p_b, ar_wrong, en_wrong),
        ):
            wrong_ar_iter = iter(rng.sample(wrong_ar, length))
            wrong_en_iter = iter(rng.sample(wrong_en, length))
            hyp = []
            n_err = 0
            for tag, word in zip(tags, words):
                rate = ar_rate if tag == "ar" else en_rate
                if rng.random() < rate:
                    hyp.append(next(wrong_ar_iter) if tag == "ar" else next(wrong_en_iter))
                    n_err += 1
                else:
                    hyp.append(word)
            hyps[system] = hyp
            errors[system] = n_err
        fixture.expected.append(
            UtteranceExpectation(utt_id, length, errors["a"], errors["b"])
        )

        for system in ("a", "b"):
            hyp = hyps[system]
            confidence = 1.0 - errors[system] / length
            if spec.score_noise:
                confidence += spec.score_noise * rng.uniform(-1.0, 1.0)
            confidence = min(max(confidence, _CONF_FLOOR), _CONF_CEIL)
            scores = _scores_for(confidence, spec.nbest_size)

            # ranks 2..N corrupt one extra position each so worse
            # hypotheses really are worse
            clean = [i for i, (h, w) in enumerate(zip(hyp, words)) if h == w]
            rng.shuffle(clean)
            wrong_ar_iter = iter(rng.sample(ar_wrong, length))
            wrong_en_iter = iter(rng.sample(en_wrong, length))
            current = list(hyp)
            for rank in range(1, spec.nbest_size + 1):
                if rank > 1 and clean:
                    pos = clean.pop()
                    current[pos] = (
                        next(wrong_ar_iter) if tags[pos] == "ar" else next(wrong_en_iter)
                    )
                text = " ".join(current)
                k = scores[rank - 1]
                if system == "a":
                    # k = -lm - am/8 must reconstruct the target score
                    fixture.nbest_a.append((utt_id, rank, -4.0 * k, -0.5 * k, text))
                else:
                    fixture.nbest_b.append((utt_id, rank, k, text))
    return fixture


def write_fixture(fixture: Fixture, outdir) -> dict:
    """Write the fixture files; returns a name -> path map."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}

    def _write(name, lines):
        path = outdir / name
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        paths[name] = path

    _write("refs.tsv", [f"{u}\t{t}" for u, t in fixture.refs])
    _write(
        "nbest_a.tsv",
        [f"{u}\t{r}\t{am:.6f}\t{lm:.6f}\t{t}" for u, r, am, lm, t in fixture.nbest_a],
    )
    _write(
        "nbest_b.tsv",
        [f"{u}\t{r}\t{s:.6f}\t{t}" for u, r, s, t in fixture.nbest_b],
    )
    _write("lexicon.txt", fixture.lexicon_words)
    _write("freq.tsv", [f"{w}\t{c}" for w, c in fixture.freq_counts])
    _write(
        "expected_per_utt.tsv",
        [f"{e.utt_id}\t{e.n_ref}\t{e.errors_a}\t{e.errors_b}" for e in fixture.expected],
    )
    summary = [
        f"n_sentences={fixture.spec.n_sentences}",
        f"total_ref={fixture.total_ref}",
        f"errors_a={fixture.total_errors_a}",
        f"errors_b={fixture.total_errors_b}",
        f"oracle_errors={fixture.oracle_errors}",
        f"wer_a={fixture.wer_a!r}",
        f"wer_b={fixture.wer_b!r}",
        f"oracle_wer={fixture.oracle_wer!r}",
    ]
    summary += [f"spec_{k}={v!r}" for k, v in sorted(asdict(fixture.spec).items())]
    _write("expected.kv", summary)
    return paths


def load_expected(path):
    """Read an expected_per_utt.tsv back into UtteranceExpectation rows."""
    rows = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        utt_id, n_ref, errors_a, errors_b = line.split("\t")
        rows.append(UtteranceExpectation(utt_id, int(n_ref), int(errors_a), int(errors_b)))
    return rows
