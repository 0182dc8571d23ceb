"""Hypothesis combination across a hybrid and an end-to-end ASR system.

Three strategies, all operating on the systems' N-best output:

* confidence-score selection: per utterance, softmax-normalize each
  system's N-best scores and keep the 1-best of the system with the
  higher normalized confidence;
* discriminant-classifier selection: a linear discriminant over
  confidence, CMI and English-percentage features decides which system
  to trust;
* word-level borrowing: replace tokens of the selected (base) hypothesis
  with tokens from the other system's (donor) hypothesis over confident
  1-to-1 alignment links - English words and infrequent in-lexicon Arabic
  words flow from the hybrid system, out-of-lexicon Arabic words flow
  from the end-to-end system.

The hybrid chain applies sentence-level selection first and feeds the
winner into word-level borrowing against the loser.

Convention used throughout: system A is the hybrid (lexicon-based)
system, system B the end-to-end system; every tie prefers A.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import aligner as aligner_mod
from .errors import (
    DegenerateCovariance,
    DimensionMismatch,
    LinkOutOfRange,
    MissingUtterance,
    NonPositiveWeight,
    SingleClassTrainingSet,
)
from .langtok import LanguageTag, expand_tokens
from .metrics import cmi
from .scoring import SystemSource, wer

DEFAULT_LM_WEIGHT = 8.0
DEFAULT_INFREQUENT_THRESHOLD = 50


# --------------------------------------------------------------------------
# Confidence scores
# --------------------------------------------------------------------------


def _softmax(scores):
    peak = max(scores)
    exps = [math.exp(s - peak) for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


@dataclass(frozen=True)
class ConfidenceVector:
    """Softmax-normalized probabilities over one system's N-best list.

    ``raw`` keeps the combined scores the softmax was applied to; the
    system's sentence confidence is the maximum entry.
    """

    probs: tuple
    raw: tuple

    def __post_init__(self):
        if not self.probs:
            raise ValueError("confidence vector needs at least one entry")
        total = sum(self.probs)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"confidence probabilities sum to {total}, not 1")

    @property
    def score(self) -> float:
        return max(self.probs)

    @property
    def best_index(self) -> int:
        return self.probs.index(self.score)


def espnet_confidence(nbest) -> ConfidenceVector:
    """Softmax the single per-hypothesis scores of an e2e N-best list."""
    raw = []
    for hyp in nbest.hypotheses:
        if hyp.score_single is None:
            raise ValueError(f"utterance {nbest.utt_id}: hypothesis lacks a single score")
        raw.append(hyp.score_single)
    return ConfidenceVector(tuple(_softmax(raw)), tuple(raw))


def kaldi_confidence(nbest, lm_weight: float = DEFAULT_LM_WEIGHT) -> ConfidenceVector:
    """Combine hybrid acoustic/language-model scores, then softmax.

    Each hypothesis gets ``k = -lm - am / w`` where ``w`` is the
    language-model weight the decoder was tuned with (default 8); the
    acoustic score is scaled down by ``w`` before the two are added.
    """
    if lm_weight <= 0:
        raise NonPositiveWeight(f"lm weight must be > 0, got {lm_weight}")
    raw = []
    for hyp in nbest.hypotheses:
        if hyp.score_am is None or hyp.score_lm is None:
            raise ValueError(f"utterance {nbest.utt_id}: hypothesis lacks am/lm scores")
        raw.append(-hyp.score_lm - hyp.score_am / lm_weight)
    return ConfidenceVector(tuple(_softmax(raw)), tuple(raw))


def confidence_for(nbest, lm_weight: float = DEFAULT_LM_WEIGHT) -> ConfidenceVector:
    """Dispatch on the score fields the N-best list carries."""
    if nbest.one_best.score_single is not None:
        return espnet_confidence(nbest)
    return kaldi_confidence(nbest, lm_weight)


def select_by_confidence(conf_a, conf_b, hyp_a, hyp_b):
    """Keep the hypothesis of the system with higher confidence, tie -> A."""
    if conf_b.score > conf_a.score:
        return hyp_b, SystemSource.B
    return hyp_a, SystemSource.A


# --------------------------------------------------------------------------
# Discriminant-classifier selection
# --------------------------------------------------------------------------


def english_percentage(tokens) -> float:
    """Percentage of English tokens among the expanded tokens, in [0, 100]."""
    tokens = expand_tokens(tokens)
    if not tokens:
        return 0.0
    n_en = sum(1 for t in tokens if t.tag is LanguageTag.ENGLISH)
    return 100.0 * n_en / len(tokens)


def _sentence_cmi(tokens) -> float:
    tokens = expand_tokens(tokens)
    if not tokens:
        return 0.0
    return cmi(tokens).value


@dataclass(frozen=True)
class SelectorFeatures:
    """Per-utterance features describing both systems' 1-best hypotheses."""

    score_a: float
    score_b: float
    cmi_a: float
    cmi_b: float
    pct_en_a: float
    pct_en_b: float

    @classmethod
    def build(cls, conf_a, conf_b, tokens_a, tokens_b) -> "SelectorFeatures":
        return cls(
            conf_a.score,
            conf_b.score,
            _sentence_cmi(tokens_a),
            _sentence_cmi(tokens_b),
            english_percentage(tokens_a),
            english_percentage(tokens_b),
        )

    def vector(self, mode: str = "both"):
        """Feature vector; ``mode`` 'both' gives all six dimensions, 'a' or
        'b' the three dimensions of one side (ablation)."""
        if mode == "both":
            values = (self.score_a, self.score_b, self.cmi_a, self.cmi_b,
                      self.pct_en_a, self.pct_en_b)
        elif mode == "a":
            values = (self.score_a, self.cmi_a, self.pct_en_a)
        elif mode == "b":
            values = (self.score_b, self.cmi_b, self.pct_en_b)
        else:
            raise ValueError(f"unknown feature mode {mode!r}")
        return np.asarray(values, dtype=np.float64)


@dataclass
class DiscriminantModel:
    """Gaussian linear discriminant: class means, shared covariance inverse,
    log priors.  The decision function is linear in the features."""

    class_labels: list
    means: np.ndarray  # (n_classes, dim)
    cov_inv: np.ndarray  # (dim, dim)
    log_priors: np.ndarray  # (n_classes,)

    @property
    def dim(self):
        return self.means.shape[1]

    def discriminants(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"expected {self.dim} features, got {x.shape}")
        proj = self.means @ self.cov_inv
        return proj @ x - 0.5 * np.einsum("ij,ij->i", proj, self.means) + self.log_priors

    def predict(self, x):
        """Label with the highest discriminant; ties take the earliest
        label in sorted order (A before B)."""
        return self.class_labels[int(np.argmax(self.discriminants(x)))]


def _as_matrix(features, mode="both"):
    rows = [
        f.vector(mode) if isinstance(f, SelectorFeatures) else np.asarray(f, dtype=np.float64)
        for f in features
    ]
    return np.vstack(rows)


def _as_label(label):
    return label.value if isinstance(label, SystemSource) else str(label)


def train_selector(features, labels, mode: str = "both") -> DiscriminantModel:
    """Fit a linear discriminant that learns which system to choose.

    Parameters
    ----------
    features : list of SelectorFeatures or array-like rows
    labels : list
        Per-utterance label of the lower-WER system ('A'/'B', or any
        hashable for the multi-class candidate mode); ties labeled 'A'.
    mode : str
        Feature-vector mode handed to SelectorFeatures ('both', 'a', 'b').

    Notes
    -----
    The pooled within-class covariance gets a ridge term ``lambda * I``
    with ``lambda = 1e-6 * mean(diag)`` so that degenerate features stay
    invertible; class priors come from the label frequencies.
    """
    x = _as_matrix(features, mode)
    y = np.asarray([_as_label(l) for l in labels])
    if x.shape[0] != y.shape[0]:
        raise ValueError("features and labels differ in length")
    classes = sorted(set(y))
    if len(classes) < 2:
        raise SingleClassTrainingSet("training set contains a single class")
    counts = np.array([(y == c).sum() for c in classes])
    if counts.min() < 2:
        raise SingleClassTrainingSet("every class needs at least 2 training samples")

    dim = x.shape[1]
    means = np.vstack([x[y == c].mean(axis=0) for c in classes])
    pooled = np.zeros((dim, dim))
    for c, mu in zip(classes, means):
        centered = x[y == c] - mu
        pooled += centered.T @ centered
    pooled /= x.shape[0] - len(classes)
    ridge = 1e-6 * float(np.mean(np.diag(pooled)))
    if ridge <= 0.0:
        ridge = 1e-12
    pooled += ridge * np.eye(dim)
    try:
        cov_inv = np.linalg.inv(pooled)
    except np.linalg.LinAlgError as exc:
        raise DegenerateCovariance(str(exc)) from exc
    if not np.all(np.isfinite(cov_inv)):
        raise DegenerateCovariance("covariance inverse is not finite")
    log_priors = np.log(counts / x.shape[0])
    return DiscriminantModel(list(classes), means, cov_inv, log_priors)


def select_by_classifier(model: DiscriminantModel, features, hyp_a, hyp_b, mode: str = "both"):
    """Let the trained discriminant pick the system for one utterance."""
    x = features.vector(mode) if isinstance(features, SelectorFeatures) else features
    label = model.predict(x)
    if label == SystemSource.B.value:
        return hyp_b, SystemSource.B
    return hyp_a, SystemSource.A


MODEL_FORMAT_HEADER = "cskit-discriminant 1"


def save_model(model: DiscriminantModel, path):
    """Plain-text matrix dump with a format-version header."""
    with open(path, "w", encoding="utf-8") as f:
        f.write(MODEL_FORMAT_HEADER + "\n")
        f.write(f"classes {len(model.class_labels)}\n")
        f.write(f"dim {model.dim}\n")
        f.write("labels " + " ".join(model.class_labels) + "\n")
        f.write("log_priors " + " ".join(format(v, ".17g") for v in model.log_priors) + "\n")
        for label, mean in zip(model.class_labels, model.means):
            f.write(f"mean {label} " + " ".join(format(v, ".17g") for v in mean) + "\n")
        for row in model.cov_inv:
            f.write("covinv " + " ".join(format(v, ".17g") for v in row) + "\n")


def load_model(path) -> DiscriminantModel:
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != MODEL_FORMAT_HEADER:
        raise ValueError(f"{path}: not a {MODEL_FORMAT_HEADER!r} file")
    fields = dict()
    means = {}
    cov_rows = []
    for line in lines[1:]:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "mean":
            means[parts[1]] = [float(v) for v in parts[2:]]
        elif parts[0] == "covinv":
            cov_rows.append([float(v) for v in parts[1:]])
        else:
            fields[parts[0]] = parts[1:]
    labels = fields["labels"]
    return DiscriminantModel(
        labels,
        np.asarray([means[l] for l in labels]),
        np.asarray(cov_rows),
        np.asarray([float(v) for v in fields["log_priors"]]),
    )


# --------------------------------------------------------------------------
# Multi-class candidate selection over the top n of both systems
# (experimental: accuracy degrades for n > 1, kept as a study mode)
# --------------------------------------------------------------------------


def candidate_labels(n: int):
    return [f"A{r:02d}" for r in range(1, n + 1)] + [f"B{r:02d}" for r in range(1, n + 1)]


def _candidates(nbest_a, nbest_b, n):
    if n > nbest_a.n or n > nbest_b.n:
        raise ValueError(f"n={n} exceeds available hypotheses")
    return list(nbest_a.hypotheses[:n]) + list(nbest_b.hypotheses[:n])


def candidate_features(nbest_a, nbest_b, n: int, lm_weight: float = DEFAULT_LM_WEIGHT):
    """Concatenated [confidence, cmi, pct_en] per candidate, 6n dims."""
    conf_a = confidence_for(nbest_a, lm_weight)
    conf_b = confidence_for(nbest_b, lm_weight)
    values = []
    for probs, hyps in ((conf_a.probs, nbest_a.hypotheses), (conf_b.probs, nbest_b.hypotheses)):
        for rank in range(n):
            tokens = hyps[rank].tokens
            values.extend((probs[rank], _sentence_cmi(tokens), english_percentage(tokens)))
    return np.asarray(values, dtype=np.float64)


def best_candidate_label(ref_tokens, nbest_a, nbest_b, n: int) -> str:
    """Label of the lowest-WER candidate; ties take the earliest (A side)."""
    best = None
    best_wer = None
    for label, hyp in zip(candidate_labels(n), _candidates(nbest_a, nbest_b, n)):
        value = wer(ref_tokens, expand_tokens(hyp.tokens)).wer
        if best_wer is None or value < best_wer:
            best, best_wer = label, value
    return best


def select_candidate(model: DiscriminantModel, nbest_a, nbest_b, n: int,
                     lm_weight: float = DEFAULT_LM_WEIGHT):
    """Pick one of the 2n candidate hypotheses with a multi-class model."""
    label = model.predict(candidate_features(nbest_a, nbest_b, n, lm_weight))
    index = candidate_labels(n).index(label)
    return _candidates(nbest_a, nbest_b, n)[index], label


# --------------------------------------------------------------------------
# Word-level borrowing
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BorrowPolicy:
    """Borrowing rule settings.

    ``infrequent_threshold`` is the training-text frequency at or below
    which an in-lexicon Arabic word counts as infrequent (a word absent
    from the training text counts as frequency 0).
    """

    infrequent_threshold: int = DEFAULT_INFREQUENT_THRESHOLD
    enable_hybrid_to_e2e: bool = True
    enable_e2e_to_hybrid: bool = True

    def __post_init__(self):
        if self.infrequent_threshold < 1:
            raise ValueError("infrequent_threshold must be >= 1")


HYBRID_TO_E2E = "hybrid_to_e2e"  # base = e2e hypothesis, donor = hybrid
E2E_TO_HYBRID = "e2e_to_hybrid"  # base = hybrid hypothesis, donor = e2e


def _should_borrow(donor_tok, lexicon, freq, policy, direction) -> bool:
    if direction == HYBRID_TO_E2E:
        # the hybrid system is trusted for English and for rare lexicon words
        if donor_tok.tag is LanguageTag.ENGLISH:
            return True
        return (
            donor_tok.tag is LanguageTag.ARABIC
            and donor_tok in lexicon
            and freq.count(donor_tok) <= policy.infrequent_threshold
        )
    if direction == E2E_TO_HYBRID:
        # the e2e system is trusted for words the lexicon cannot produce
        return donor_tok.tag is LanguageTag.ARABIC and donor_tok not in lexicon
    raise ValueError(f"unknown borrow direction {direction!r}")


def borrow_words(base_hyp, donor_hyp, links, lexicon, freq, policy: BorrowPolicy, direction: str):
    """Replace base tokens with linked donor tokens where the rules allow.

    Parameters
    ----------
    base_hyp, donor_hyp : token lists
    links : LinkSet of (base index, donor index)
        Must be strictly 1-to-1; unlinked positions are never touched.
    direction : str
        ``HYBRID_TO_E2E`` borrows English plus infrequent in-lexicon
        Arabic words into the e2e hypothesis; ``E2E_TO_HYBRID`` borrows
        out-of-lexicon Arabic words into the hybrid hypothesis.

    Returns
    -------
    (tokens, replacements)
        The new token list (same length as the base) and the list of
        (position, old surface, new surface) actually changed.
    """
    if not links.is_one_to_one():
        raise ValueError("borrow_words requires strictly 1-to-1 links")
    tokens = list(base_hyp)
    replacements = []
    for i, j in links:
        if not (0 <= i < len(tokens)) or not (0 <= j < len(donor_hyp)):
            raise LinkOutOfRange(f"link ({i},{j}) outside hypothesis lengths")
        donor_tok = donor_hyp[j]
        if not _should_borrow(donor_tok, lexicon, freq, policy, direction):
            continue
        if tokens[i].surface != donor_tok.surface:
            replacements.append((i, tokens[i].surface, donor_tok.surface))
        tokens[i] = donor_tok
    return tokens, replacements


# --------------------------------------------------------------------------
# Full chains
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CombinedHypothesis:
    utt_id: str
    tokens: tuple
    source: SystemSource  # which system the base sentence came from
    replacements: tuple  # (position, old surface, new surface)
    selector: str

    @property
    def text(self):
        return " ".join(t.surface for t in self.tokens)


def _check_coverage(nbest_a, nbest_b):
    for utt_id in nbest_a:
        if utt_id not in nbest_b:
            raise MissingUtterance(utt_id)
    for utt_id in nbest_b:
        if utt_id not in nbest_a:
            raise MissingUtterance(utt_id)


def _borrow_for_base(source, tokens_a, tokens_b, links_ab, lexicon, freq, policy):
    """Apply borrowing for a chosen base; links_ab is in (a, b) coordinates."""
    if source is SystemSource.A:
        direction = E2E_TO_HYBRID
        enabled = policy.enable_e2e_to_hybrid
        base, donor, links = tokens_a, tokens_b, links_ab
    else:
        direction = HYBRID_TO_E2E
        enabled = policy.enable_hybrid_to_e2e
        base, donor, links = tokens_b, tokens_a, links_ab.transpose()
    if not enabled or lexicon is None or freq is None:
        return list(base), []
    return borrow_words(base, donor, links, lexicon, freq, policy, direction)


def train_hypothesis_aligner(nbest_a, nbest_b, iterations=aligner_mod.DEFAULT_ITERATIONS,
                             tension=aligner_mod.DEFAULT_TENSION):
    """Train the bidirectional aligner on the paired 1-best hypotheses."""
    _check_coverage(nbest_a, nbest_b)
    pairs = [
        (nbest_a[utt_id].one_best.tokens, nbest_b[utt_id].one_best.tokens)
        for utt_id in sorted(nbest_a)
    ]
    return aligner_mod.train_bidirectional(pairs, iterations, tension)


def hybrid_combine(
    nbest_a,
    nbest_b,
    lexicon,
    freq,
    policy: BorrowPolicy | None = None,
    selector: str = "confidence",
    model: DiscriminantModel | None = None,
    hyp_aligner=None,
    lm_weight: float = DEFAULT_LM_WEIGHT,
    feature_mode: str = "both",
    word_level: bool = True,
    fixed_base: SystemSource | None = None,
):
    """Sentence-level selection chained into word-level borrowing.

    Parameters
    ----------
    nbest_a, nbest_b : dict utt_id -> NBestList
        System A (hybrid kind) and system B (e2e kind); both must cover
        the same utterances.
    lexicon, freq : Lexicon and FrequencyTable (may be None with
        ``word_level=False``)
    selector : 'confidence' or 'classifier'
        Classifier selection needs ``model`` trained on a separate split.
    hyp_aligner : BidirectionalAligner, optional
        Trained on the paired 1-bests when omitted.
    word_level : bool
        Disable to get pure sentence-level combination.
    fixed_base : SystemSource, optional
        Skip selection and always use this system as the base
        (pure word-level combination).

    Returns
    -------
    dict utt_id -> CombinedHypothesis
    """
    _check_coverage(nbest_a, nbest_b)
    if selector == "classifier" and fixed_base is None and model is None:
        raise ValueError("classifier selection needs a trained model")
    if policy is None:
        policy = BorrowPolicy()
    if word_level and hyp_aligner is None:
        hyp_aligner = train_hypothesis_aligner(nbest_a, nbest_b)

    results = {}
    for utt_id in sorted(nbest_a):
        tokens_a = nbest_a[utt_id].one_best.tokens
        tokens_b = nbest_b[utt_id].one_best.tokens
        if fixed_base is not None:
            source = fixed_base
            selector_used = "fixed"
        else:
            conf_a = confidence_for(nbest_a[utt_id], lm_weight)
            conf_b = confidence_for(nbest_b[utt_id], lm_weight)
            if selector == "confidence":
                _, source = select_by_confidence(conf_a, conf_b, tokens_a, tokens_b)
            elif selector == "classifier":
                feats = SelectorFeatures.build(conf_a, conf_b, tokens_a, tokens_b)
                _, source = select_by_classifier(model, feats, tokens_a, tokens_b, feature_mode)
            else:
                raise ValueError(f"unknown selector {selector!r}")
            selector_used = selector
        if word_level:
            links_ab = hyp_aligner.links(tokens_a, tokens_b)
            tokens, replacements = _borrow_for_base(
                source, tokens_a, tokens_b, links_ab, lexicon, freq, policy
            )
        else:
            tokens = list(tokens_a if source is SystemSource.A else tokens_b)
            replacements = []
        results[utt_id] = CombinedHypothesis(
            utt_id, tuple(tokens), source, tuple(replacements), selector_used
        )
    return results
