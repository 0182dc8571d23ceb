"""Word aligner for paired ASR hypotheses of the same utterance.

Lexical translation probabilities are trained with EM (IBM Model 1 style)
under a fixed diagonal positional prior: the probability of target
position j linking to source position i is proportional to
``exp(-tension * |i/len_src - j/len_tgt|)``, so near-identical hypothesis
pairs align along the diagonal even for rare words.  A fixed NULL mass
keeps insertions in one hypothesis from forcing bad links.  Decoding both
directions and intersecting the links yields the confident 1-to-1 links
that downstream word borrowing requires.

Links are serialized in Pharaoh format: space-separated `i-j` pairs,
0-based.
"""

import math
from dataclasses import dataclass, field

from .errors import EmptyCorpus
from .langtok import Token

DEFAULT_ITERATIONS = 5
DEFAULT_TENSION = 4.0
NULL_PROB = 0.08

_NULL = None  # dictionary key for the NULL source word


@dataclass
class AlignmentModel:
    """Lexical translation table plus the fixed positional-prior settings.

    ``translation_probs[src][tgt]`` sums to 1 over observed targets for
    every source word (including the NULL word, keyed by ``None``).
    ``log_likelihoods[k]`` is the corpus log-likelihood under the
    parameters at the start of EM iteration k; EM guarantees it is
    non-decreasing.
    """

    translation_probs: dict = field(default_factory=dict)
    diagonal_tension: float = DEFAULT_TENSION
    iterations: int = DEFAULT_ITERATIONS
    null_prob: float = NULL_PROB
    log_likelihoods: list = field(default_factory=list)


@dataclass(frozen=True)
class LinkSet:
    """A set of (source index, target index) alignment links."""

    links: frozenset

    def __iter__(self):
        return iter(sorted(self.links))

    def __len__(self):
        return len(self.links)

    def __contains__(self, link):
        return link in self.links

    def transpose(self) -> "LinkSet":
        return LinkSet(frozenset((j, i) for i, j in self.links))

    def is_one_to_one(self) -> bool:
        src = [i for i, _ in self.links]
        tgt = [j for _, j in self.links]
        return len(set(src)) == len(src) and len(set(tgt)) == len(tgt)

    def to_pharaoh(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in sorted(self.links))

    @classmethod
    def from_pharaoh(cls, text: str) -> "LinkSet":
        links = set()
        for pair in text.split():
            i, j = pair.split("-")
            links.add((int(i), int(j)))
        return cls(frozenset(links))


def _words(seq):
    return [t.surface if isinstance(t, Token) else t for t in seq]


def _position_weights(src_len, tgt_pos, tgt_len, tension, null_prob):
    """Per-source-position prior for one target position; NULL gets the
    fixed ``null_prob`` mass and real positions share the rest."""
    raw = [
        math.exp(-tension * abs(i / src_len - tgt_pos / tgt_len))
        for i in range(src_len)
    ]
    total = sum(raw)
    scale = (1.0 - null_prob) / total
    return [w * scale for w in raw]


def train(pairs, iterations: int = DEFAULT_ITERATIONS, tension: float = DEFAULT_TENSION) -> AlignmentModel:
    """EM-train lexical translation probabilities on sentence pairs.

    Parameters
    ----------
    pairs : list of (source tokens, target tokens)
        Token lists or plain word lists; empty-sided pairs are skipped.
    iterations : int
        Number of EM iterations (uniform initialization, fixed order, so
        training is deterministic).
    tension : float
        Strength of the diagonal positional prior.

    Raises
    ------
    EmptyCorpus
        If no nonempty pair remains.
    """
    corpus = [
        (_words(src), _words(tgt)) for src, tgt in pairs if len(src) and len(tgt)
    ]
    if not corpus:
        raise EmptyCorpus("aligner training needs at least one nonempty pair")

    # uniform initialization over co-occurring targets; NULL co-occurs with
    # every target word
    cooc = {_NULL: set()}
    for src_words, tgt_words in corpus:
        for t in tgt_words:
            cooc[_NULL].add(t)
        for s in src_words:
            cooc.setdefault(s, set()).update(tgt_words)
    probs = {
        s: {t: 1.0 / len(targets) for t in sorted(targets)}
        for s, targets in cooc.items()
    }

    model = AlignmentModel(probs, tension, iterations)
    for _ in range(iterations):
        counts = {s: {} for s in probs}
        log_likelihood = 0.0
        for src_words, tgt_words in corpus:
            src_len = len(src_words)
            tgt_len = len(tgt_words)
            for j, t in enumerate(tgt_words):
                weights = _position_weights(src_len, j, tgt_len, tension, NULL_PROB)
                posterior = [NULL_PROB * probs[_NULL][t]]
                for i, s in enumerate(src_words):
                    posterior.append(weights[i] * probs[s].get(t, 0.0))
                denom = sum(posterior)
                log_likelihood += math.log(denom)
                null_counts = counts[_NULL]
                null_counts[t] = null_counts.get(t, 0.0) + posterior[0] / denom
                for i, s in enumerate(src_words):
                    src_counts = counts[s]
                    src_counts[t] = src_counts.get(t, 0.0) + posterior[i + 1] / denom
        if model.log_likelihoods:
            assert log_likelihood >= model.log_likelihoods[-1] - 1e-9, (
                "EM log-likelihood decreased"
            )
        model.log_likelihoods.append(log_likelihood)
        for s, src_counts in counts.items():
            total = sum(src_counts.values())
            if total > 0.0:
                probs[s] = {t: c / total for t, c in sorted(src_counts.items())}
    return model


def decode(model: AlignmentModel, source, target) -> LinkSet:
    """Viterbi links: each target position links to the argmax source.

    The NULL word competes with real positions, so a target word that some
    source word explains badly may stay unlinked.  Target words never seen
    in training fall back to the positional prior alone.  Ties break to
    the smallest source index; decoding is deterministic.
    """
    src_words = _words(source)
    tgt_words = _words(target)
    links = set()
    if not src_words or not tgt_words:
        return LinkSet(frozenset())
    probs = model.translation_probs
    null_table = probs.get(_NULL, {})
    for j, t in enumerate(tgt_words):
        weights = _position_weights(
            len(src_words), j, len(tgt_words), model.diagonal_tension, model.null_prob
        )
        scores = [weights[i] * probs.get(s, {}).get(t, 0.0) for i, s in enumerate(src_words)]
        best = max(scores)
        if best == 0.0:
            if model.null_prob * null_table.get(t, 0.0) > 0.0:
                continue  # known word explained only by NULL
            scores = weights  # unknown word: positional prior only
            best = max(scores)
        elif model.null_prob * null_table.get(t, 0.0) >= best:
            continue
        links.add((scores.index(best), j))
    return LinkSet(frozenset(links))


def one_to_one(forward: LinkSet, backward: LinkSet) -> LinkSet:
    """Intersect forward (src->tgt) and backward (tgt->src) link sets.

    The backward set is transposed into forward coordinates first.  A
    pruning pass drops any residual many-to-one links (first link wins in
    (i, j) order), so the result is injective in both coordinates and is
    always a subset of ``forward``.
    """
    intersection = forward.links & backward.transpose().links
    kept = []
    used_src = set()
    used_tgt = set()
    for i, j in sorted(intersection):
        if i in used_src or j in used_tgt:
            continue
        used_src.add(i)
        used_tgt.add(j)
        kept.append((i, j))
    return LinkSet(frozenset(kept))


@dataclass
class BidirectionalAligner:
    """Forward and backward models over the same paired corpus."""

    forward: AlignmentModel
    backward: AlignmentModel

    def links(self, source, target) -> LinkSet:
        fwd = decode(self.forward, source, target)
        bwd = decode(self.backward, target, source)
        return one_to_one(fwd, bwd)


def train_bidirectional(
    pairs, iterations: int = DEFAULT_ITERATIONS, tension: float = DEFAULT_TENSION
) -> BidirectionalAligner:
    """Train source->target and target->source models on the same pairs."""
    reverse = [(tgt, src) for src, tgt in pairs]
    return BidirectionalAligner(
        train(pairs, iterations, tension), train(reverse, iterations, tension)
    )
