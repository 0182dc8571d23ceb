"""Exception types shared across the toolkit."""


class CskitError(Exception):
    """Base class for all toolkit errors."""


class DataError(CskitError):
    """Malformed or inconsistent input data (files, scores, annotations)."""


class ParseError(DataError):
    def __init__(self, path, lineno, message):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class DuplicateUtterance(DataError):
    def __init__(self, utt_id):
        self.utt_id = utt_id
        super().__init__(f"duplicate utterance id: {utt_id}")


class RankGap(DataError):
    def __init__(self, utt_id, ranks):
        self.utt_id = utt_id
        super().__init__(f"utterance {utt_id}: ranks {sorted(ranks)} are not contiguous from 1")


class ScoreArityMismatch(DataError):
    """Number of score columns does not match the declared system kind."""


class MalformedMorphAnnotation(DataError):
    """A word contains '+' or '#' but does not match `prefix+STEM#suffix`."""


class EmptySentence(CskitError):
    """An operation that needs at least one token received none."""


class EmptyCorpus(CskitError):
    """An operation that needs at least one utterance received none."""


class EmptyReference(CskitError):
    """Error rates are undefined for an empty reference."""


class NonPositiveWeight(CskitError):
    """The language-model weight must be > 0."""


class SingleClassTrainingSet(CskitError):
    """Classifier training needs at least two classes with two samples each."""


class DegenerateCovariance(CskitError):
    """Pooled covariance could not be inverted even after ridge regularization."""


class DimensionMismatch(CskitError):
    """Feature vector length does not match the trained model."""


class MissingUtterance(CskitError):
    def __init__(self, utt_id):
        self.utt_id = utt_id
        super().__init__(f"utterance {utt_id} is missing from one of the systems")


class LinkOutOfRange(CskitError):
    """An alignment link points outside the token sequences."""
