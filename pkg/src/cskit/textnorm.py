"""Orthographic normalization for mixed Arabic/English transcripts.

Dialectal Arabic has no standardized orthography: Hamzated Alif variants
are written with or without the Hamza, and dotted/dotless Ya are used
interchangeably at word ends.  Latin-script words vary in casing.  All
text (references, hypotheses, lexicons) must go through the same
normalization before any tokenization, scoring, or combination.

Default rules:
1. Strip Arabic diacritics (tashkeel) and tatweel - always.
2. Map Hamzated Alifs to bare Alif:  [أإآ] -> ا
3. Map word-final dotted Ya to dotless Ya:  ي -> ى (word end only)
4. Uppercase all Latin letters.
5. Remove punctuation (Unicode P* plus Arabic marks); '+' and '#' are
   reserved intra-word code-switch markers and are never removed.
6. Non-speech tags [HES] [HUM] [COUGH] [LAUGHTER] [NOISE] are dropped
   (or kept verbatim).
7. Collapse whitespace to single spaces and trim.

Corpus-specific spelling standardization beyond these rules can be
supplied as an ordered replacement table (``NormalizationConfig.replacements``).
"""

import re
import unicodedata
from dataclasses import dataclass, field

# Tashkeel, superscript alef and tatweel - stripped unconditionally since
# transcripts are undiacritized and stray diacritics break lexicon lookup.
DIACRITICS_PATTERN = re.compile(r"[ً-ٰٟـ]")

# Hamzated Alif variants to bare Alif
HAMZATED_ALIF_PATTERN = re.compile(r"[أإآ]")
BARE_ALIF = "ا"

DOTTED_YA = "ي"
DOTLESS_YA = "ى"

NONSPEECH_TAGS = frozenset({"[HES]", "[HUM]", "[COUGH]", "[LAUGHTER]", "[NOISE]"})

# Intra-word code-switch markers, exempt from punctuation stripping.
MORPH_MARKERS = frozenset({"+", "#"})


@dataclass(frozen=True)
class NormalizationConfig:
    """Independent switches for each normalization rule.

    The default enables every mapping and drops non-speech tags; set
    ``nonspeech_policy="keep"`` when tags should survive (e.g. when they
    must be counted as language-independent tokens in corpus statistics).
    ``replacements`` is an ordered list of (old, new) string substitutions
    applied before anything else, for corpus-specific spelling rules.
    """

    map_hamzated_alif: bool = True
    map_final_dotted_ya: bool = True
    uppercase_latin: bool = True
    strip_punctuation: bool = True
    nonspeech_policy: str = "drop"  # "keep" | "drop"
    replacements: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.nonspeech_policy not in ("keep", "drop"):
            raise ValueError(f"nonspeech_policy must be 'keep' or 'drop', got {self.nonspeech_policy!r}")


DEFAULT_CONFIG = NormalizationConfig()


def _is_punctuation(ch: str) -> bool:
    if ch in MORPH_MARKERS:
        return False
    # P* covers the Arabic marks ، ؛ ؟ as well; they are kept
    # in mind explicitly because the transcripts use them.
    return unicodedata.category(ch).startswith("P")


def _normalize_word(word: str, cfg: NormalizationConfig) -> str:
    word = DIACRITICS_PATTERN.sub("", word)
    if cfg.map_hamzated_alif:
        word = HAMZATED_ALIF_PATTERN.sub(BARE_ALIF, word)
    if cfg.strip_punctuation:
        word = "".join(ch for ch in word if not _is_punctuation(ch))
    # The Ya rule fires at the word boundary *after* punctuation stripping
    # so that a trailing comma or period cannot mask a final Ya.
    if cfg.map_final_dotted_ya and word.endswith(DOTTED_YA):
        word = word[:-1] + DOTLESS_YA
    if cfg.uppercase_latin:
        word = word.upper()
    return word


def normalize_text(raw: str, cfg: NormalizationConfig = DEFAULT_CONFIG) -> str:
    """Normalize one line of mixed Arabic/English text.

    Total on valid unicode; idempotent; never changes a token's script.

    >>> normalize_text("أنا deep")
    'انا DEEP'
    >>> normalize_text("في [HES] ok.")
    'فى OK'
    """
    for old, new in cfg.replacements:
        raw = raw.replace(old, new)
    out = []
    for word in raw.split():
        if word in NONSPEECH_TAGS:
            if cfg.nonspeech_policy == "keep":
                out.append(word)
            continue
        word = _normalize_word(word, cfg)
        if word:
            out.append(word)
    return " ".join(out)


def normalize_lexicon_keys(words, cfg: NormalizationConfig = DEFAULT_CONFIG):
    """Normalize a set of lexicon headwords, merging duplicates.

    Returns ``(normalized_set, merge_count)`` where ``merge_count`` is the
    number of entries that collapsed onto an already-present form.
    """
    normalized = {normalize_text(w, cfg) for w in words}
    normalized.discard("")
    merges = len(set(words)) - len(normalized)
    return normalized, merges


def load_replacements(path):
    """Read an ordered replacement table: one `old<TAB>new` pair per line.

    Blank lines and lines starting with '#' are skipped.
    """
    pairs = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\r\n")
            if not line or line.startswith("#"):
                continue
            old, new = line.split("\t", 1)
            pairs.append((old, new))
    return tuple(pairs)
