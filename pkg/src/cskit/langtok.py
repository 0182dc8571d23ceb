"""Tokenization, per-token language tagging, and intra-word CS parsing.

A sentence is split on whitespace and every word gets exactly one tag:

* all Arabic-script letters      -> Arabic
* all Latin-script letters       -> English
* `prefix+STEM#suffix` annotated -> MorphCS (an Arabic affix attached to a
  Latin stem; the compound is carried with its decomposition)
* digits, bracketed tags, or anything unclassifiable -> LanguageIndependent

Intra-word code-switching is annotated in the transcripts as
``prefix+STEM#suffix`` with Arabic affixes around a Latin stem, e.g.
``ال+TASK#ات`` (the tasks).  ``expand_tokens`` splits such
compounds into their constituent tokens so that counting and scoring treat
the Arabic affixes and the English stem as separate tokens.
"""

import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources

from .errors import MalformedMorphAnnotation


class LanguageTag(Enum):
    ARABIC = "arabic"
    ENGLISH = "english"
    MORPH_CS = "morph_cs"
    LANG_INDEPENDENT = "lang_independent"


@dataclass(frozen=True)
class MorphDecomposition:
    """Constituents of a `prefix+STEM#suffix` compound.

    At least one affix is present; the stem is non-empty Latin script.
    Circumfixes appear as a prefix part plus a suffix part.
    """

    prefix: str | None
    stem: str
    suffix: str | None

    def __post_init__(self):
        if not self.prefix and not self.suffix:
            raise ValueError("morphological decomposition needs at least one affix")
        if not self.stem:
            raise ValueError("morphological decomposition needs a non-empty stem")

    def serialize(self) -> str:
        out = ""
        if self.prefix:
            out += self.prefix + "+"
        out += self.stem
        if self.suffix:
            out += "#" + self.suffix
        return out


@dataclass(frozen=True)
class Token:
    """One surface word with its language tag.

    ``decomposition`` is present iff ``tag == MORPH_CS``.  ``morph_role``
    is set on tokens produced by ``expand_tokens`` ("affix" or "stem") so
    that scoring can restrict error counting to intra-word CS material.
    """

    surface: str
    tag: LanguageTag
    decomposition: MorphDecomposition | None = None
    morph_role: str | None = None

    def __post_init__(self):
        if (self.tag is LanguageTag.MORPH_CS) != (self.decomposition is not None):
            raise ValueError("decomposition present iff tag is MORPH_CS")


@dataclass(frozen=True)
class Utterance:
    utt_id: str
    tokens: tuple
    text: str

    def __len__(self):
        return len(self.tokens)


ARABIC_LETTER = re.compile(r"[ء-يٮ-ۓۺ-ۿ]")
LATIN_LETTER = re.compile(r"[A-Za-z]")
BRACKETED_TAG = re.compile(r"^\[[A-Z]+\]$")

# prefix+STEM#suffix with either affix optional (but not both absent)
MORPH_PATTERN = re.compile(
    r"^(?:(?P<prefix>[ء-يٮ-ۓ]+)\+)?"
    r"(?P<stem>[A-Za-z]+)"
    r"(?:#(?P<suffix>[ء-يٮ-ۓ]+))?$"
)


def _parse_morph(word: str) -> MorphDecomposition:
    m = MORPH_PATTERN.match(word)
    if m is None or (m.group("prefix") is None and m.group("suffix") is None):
        raise MalformedMorphAnnotation(
            f"cannot parse {word!r} as [arabic]+LATIN#[arabic]"
        )
    return MorphDecomposition(m.group("prefix"), m.group("stem"), m.group("suffix"))


def classify_word(word: str) -> LanguageTag:
    """Tag a single whitespace-delimited word by script."""
    if BRACKETED_TAG.match(word):
        return LanguageTag.LANG_INDEPENDENT
    if "+" in word or "#" in word:
        return LanguageTag.MORPH_CS
    has_ar = bool(ARABIC_LETTER.search(word))
    has_la = bool(LATIN_LETTER.search(word))
    if has_ar and has_la:
        warnings.warn(
            f"mixed-script word without +/# markers tagged language-independent: {word!r}"
        )
        return LanguageTag.LANG_INDEPENDENT
    if has_ar:
        return LanguageTag.ARABIC
    if has_la:
        return LanguageTag.ENGLISH
    return LanguageTag.LANG_INDEPENDENT


def tokenize(sentence: str) -> list:
    """Split a normalized sentence into language-tagged tokens.

    Raises MalformedMorphAnnotation when a word contains '+' or '#' but
    does not match the `prefix+STEM#suffix` pattern.
    """
    tokens = []
    for word in sentence.split():
        tag = classify_word(word)
        if tag is LanguageTag.MORPH_CS:
            tokens.append(Token(word, tag, _parse_morph(word)))
        else:
            tokens.append(Token(word, tag))
    return tokens


def expand_tokens(tokens) -> list:
    """Replace each MorphCS compound by its constituent tokens in place.

    Affixes come out tagged Arabic, the stem English; every constituent
    carries a ``morph_role`` so intra-word CS can be scored separately.
    All other tokens pass through unchanged.  Idempotent.
    """
    out = []
    for tok in tokens:
        if tok.tag is not LanguageTag.MORPH_CS:
            out.append(tok)
            continue
        dec = tok.decomposition
        if dec.prefix:
            out.append(Token(dec.prefix, LanguageTag.ARABIC, morph_role="affix"))
        out.append(Token(dec.stem, LanguageTag.ENGLISH, morph_role="stem"))
        if dec.suffix:
            out.append(Token(dec.suffix, LanguageTag.ARABIC, morph_role="affix"))
    return out


def serialize(tokens) -> str:
    return " ".join(t.surface for t in tokens)


# --------------------------------------------------------------------------
# Affix inventory
# --------------------------------------------------------------------------

AFFIX_CLASSES = ("proclitic", "prefix", "enclitic", "suffix", "circumfix", "combination")
CIRCUMFIX_SEP = "..."


@dataclass(frozen=True)
class AffixEntry:
    affix_class: str
    form: str  # circumfix forms are written `prefixpart...suffixpart`
    gloss: str
    frequency: int

    @property
    def is_circumfix_shaped(self) -> bool:
        return CIRCUMFIX_SEP in self.form

    def parts(self):
        """(prefix part, suffix part) for circumfix-shaped forms."""
        pre, suf = self.form.split(CIRCUMFIX_SEP, 1)
        return pre, suf


@dataclass
class AffixInventory:
    """Known Arabic affixes and clitics occurring in intra-word CS.

    The default content ships with the package; extra entries can be
    loaded from a `class<TAB>affix<TAB>gloss<TAB>frequency` table.
    """

    entries: list = field(default_factory=list)

    def __post_init__(self):
        self._by_class = {}
        for entry in self.entries:
            self._index(entry)

    def _index(self, entry):
        self._by_class.setdefault(entry.affix_class, {})[entry.form] = entry

    def add(self, entry: AffixEntry):
        if entry.affix_class not in AFFIX_CLASSES:
            raise ValueError(f"unknown affix class {entry.affix_class!r}")
        self.entries.append(entry)
        self._index(entry)

    def forms(self, affix_class: str) -> dict:
        return self._by_class.get(affix_class, {})

    def circumfix_pair(self, prefix: str, suffix: str):
        """Look up a (prefix part, suffix part) circumfix or combination."""
        form = f"{prefix}{CIRCUMFIX_SEP}{suffix}"
        for cls in ("circumfix", "combination"):
            entry = self._by_class.get(cls, {}).get(form)
            if entry is not None:
                return entry
        return None


def load_affix_inventory(path=None) -> AffixInventory:
    """Load an affix table; with no path, the packaged default."""
    if path is None:
        text = resources.files("cskit.data").joinpath("affixes.tsv").read_text("utf-8")
        lines = text.splitlines()
        source = "<default>"
    else:
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        source = str(path)
    inv = AffixInventory()
    for lineno, line in enumerate(lines, 1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 4:
            raise ValueError(f"{source}:{lineno}: expected 4 tab-separated fields")
        cls, form, gloss, freq = fields
        inv.add(AffixEntry(cls, form, gloss, int(freq.replace(",", ""))))
    return inv


def classify_affix(affix: str, inventory: AffixInventory, side: str | None = None) -> str:
    """Classify an affix string against the inventory.

    ``side`` narrows the search to prefix-side or suffix-side classes when
    the position within the compound is known (the same surface form can
    be e.g. both a proclitic and a verb prefix).  Returns one of
    'proclitic', 'prefix', 'enclitic', 'suffix', 'combination',
    'circumfix_part', or 'unknown'.
    """
    if side == "prefix":
        order = ("proclitic", "prefix", "combination")
    elif side == "suffix":
        order = ("enclitic", "suffix")
    elif side is None:
        order = ("proclitic", "prefix", "enclitic", "suffix", "combination")
    else:
        raise ValueError(f"side must be 'prefix', 'suffix' or None, got {side!r}")
    for cls in order:
        forms = inventory.forms(cls)
        if affix in forms and not forms[affix].is_circumfix_shaped:
            return cls
    for cls in ("circumfix", "combination"):
        for entry in inventory.forms(cls).values():
            if not entry.is_circumfix_shaped:
                continue
            pre, suf = entry.parts()
            if side in (None, "prefix") and affix == pre:
                return "circumfix_part"
            if side in (None, "suffix") and affix == suf:
                return "circumfix_part"
    return "unknown"
