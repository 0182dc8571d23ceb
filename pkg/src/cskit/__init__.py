"""Evaluation and hypothesis combination for code-switched Arabic-English ASR.

The toolkit consumes text hypothesis files (references, per-system N-best
lists, lexicon, training-text frequency table) and provides:

* orthographic normalization (`textnorm`)
* language-tagged tokenization and intra-word CS parsing (`langtok`)
* code-switching statistics such as the Code-Mixing Index (`metrics`)
* WER/CER scoring with per-language attribution (`scoring`)
* a from-scratch word aligner for paired hypotheses (`aligner`)
* sentence- and word-level hypothesis combination (`combine`)
* synthetic fixture generation for corpus-free evaluation (`fixtures`)
* a command-line interface tying the pipelines together (`cli`)
"""

from . import aligner, cli, combine, errors, fixtures, langtok, metrics, nbest, scoring, textnorm
from .langtok import LanguageTag, Token, Utterance, expand_tokens, tokenize
from .scoring import SystemSource, align_edit, cer, oracle_select, wer
from .textnorm import NormalizationConfig, normalize_text

__all__ = [
    "aligner",
    "cli",
    "combine",
    "errors",
    "fixtures",
    "langtok",
    "metrics",
    "nbest",
    "scoring",
    "textnorm",
    "LanguageTag",
    "Token",
    "Utterance",
    "expand_tokens",
    "tokenize",
    "SystemSource",
    "align_edit",
    "cer",
    "oracle_select",
    "wer",
    "NormalizationConfig",
    "normalize_text",
]

__version__ = "0.1.0"
