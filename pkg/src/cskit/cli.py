"""Command-line surface tying the pipelines together.

Subcommands: normalize, stats, score, oracle, align, combine-sentence,
combine-word, combine-hybrid, train-classifier, gen-fixture.

Every subcommand takes an optional ``--config FILE`` of `key=value` lines
(keys are the long flag names); explicit flags override the file.  Exit
codes: 0 success, 1 validation error, 2 data error.  Results go to files
or standard output, diagnostics to standard error.
"""

import argparse
import sys

from . import aligner as aligner_mod
from . import combine, fixtures, metrics, nbest, scoring, textnorm
from .errors import CskitError, MissingUtterance
from .langtok import expand_tokens
from .scoring import SystemSource

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _norm_config(args) -> textnorm.NormalizationConfig:
    replacements = ()
    if getattr(args, "replacements", None):
        replacements = textnorm.load_replacements(args.replacements)
    return textnorm.NormalizationConfig(
        map_hamzated_alif=not args.no_hamzated_alif,
        map_final_dotted_ya=not args.no_final_ya,
        uppercase_latin=not args.no_uppercase,
        strip_punctuation=not args.keep_punctuation,
        nonspeech_policy="keep" if args.keep_nonspeech else "drop",
        replacements=replacements,
    )


def _add_norm_flags(sub):
    group = sub.add_argument_group("normalization")
    group.add_argument("--no-hamzated-alif", action="store_true",
                       help="keep Hamzated Alif variants as written")
    group.add_argument("--no-final-ya", action="store_true",
                       help="keep word-final dotted Ya as written")
    group.add_argument("--no-uppercase", action="store_true",
                       help="keep Latin casing as written")
    group.add_argument("--keep-punctuation", action="store_true",
                       help="do not strip punctuation")
    group.add_argument("--keep-nonspeech", action="store_true",
                       help="keep non-speech tags like [HES] as tokens")
    group.add_argument("--replacements", metavar="FILE",
                       help="extra `old<TAB>new` replacement table applied first")


def _add_nbest_flags(sub):
    sub.add_argument("--nbest-a", required=True, metavar="FILE",
                     help="system A N-best file (hybrid kind by default)")
    sub.add_argument("--nbest-b", required=True, metavar="FILE",
                     help="system B N-best file (e2e kind by default)")
    sub.add_argument("--kind-a", default=nbest.HYBRID, choices=nbest.SYSTEM_KINDS)
    sub.add_argument("--kind-b", default=nbest.E2E, choices=nbest.SYSTEM_KINDS)
    sub.add_argument("--max-n", type=int, default=nbest.DEFAULT_MAX_N)
    sub.add_argument("--lm-weight", type=float, default=combine.DEFAULT_LM_WEIGHT,
                     help="language-model weight scaling the acoustic score")


def _add_borrow_flags(sub):
    sub.add_argument("--lexicon", required=True, metavar="FILE")
    sub.add_argument("--freq", required=True, metavar="FILE",
                     help="training-text `token<TAB>count` table")
    sub.add_argument("--threshold", type=int, default=combine.DEFAULT_INFREQUENT_THRESHOLD,
                     help="frequency at or below which an in-lexicon word is infrequent")
    sub.add_argument("--iterations", type=int, default=aligner_mod.DEFAULT_ITERATIONS)
    sub.add_argument("--tension", type=float, default=aligner_mod.DEFAULT_TENSION)
    sub.add_argument("--no-borrow-hybrid-to-e2e", action="store_true")
    sub.add_argument("--no-borrow-e2e-to-hybrid", action="store_true")


def _policy(args) -> combine.BorrowPolicy:
    return combine.BorrowPolicy(
        infrequent_threshold=args.threshold,
        enable_hybrid_to_e2e=not args.no_borrow_hybrid_to_e2e,
        enable_e2e_to_hybrid=not args.no_borrow_e2e_to_hybrid,
    )


def _load_pair(args, cfg):
    lists_a = nbest.load_nbest(args.nbest_a, args.kind_a, "A", args.max_n, cfg)
    lists_b = nbest.load_nbest(args.nbest_b, args.kind_b, "B", args.max_n, cfg)
    return lists_a, lists_b


def _open_out(path):
    return open(path, "w", encoding="utf-8") if path and path != "-" else sys.stdout


def _print_report(report, fmt, out=None):
    out = out or sys.stdout
    lines = report.kv_lines() if fmt == "kv" else report.table_lines()
    for line in lines:
        print(line, file=out)


def _score_corpus(refs, hyp_tokens_by_utt):
    """Merge per-utterance WER reports over the reference ids."""
    reports = []
    morph = scoring.MorphCsReport()
    for utt_id in sorted(refs):
        if utt_id not in hyp_tokens_by_utt:
            raise MissingUtterance(utt_id)
        ref = expand_tokens(refs[utt_id].tokens)
        hyp = expand_tokens(hyp_tokens_by_utt[utt_id])
        alignment = scoring.align_edit(ref, hyp)
        reports.append((utt_id, scoring.wer(ref, hyp, alignment)))
        morph.add(scoring.morph_cs_wer(ref, hyp, alignment))
    total = scoring.merge_wer_reports(r for _, r in reports)
    return total, reports, morph


def _combined_tokens(results):
    return {utt_id: res.tokens for utt_id, res in results.items()}


def _write_combined(results, out):
    for utt_id in sorted(results):
        res = results[utt_id]
        print(f"{utt_id}\t{res.source.value}\t{len(res.replacements)}\t{res.text}", file=out)


def _report_combination(args, refs_path, results, cfg):
    if not refs_path:
        return
    refs = nbest.load_references(refs_path, cfg)
    total, _, _ = _score_corpus(refs, _combined_tokens(results))
    n_a = sum(1 for r in results.values() if r.source is SystemSource.A)
    n_replaced = sum(len(r.replacements) for r in results.values())
    print(f"pct_from_A={100.0 * n_a / len(results):.1f}")
    print(f"pct_from_B={100.0 * (len(results) - n_a) / len(results):.1f}")
    print(f"n_word_replacements={n_replaced}")
    _print_report(total, args.format)


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_normalize(args):
    cfg = _norm_config(args)
    source = open(args.input, encoding="utf-8") if args.input else sys.stdin
    out = _open_out(args.output)
    try:
        for line in source:
            line = line.rstrip("\r\n")
            if args.tsv and "\t" in line:
                utt_id, text = line.split("\t", 1)
                print(f"{utt_id}\t{textnorm.normalize_text(text, cfg)}", file=out)
            else:
                print(textnorm.normalize_text(line, cfg), file=out)
    finally:
        if source is not sys.stdin:
            source.close()
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def cmd_stats(args):
    cfg = _norm_config(args)
    refs = nbest.load_references(args.refs, cfg)
    inventory = None
    if args.affixes:
        from .langtok import load_affix_inventory

        inventory = load_affix_inventory(args.affixes)
    report = metrics.corpus_report(
        [refs[u] for u in sorted(refs)], inventory, args.cmi_mode
    )
    _print_report(report, args.format)
    return EXIT_OK


def cmd_score(args):
    cfg = _norm_config(args)
    refs = nbest.load_references(args.refs, cfg)
    hyps = nbest.load_references(args.hyps, cfg)
    total, per_utt, morph = _score_corpus(refs, {u: h.tokens for u, h in hyps.items()})
    _print_report(total, args.format)
    if args.cer:
        distance = chars = 0
        for utt_id in sorted(refs):
            d, n = scoring.cer_counts(refs[utt_id].text, hyps[utt_id].text)
            distance += d
            chars += n
        print(f"cer={distance / chars:.6f}")
        print(f"cer_pct={100.0 * distance / chars:.1f}")
    if not morph.is_empty:
        print(f"morph_overall_wer_pct={100.0 * morph.overall_rate:.1f}")
        print(f"morph_affix_wer_pct={100.0 * morph.arabic_affix_rate:.1f}")
        print(f"morph_stem_wer_pct={100.0 * morph.english_stem_rate:.1f}")
    if args.per_utt:
        with open(args.per_utt, "w", encoding="utf-8") as f:
            for utt_id, report in per_utt:
                f.write(
                    f"{utt_id}\t{report.wer:.6f}\t{report.n_sub}\t{report.n_del}\t{report.n_ins}\n"
                )
    return EXIT_OK


def cmd_oracle(args):
    cfg = _norm_config(args)
    refs = nbest.load_references(args.refs, cfg)
    hyps_a = nbest.load_references(args.hyps_a, cfg)
    hyps_b = nbest.load_references(args.hyps_b, cfg)
    chosen = {}
    n_a = 0
    for utt_id in sorted(refs):
        if utt_id not in hyps_a or utt_id not in hyps_b:
            raise MissingUtterance(utt_id)
        ref = expand_tokens(refs[utt_id].tokens)
        tokens, source = scoring.oracle_select(
            ref,
            expand_tokens(hyps_a[utt_id].tokens),
            expand_tokens(hyps_b[utt_id].tokens),
        )
        chosen[utt_id] = tokens
        n_a += source is SystemSource.A
    total, _, _ = _score_corpus(refs, chosen)
    print(f"pct_from_A={100.0 * n_a / len(refs):.1f}")
    print(f"pct_from_B={100.0 * (len(refs) - n_a) / len(refs):.1f}")
    _print_report(total, args.format)
    return EXIT_OK


def cmd_align(args):
    cfg = _norm_config(args)
    src = nbest.load_references(args.source, cfg)
    tgt = nbest.load_references(args.target, cfg)
    for utt_id in sorted(src):
        if utt_id not in tgt:
            raise MissingUtterance(utt_id)
    for utt_id in sorted(tgt):
        if utt_id not in src:
            raise MissingUtterance(utt_id)
    pairs = [(src[u].tokens, tgt[u].tokens) for u in sorted(src)]
    model = aligner_mod.train_bidirectional(pairs, args.iterations, args.tension)
    out = _open_out(args.output)
    try:
        for utt_id in sorted(src):
            links = model.links(src[utt_id].tokens, tgt[utt_id].tokens)
            print(f"{utt_id}\t{links.to_pharaoh()}", file=out)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _run_combination(args, word_level, fixed_base=None):
    cfg = _norm_config(args)
    lists_a, lists_b = _load_pair(args, cfg)
    lexicon = freq = None
    policy = None
    if word_level:
        lexicon = nbest.load_lexicon(args.lexicon, cfg)
        freq = nbest.load_frequency_table(args.freq, cfg)
        policy = _policy(args)
    model = None
    selector = getattr(args, "selector", "confidence")
    if selector == "classifier" and fixed_base is None:
        if not args.model:
            raise _UsageError("--selector classifier requires --model (train on a separate split)")
        model = combine.load_model(args.model)
    results = combine.hybrid_combine(
        lists_a,
        lists_b,
        lexicon,
        freq,
        policy,
        selector=selector,
        model=model,
        lm_weight=args.lm_weight,
        feature_mode=getattr(args, "feature_mode", "both"),
        word_level=word_level,
        fixed_base=fixed_base,
    )
    out = _open_out(args.output)
    try:
        _write_combined(results, out)
    finally:
        if out is not sys.stdout:
            out.close()
    _report_combination(args, args.refs, results, cfg)
    return EXIT_OK


def cmd_combine_sentence(args):
    return _run_combination(args, word_level=False)


def cmd_combine_word(args):
    return _run_combination(args, word_level=True, fixed_base=SystemSource(args.base))


def cmd_combine_hybrid(args):
    return _run_combination(args, word_level=True)


def cmd_train_classifier(args):
    cfg = _norm_config(args)
    refs = nbest.load_references(args.refs, cfg)
    lists_a, lists_b = _load_pair(args, cfg)
    features = []
    labels = []
    for utt_id in sorted(refs):
        if utt_id not in lists_a or utt_id not in lists_b:
            raise MissingUtterance(utt_id)
        tokens_a = lists_a[utt_id].one_best.tokens
        tokens_b = lists_b[utt_id].one_best.tokens
        conf_a = combine.confidence_for(lists_a[utt_id], args.lm_weight)
        conf_b = combine.confidence_for(lists_b[utt_id], args.lm_weight)
        features.append(combine.SelectorFeatures.build(conf_a, conf_b, tokens_a, tokens_b))
        ref = expand_tokens(refs[utt_id].tokens)
        _, source = scoring.oracle_select(
            ref, expand_tokens(tokens_a), expand_tokens(tokens_b)
        )
        labels.append(source.value)
    model = combine.train_selector(features, labels, args.feature_mode)
    combine.save_model(model, args.model_out)
    correct = sum(
        model.predict(f.vector(args.feature_mode)) == label
        for f, label in zip(features, labels)
    )
    print(f"n_train={len(labels)}")
    print(f"train_accuracy_pct={100.0 * correct / len(labels):.1f}")
    print(f"pct_label_A={100.0 * labels.count('A') / len(labels):.1f}")
    print(f"model={args.model_out}")
    return EXIT_OK


def cmd_gen_fixture(args):
    spec = fixtures.FixtureSpec(
        n_sentences=args.sentences,
        cs_ratio=args.cs_ratio,
        arabic_share=args.arabic_share,
        p_a=args.error_rate_a,
        p_b=args.error_rate_b,
        q_a=args.cross_rate_a,
        q_b=args.cross_rate_b,
        nbest_size=args.nbest,
        score_noise=args.score_noise,
        lex_oov_share=args.lex_oov_share,
        lex_infrequent_share=args.lex_infrequent_share,
        seed=args.seed,
    )
    try:
        spec.validate()
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    fixture = fixtures.generate(spec)
    paths = fixtures.write_fixture(fixture, args.out)
    for name in sorted(paths):
        print(f"{name}={paths[name]}")
    print(f"wer_a={fixture.wer_a:.6f}")
    print(f"wer_b={fixture.wer_b:.6f}")
    print(f"oracle_wer={fixture.oracle_wer:.6f}")
    return EXIT_OK


# --------------------------------------------------------------------------
# parser assembly and config-file handling
# --------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="cskit", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    registry = {}

    def sub(name, func, **kwargs):
        p = subs.add_parser(name, **kwargs)
        p.set_defaults(func=func)
        p.add_argument("--config", metavar="FILE",
                       help="key=value defaults; explicit flags override")
        registry[name] = p
        return p

    p = sub("normalize", cmd_normalize, help="normalize raw transcript text")
    p.add_argument("--input", metavar="FILE", help="default: standard input")
    p.add_argument("--output", metavar="FILE", help="default: standard output")
    p.add_argument("--tsv", action="store_true",
                   help="treat input as `utt_id<TAB>text` and keep the id")
    _add_norm_flags(p)

    p = sub("stats", cmd_stats, help="code-switching statistics of a corpus")
    p.add_argument("--refs", required=True, metavar="FILE")
    p.add_argument("--affixes", metavar="FILE", help="custom affix inventory table")
    p.add_argument("--cmi-mode", default="sentence_mean",
                   choices=("sentence_mean", "token_weighted"))
    p.add_argument("--format", default="kv", choices=("table", "kv"))
    _add_norm_flags(p)

    p = sub("score", cmd_score, help="WER of a hypothesis file against references")
    p.add_argument("--refs", required=True, metavar="FILE")
    p.add_argument("--hyps", required=True, metavar="FILE")
    p.add_argument("--cer", action="store_true", help="also report character error rate")
    p.add_argument("--per-utt", metavar="FILE", help="write per-utterance `utt wer S D I`")
    p.add_argument("--format", default="kv", choices=("table", "kv"))
    _add_norm_flags(p)

    p = sub("oracle", cmd_oracle, help="per-utterance lower-WER selection bound")
    p.add_argument("--refs", required=True, metavar="FILE")
    p.add_argument("--hyps-a", required=True, metavar="FILE")
    p.add_argument("--hyps-b", required=True, metavar="FILE")
    p.add_argument("--format", default="kv", choices=("table", "kv"))
    _add_norm_flags(p)

    p = sub("align", cmd_align, help="align paired hypotheses, Pharaoh output")
    p.add_argument("--source", required=True, metavar="FILE")
    p.add_argument("--target", required=True, metavar="FILE")
    p.add_argument("--iterations", type=int, default=aligner_mod.DEFAULT_ITERATIONS)
    p.add_argument("--tension", type=float, default=aligner_mod.DEFAULT_TENSION)
    p.add_argument("--output", metavar="FILE")
    _add_norm_flags(p)

    p = sub("combine-sentence", cmd_combine_sentence,
            help="sentence-level selection between two systems")
    _add_nbest_flags(p)
    p.add_argument("--selector", default="confidence", choices=("confidence", "classifier"))
    p.add_argument("--model", metavar="FILE", help="trained discriminant model")
    p.add_argument("--feature-mode", default="both", choices=("both", "a", "b"))
    p.add_argument("--refs", metavar="FILE", help="score the combined output")
    p.add_argument("--output", metavar="FILE")
    p.add_argument("--format", default="kv", choices=("table", "kv"))
    _add_norm_flags(p)

    p = sub("combine-word", cmd_combine_word,
            help="word-level borrowing into a fixed base system")
    _add_nbest_flags(p)
    p.add_argument("--base", required=True, choices=("A", "B"),
                   help="system whose 1-best is the base hypothesis")
    _add_borrow_flags(p)
    p.add_argument("--refs", metavar="FILE")
    p.add_argument("--output", metavar="FILE")
    p.add_argument("--format", default="kv", choices=("table", "kv"))
    _add_norm_flags(p)

    p = sub("combine-hybrid", cmd_combine_hybrid,
            help="sentence-level selection chained into word-level borrowing")
    _add_nbest_flags(p)
    p.add_argument("--selector", default="confidence", choices=("confidence", "classifier"))
    p.add_argument("--model", metavar="FILE")
    p.add_argument("--feature-mode", default="both", choices=("both", "a", "b"))
    _add_borrow_flags(p)
    p.add_argument("--refs", metavar="FILE")
    p.add_argument("--output", metavar="FILE")
    p.add_argument("--format", default="kv", choices=("table", "kv"))
    _add_norm_flags(p)

    p = sub("train-classifier", cmd_train_classifier,
            help="train the system-selection discriminant on a labeled split")
    p.add_argument("--refs", required=True, metavar="FILE",
                   help="references of the TRAINING split (never the scored set)")
    _add_nbest_flags(p)
    p.add_argument("--feature-mode", default="both", choices=("both", "a", "b"))
    p.add_argument("--model-out", required=True, metavar="FILE")
    _add_norm_flags(p)

    p = sub("gen-fixture", cmd_gen_fixture,
            help="generate a synthetic corpus with planted errors")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--sentences", type=int, default=100)
    p.add_argument("--cs-ratio", type=float, default=0.6)
    p.add_argument("--arabic-share", type=float, default=0.65)
    p.add_argument("--error-rate-a", type=float, default=0.2,
                   help="system A corruption rate on Arabic tokens")
    p.add_argument("--error-rate-b", type=float, default=0.2,
                   help="system B corruption rate on English tokens")
    p.add_argument("--cross-rate-a", type=float, default=0.0,
                   help="system A corruption rate on English tokens")
    p.add_argument("--cross-rate-b", type=float, default=0.0,
                   help="system B corruption rate on Arabic tokens")
    p.add_argument("--nbest", type=int, default=5)
    p.add_argument("--score-noise", type=float, default=0.0)
    p.add_argument("--lex-oov-share", type=float, default=0.3)
    p.add_argument("--lex-infrequent-share", type=float, default=0.4)
    p.add_argument("--seed", type=int, default=0)

    # required flags are validated after config-file defaults are applied,
    # so a config file can satisfy them
    requirements = {}
    for name, subparser in registry.items():
        deferred = [a for a in subparser._actions if a.required and a.option_strings]
        for action in deferred:
            action.required = False
        requirements[name] = deferred

    parser._registry = registry
    parser._requirements = requirements
    return parser


def _coerce(action, value):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        lowered = value.strip().lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise _UsageError(f"config key {action.dest}: boolean expected, got {value!r}")
    if action.type is not None:
        return action.type(value)
    return value


def _apply_config(parser, sub, path):
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise _UsageError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            dest = key.strip().replace("-", "_")
            if dest not in actions or dest in ("help", "config"):
                raise _UsageError(f"{path}:{lineno}: unknown config key {key.strip()!r}")
            defaults[dest] = _coerce(actions[dest], value.strip())
    sub.set_defaults(**defaults)


def run_subcommand(argv) -> int:
    """Parse argv, run the matching subcommand, return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_VALIDATION
        if args.config:
            _apply_config(parser, parser._registry[args.command], args.config)
            args = parser.parse_args(argv)
        missing = [
            action.option_strings[0]
            for action in parser._requirements[args.command]
            if getattr(args, action.dest) is None
        ]
        if missing:
            raise _UsageError(f"the following arguments are required: {', '.join(missing)}")
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (CskitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main(argv=None):
    sys.exit(run_subcommand(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
