"""Command-line entry point.

Subcommands: ingest, synth, split, match, train, extract, evaluate.
Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import synthgen
from .corpus import (
    AttributeLabel,
    POSITIVE_LABELS,
    CorpusError,
    candidate_pairs,
    default_lexicon,
    filter_sentences,
    parse_corpus,
    parse_lexicon,
    render_corpus,
    split_corpus,
)
from .evaluation import (
    EvalError,
    machine_lines,
    parse_predictions,
    render_predictions,
    render_report,
    score,
)
from .features import KeywordParams
from .hierarchy import (
    DEFAULT_FAST_TRACK,
    FastTrackRule,
    HierarchyConfig,
    HierarchyError,
    LEAF_NODE,
    RELEVANCE_NODE,
)
from .modelio import ModelFormatError, deserialize_bundle, serialize_bundle
from .pipeline import extract_pipeline, train_pipeline
from .svm import SvmError, SvmParams
from .templates import RuleError, default_rules, parse_rules

DATA_ERRORS = (
    CorpusError,
    RuleError,
    ModelFormatError,
    EvalError,
    SvmError,
    HierarchyError,
    ValueError,
    OSError,
)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for data errors; usage errors exit 1
    def error(self, message):
        raise _UsageError(message)


def parse_config_text(text: str) -> HierarchyConfig:
    """`key = value` hierarchy/fast-track config.

    Keys: hierarchy.layers (comma list of relevance/leaf),
    fasttrack.N.cond (e1=TAG / e2=TAG constraints, comma-joined, * = any),
    fasttrack.N.target, fasttrack.off (true disables the default rule).
    """
    layers = None
    ft_cond: dict[int, str] = {}
    ft_target: dict[int, str] = {}
    ft_off = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = (part.strip() for part in line.partition("="))
        if not sep:
            raise CorpusError("expected key = value", lineno)
        if key == "hierarchy.layers":
            layers = value
        elif key == "fasttrack.off":
            ft_off = value.lower() in ("1", "true", "yes")
        elif key.startswith("fasttrack."):
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in ("cond", "target"):
                raise CorpusError(f"unknown key {key!r}", lineno)
            try:
                n = int(parts[1])
            except ValueError:
                raise CorpusError(f"bad fasttrack index in {key!r}", lineno) from None
            (ft_cond if parts[2] == "cond" else ft_target)[n] = value
        else:
            raise CorpusError(f"unknown key {key!r}", lineno)

    nodes = []
    if layers is not None:
        for name in layers.split(","):
            name = name.strip()
            if name == "relevance":
                nodes.append(RELEVANCE_NODE)
            elif name == "leaf":
                nodes.append(LEAF_NODE)
            else:
                raise CorpusError(f"unknown layer {name!r}")
        layer_tuple = tuple(nodes)
    else:
        layer_tuple = (RELEVANCE_NODE, LEAF_NODE)

    if ft_off:
        fast_track: tuple[FastTrackRule, ...] = ()
    elif ft_cond or ft_target:
        rules = []
        for n in sorted(set(ft_cond) | set(ft_target)):
            if n not in ft_cond or n not in ft_target:
                raise CorpusError(f"fasttrack.{n} needs both cond and target")
            e1_ne = e2_ne = None
            cond = ft_cond[n]
            if cond not in ("", "*"):
                for clause in cond.split(","):
                    slot, sep2, tag = clause.strip().partition("=")
                    if not sep2 or slot not in ("e1", "e2"):
                        raise CorpusError(f"bad condition {clause!r}")
                    if slot == "e1":
                        e1_ne = tag
                    else:
                        e2_ne = tag
            rules.append(
                FastTrackRule(
                    priority=n,
                    target=AttributeLabel[ft_target[n]],
                    e1_ne=e1_ne,
                    e2_ne=e2_ne,
                )
            )
        fast_track = tuple(rules)
    else:
        fast_track = DEFAULT_FAST_TRACK
    return HierarchyConfig(layers=layer_tuple, fast_track=fast_track)


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_rules(path: str | None, lexicon):
    if path is None:
        return default_rules(lexicon)
    return parse_rules(_read(path), lexicon)


def _load_lexicon(path: str | None):
    if path is None:
        return default_lexicon()
    return parse_lexicon(_read(path))


def _fraction(text: str) -> float:
    return float(Fraction(text))


def build_parser() -> _Parser:
    parser = _Parser(prog="attrforge")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus and print stats")
    p.add_argument("corpus")

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--n", type=int, default=2400)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--vocab-size", type=int, default=400)
    p.add_argument("--alphabet", choices=("ascii", "tibetan"), default="ascii")
    p.add_argument("--other-frac", type=_fraction, default=None)

    p = sub.add_parser("split", help="seeded train/test split of a corpus")
    p.add_argument("corpus")
    p.add_argument("--fraction", type=_fraction, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--train-out", required=True)
    p.add_argument("--test-out", required=True)

    p = sub.add_parser("match", help="template-only extraction plus report")
    p.add_argument("corpus")
    p.add_argument("--rules")
    p.add_argument("--lexicon")
    p.add_argument("-o", "--output")

    p = sub.add_parser("train", help="train a model file from a corpus")
    p.add_argument("corpus")
    p.add_argument("-o", "--model", required=True)
    p.add_argument("--rules", help="seed keywords from rule literals")
    p.add_argument("--lexicon")
    p.add_argument("--config", help="hierarchy / fast-track config file")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--eps", type=float, default=1e-8)
    p.add_argument("--max-passes", type=int, default=50)
    p.add_argument("--min-frequency", type=int, default=3)
    p.add_argument("--top-k", type=int, default=200)

    p = sub.add_parser("extract", help="extract predictions from a corpus")
    p.add_argument("corpus")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--rules")
    p.add_argument("--lexicon")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--svm-only", action="store_true")
    mode.add_argument("--template-only", action="store_true")

    p = sub.add_parser("evaluate", help="score a predictions file against gold")
    p.add_argument("predictions")
    p.add_argument("--gold", required=True)
    p.add_argument("--machine", action="store_true")
    return parser


def cmd_ingest(args) -> int:
    sentences = parse_corpus(_read(args.corpus))
    kept, rejected = filter_sentences(sentences)
    n_tokens = sum(len(s.tokens) for s in sentences)
    n_cands = sum(len(candidate_pairs(s)) for s in kept)
    hist = {lab.name: 0 for lab in POSITIVE_LABELS}
    other = 0
    for s in sentences:
        for ann in s.gold:
            if ann.label is AttributeLabel.Other:
                other += 1
            else:
                hist[ann.label.name] += 1
    print(f"sentences\t{len(sentences)}")
    print(f"tokens\t{n_tokens}")
    print(f"kept\t{len(kept)}")
    print(f"rejected\t{len(rejected)}")
    print(f"candidates\t{n_cands}")
    for name, count in hist.items():
        print(f"gold.{name}\t{count}")
    if other:
        print(f"gold.Other\t{other}")
    return 0


def cmd_synth(args) -> int:
    mix = None
    if args.other_frac is not None:
        pos = (1.0 - args.other_frac) / len(POSITIVE_LABELS)
        mix = {lab: pos for lab in POSITIVE_LABELS}
        mix[AttributeLabel.Other] = args.other_frac
    params_kwargs = dict(
        seed=args.seed,
        n_sentences=args.n,
        noise=args.noise,
        vocab_size=args.vocab_size,
        alphabet=args.alphabet,
    )
    if mix is not None:
        params_kwargs["label_mix"] = mix
    text = synthgen.generate(synthgen.GenParams(**params_kwargs))
    Path(args.output).write_text(text, encoding="utf-8")
    print(f"wrote {args.output}")
    return 0


def cmd_split(args) -> int:
    sentences = parse_corpus(_read(args.corpus))
    train, test = split_corpus(sentences, args.fraction, args.seed)
    Path(args.train_out).write_text(render_corpus(train), encoding="utf-8")
    Path(args.test_out).write_text(render_corpus(test), encoding="utf-8")
    print(f"train\t{len(train)}")
    print(f"test\t{len(test)}")
    return 0


def cmd_match(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    rules = _load_rules(args.rules, lexicon)
    sentences = parse_corpus(_read(args.corpus))
    predictions = extract_pipeline(sentences, rules=rules, mode="template")
    if args.output:
        Path(args.output).write_text(
            render_predictions(predictions), encoding="utf-8"
        )
    print(render_report(score(predictions, sentences)), end="")
    return 0


def cmd_train(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    rules = parse_rules(_read(args.rules), lexicon) if args.rules else None
    config = (
        parse_config_text(_read(args.config)) if args.config else None
    )
    sentences = parse_corpus(_read(args.corpus))
    bundle = train_pipeline(
        sentences,
        rules=rules,
        config=config,
        svm_params=SvmParams(args.c, args.tol, args.eps, args.max_passes),
        keyword_params=KeywordParams(args.min_frequency, args.top_k),
    )
    Path(args.model).write_bytes(serialize_bundle(bundle))
    print(f"wrote {args.model} ({len(bundle.fmap)} features)")
    return 0


def cmd_extract(args) -> int:
    lexicon = _load_lexicon(args.lexicon)
    bundle = deserialize_bundle(Path(args.model).read_bytes())
    mode = "hybrid"
    if args.svm_only:
        mode = "svm"
    elif args.template_only:
        mode = "template"
    rules = None
    if mode != "svm":
        rules = _load_rules(args.rules, lexicon)
    sentences = parse_corpus(_read(args.corpus))
    predictions = extract_pipeline(sentences, bundle, rules, mode=mode)
    Path(args.output).write_text(
        render_predictions(predictions), encoding="utf-8"
    )
    print(f"wrote {args.output} ({len(predictions)} predictions)")
    return 0


def cmd_evaluate(args) -> int:
    sentences = parse_corpus(_read(args.gold))
    predictions = parse_predictions(_read(args.predictions))
    report = score(predictions, sentences)
    if args.machine:
        print(machine_lines(report), end="")
    else:
        print(render_report(report), end="")
    return 0


_COMMANDS = {
    "ingest": cmd_ingest,
    "synth": cmd_synth,
    "split": cmd_split,
    "match": cmd_match,
    "train": cmd_train,
    "extract": cmd_extract,
    "evaluate": cmd_evaluate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
