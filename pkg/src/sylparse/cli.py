"""Command-line front end: train, predict, segment, eval.

Exit codes: 0 success, 1 usage error (bad flags, missing files), 2 data
error (malformed corpora, config contents, checkpoints), 3 numeric failure
(divergence).  Diagnostics go to stderr; sentence data goes to --output or
stdout.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from sylparse.corpus import (
    AnnotatedSentence,
    FormatError,
    read_conllu,
    read_raw,
    read_segmented,
    spans_from_tags,
    write_conllu,
    write_segmented,
)
from sylparse.evaluate import format_report, predict, report_records, score
from sylparse.lexicon import Lexicon, initial_tags
from sylparse.model import load_checkpoint
from sylparse.trainer import load_config, train


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the exit codes
        raise UsageError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="sylparse", description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)

    cmd = commands.add_parser("train", help="train a model from a config file")
    cmd.add_argument("--config", required=True, help="key = value training configuration")
    cmd.add_argument("--model", help="checkpoint output path (overrides the config)")
    cmd.add_argument("--seed", type=int, help="random seed (overrides the config)")
    cmd.add_argument("--lexicon", help="extra lexicon file merged into the training one")
    for flag in ("pipeline", "no-initial-bio", "softmax-wseg", "softmax-pos", "no-pos-embedding"):
        cmd.add_argument(f"--{flag}", action="store_true", default=None,
                         help=f"set {flag.replace('-', '_')} = true")

    cmd = commands.add_parser("predict", help="decode sentences to CoNLL-U")
    cmd.add_argument("--model", required=True, help="trained checkpoint")
    cmd.add_argument("--input", help="raw text, one space-separated syllable sentence per line")
    cmd.add_argument("--gold-seg", help="segmented file supplying gold word boundaries")
    cmd.add_argument("--lexicon", help="lexicon file replacing the checkpointed one")
    cmd.add_argument("--output", help="output path (default: stdout)")

    cmd = commands.add_parser("segment", help="segment raw sentences into words")
    cmd.add_argument("--input", required=True, help="raw text input")
    cmd.add_argument("--model", help="trained checkpoint (neural segmentation)")
    cmd.add_argument("--lexicon", help="lexicon file (longest-match segmentation)")
    cmd.add_argument("--output", help="output path (default: stdout)")

    cmd = commands.add_parser("eval", help="score a system CoNLL-U file against gold")
    cmd.add_argument("--gold", required=True, help="gold CoNLL-U file")
    cmd.add_argument("--system", required=True, help="system CoNLL-U file")
    cmd.add_argument("--output", help="write key=value records here instead of stdout")
    return parser


def _require_files(*paths: str | None) -> None:
    for path in paths:
        if path and not os.path.exists(path):
            raise UsageError(f"no such file: {path}")


def _guard_output(output: str | None, inputs) -> None:
    if not output or not os.path.exists(output):
        return
    for path in inputs:
        if path and os.path.exists(path) and os.path.samefile(output, path):
            raise UsageError(f"refusing to overwrite input path {output}")


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def cmd_train(args) -> int:
    _require_files(args.config, args.lexicon)
    overrides = {}
    if args.model is not None:
        overrides["model"] = args.model
    if args.seed is not None:
        overrides["seed"] = args.seed
    for key in ("pipeline", "no_initial_bio", "softmax_wseg", "softmax_pos", "no_pos_embedding"):
        if getattr(args, key):
            overrides[key] = True
    config = load_config(args.config, overrides)
    inputs = (config.train_seg, config.train_pos, config.train_dep,
              config.dev_seg, config.dev_pos, config.dev_dep)
    _require_files(*inputs)
    if config.pretrained_syllables or config.pretrained_words:
        _require_files(config.pretrained_syllables or None, config.pretrained_words or None)
    _guard_output(config.model, inputs)
    _guard_output(config.log_path, inputs)
    extra = Lexicon.load(args.lexicon) if args.lexicon else None
    result = train(config, extra_lexicon=extra)
    print(
        f"best epoch {result.best_epoch} of {len(result.records)}; "
        f"checkpoint: {result.model_path}; log: {result.log_path}",
        file=sys.stderr,
    )
    return 0


def _read_input_sentences(args) -> list[AnnotatedSentence]:
    if args.gold_seg:
        segmented = read_segmented(args.gold_seg)
        if args.input:
            raw = read_raw(args.input)
            if len(raw) != len(segmented):
                raise FormatError(
                    f"{args.input} has {len(raw)} sentences, {args.gold_seg} has {len(segmented)}"
                )
            for index, (syllables, sentence) in enumerate(zip(raw, segmented), start=1):
                if syllables != sentence.syllables:
                    raise FormatError(f"sentence {index}: input and gold segmentation differ")
        return segmented
    if not args.input:
        raise UsageError("predict needs --input or --gold-seg")
    return [AnnotatedSentence(syllables=s) for s in read_raw(args.input)]


def cmd_predict(args) -> int:
    _require_files(args.model, args.input, args.gold_seg, args.lexicon)
    _guard_output(args.output, (args.model, args.input, args.gold_seg, args.lexicon))
    system, lexicon, _ = load_checkpoint(args.model)
    if args.lexicon:
        lexicon = Lexicon.load(args.lexicon)
    sentences = _read_input_sentences(args)
    decoded = predict(system, sentences, lexicon, gold_seg=bool(args.gold_seg))
    _emit(write_conllu(decoded), args.output)
    return 0


def cmd_segment(args) -> int:
    if bool(args.model) == bool(args.lexicon):
        raise UsageError("segment needs exactly one of --model or --lexicon")
    _require_files(args.input, args.model, args.lexicon)
    _guard_output(args.output, (args.input, args.model, args.lexicon))
    raw = read_raw(args.input)
    if args.model:
        system, lexicon, _ = load_checkpoint(args.model)
        sentences = [AnnotatedSentence(syllables=s) for s in raw]
        decoded = predict(system, sentences, lexicon, upto="wseg")
    else:
        lexicon = Lexicon.load(args.lexicon)
        decoded = []
        for syllables in raw:
            if not syllables:
                continue
            tags = initial_tags(syllables, lexicon)
            spans, _ = spans_from_tags(tags)
            decoded.append(AnnotatedSentence(syllables=syllables, boundary_tags=tags, words=spans))
    _emit(write_segmented(decoded), args.output)
    return 0


def cmd_eval(args) -> int:
    _require_files(args.gold, args.system)
    _guard_output(args.output, (args.gold, args.system))
    report = score(read_conllu(args.gold), read_conllu(args.system))
    records = "\n".join(report_records(report)) + "\n"
    if args.output:
        _emit(records, args.output)
        sys.stdout.write(format_report(report) + "\n")
    else:
        sys.stdout.write(format_report(report) + "\n\n" + records)
    return 0


HANDLERS = {"train": cmd_train, "predict": cmd_predict, "segment": cmd_segment, "eval": cmd_eval}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return HANDLERS[args.command](args)
    except UsageError as error:
        print(f"error: {error}", file=sys.stderr)
        print(f"run `{parser.prog} --help` for usage", file=sys.stderr)
        return 1
    except (ValueError, OSError) as error:  # malformed corpora, configs, checkpoints
        print(f"data error: {error}", file=sys.stderr)
        return 2
    except ArithmeticError as error:  # divergence and other numeric failures
        print(f"numeric failure: {error}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
