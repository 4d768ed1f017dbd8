"""Command-line interface: learn, predict, evaluate, lint, demo-corpus.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 no fix found.
JSON results go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .corpus import CorpusError, generate_synthetic, load_corpus, write_corpus
from .edits import BugReport
from .learn import DEFAULT_MIN_SUPPORT, PatternSet
from .lint import analyze, load_config
from .minijava import ParseError, SourceFile
from .pipeline import cross_validate, learn_from_pairs, predict_fixes
from .tree import TreeFormatError

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NO_FIX = 0, 1, 2, 3

log = logging.getLogger("fixmine")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which here means a parse error
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def _emit(obj) -> None:
    json.dump(obj, sys.stdout, indent=1)
    sys.stdout.write("\n")


def _load_source(path) -> SourceFile:
    try:
        return SourceFile.load(path)
    except OSError as exc:
        raise UsageError(str(exc)) from exc


def _load_bug(path) -> BugReport:
    try:
        return BugReport.load(path)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    except ValueError as exc:
        # json.JSONDecodeError is a ValueError too
        raise UsageError(f"{path}: {exc}") from exc


def cmd_learn(args) -> int:
    from .corpus import atomic_write

    pairs = load_corpus(args.corpus)
    try:
        ps, d, n_edits = learn_from_pairs(pairs, args.min_support)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    atomic_write(args.out, ps.dumps() + "\n")
    _emit({"pairs": len(pairs), "concreteEdits": n_edits, "dendrogramNodes": len(d.nodes),
           "patterns": len(ps.patterns), "out": str(args.out)})
    return EXIT_OK


def cmd_predict(args) -> int:
    try:
        ps = PatternSet.load(args.patterns)
    except OSError as exc:
        raise UsageError(str(exc)) from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise TreeFormatError(f"{args.patterns}: bad pattern file ({exc})") from exc
    src = _load_source(args.file)
    bug = _load_bug(args.bug)
    nullable = None
    if args.config:
        try:
            nullable = load_config(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from exc
    cands = predict_fixes(ps, src, bug, args.top, args.validate, nullable)
    _emit([c.to_json(k + 1) for k, c in enumerate(cands)])
    if not cands:
        print("no applicable pattern", file=sys.stderr)
        return EXIT_NO_FIX
    return EXIT_OK


def cmd_evaluate(args) -> int:
    pairs = load_corpus(args.corpus)
    if args.folds < 1 or args.folds > len(pairs):
        raise UsageError(f"--folds must be between 1 and the number of pairs ({len(pairs)})")
    if args.top < 1:
        raise UsageError("--top must be >= 1")
    res = cross_validate(pairs, args.folds, args.top, args.seed, args.min_support)
    _emit(res.to_json())
    return EXIT_OK


def cmd_lint(args) -> int:
    src = _load_source(args.file)
    try:
        nullable = load_config(args.config)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from exc
    _emit([r.to_json() for r in analyze(src, nullable)])
    return EXIT_OK


def cmd_demo_corpus(args) -> int:
    from . import corpus

    if args.kind == "synthetic":
        fps = generate_synthetic(args.n, args.noise, args.seed)
        items = [(p.name, p.before.text, p.after.text, p.bug.line, p.bug.variable) for p in fps]
    else:
        items = corpus.DEMO_PAIRS if args.kind == "demo" else corpus.NULLCHECK_PAIRS
    write_corpus(args.out, list(items))
    _emit({"pairs": len(items), "out": str(args.out)})
    return EXIT_OK


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fixmine", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("learn", help="learn a pattern set from a corpus of fixes")
    s.add_argument("--corpus", required=True, help="directory of NAME.before.mj/NAME.after.mj/NAME.bug.json")
    s.add_argument("--out", required=True, help="pattern-set JSON to write")
    s.add_argument("--min-support", type=float, default=DEFAULT_MIN_SUPPORT)
    s.set_defaults(run=cmd_learn)

    s = sub.add_parser("predict", help="rank fixes for one bug report")
    s.add_argument("--patterns", required=True)
    s.add_argument("--file", required=True)
    s.add_argument("--bug", required=True)
    s.add_argument("--top", type=_positive, default=5)
    s.add_argument("--validate", action="store_true", help="re-run the checker on the top-1 patch")
    s.add_argument("--config", help="checker config with nullableNames")
    s.set_defaults(run=cmd_predict)

    s = sub.add_parser("evaluate", help="k-fold cross-validation over a corpus")
    s.add_argument("--corpus", required=True)
    s.add_argument("--folds", type=int, default=10)
    s.add_argument("--top", type=int, default=5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--min-support", type=float, default=DEFAULT_MIN_SUPPORT)
    s.set_defaults(run=cmd_evaluate)

    s = sub.add_parser("lint", help="report unguarded dereferences of nullable names")
    s.add_argument("--file", required=True)
    s.add_argument("--config", required=True)
    s.set_defaults(run=cmd_lint)

    s = sub.add_parser("demo-corpus", help="write one of the built-in corpora")
    s.add_argument("--kind", choices=("demo", "nullcheck", "synthetic"), default="demo")
    s.add_argument("--out", required=True)
    s.add_argument("--n", type=int, default=60, help="synthetic fixes")
    s.add_argument("--noise", type=float, default=0.1, help="synthetic noise ratio")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(run=cmd_demo_corpus)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.run(args)
    except (UsageError, CorpusError) as exc:
        print(f"fixmine: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"fixmine: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except TreeFormatError as exc:
        print(f"fixmine: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
