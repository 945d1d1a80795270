"""Command-line front end.

Subcommands: check (validate a model file), grammar (print the generated
grammar), parse (run the pipeline and export the graph), eval (run one of
the built-in languages), test (run an assertion file). Set MCC_COLOR=0 to
disable ANSI colors. Outputs are UTF-8 with LF line endings.
"""

import argparse
import os
import sys

from .asg import AmbiguousParse, asg_dot, asg_json, format_number
from .earley import ParseError
from .forest import count_trees
from .grammar import grammar_text
from .harness import run_test_file
from .languages import (calc_engine, calc_unconstrained_engine, imp_engine,
                        run_calc, run_imp)
from .lexer import LexicalError
from .model import ModelValidationError
from .modelfile import FormatError, load_model_file
from .pipeline import Engine, NoValidParse


def _color_enabled():
    return os.environ.get("MCC_COLOR", "1") != "0" and sys.stderr.isatty()


def _error(message):
    prefix = "\x1b[31merror:\x1b[0m" if _color_enabled() else "error:"
    print(f"{prefix} {message}", file=sys.stderr)


def _load_engine(path):
    model = load_model_file(path)
    return Engine(model)


def cmd_check(args):
    try:
        model = load_model_file(args.model)
    except (FormatError, ModelValidationError, OSError) as exc:
        _error(str(exc))
        return 1
    print(f"ok: {model.name}, {len(model.elements)} element types")
    for warning in model.warnings:
        print(f"warning: {warning}")
    return 0


def cmd_grammar(args):
    try:
        model = load_model_file(args.model)
        engine = Engine(model)
    except (FormatError, ModelValidationError, OSError) as exc:
        _error(str(exc))
        return 1
    sys.stdout.write(grammar_text(engine.grammar))
    return 0


def cmd_parse(args):
    try:
        engine = _load_engine(args.model)
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    except (FormatError, ModelValidationError, OSError) as exc:
        _error(str(exc))
        return 1

    try:
        if args.count:
            forest = engine.forest(text)
            print(count_trees(forest, 10**6))
            return 0
        graphs = engine.asgs(text, all_parses=args.all_parses)
    except (ParseError, LexicalError, NoValidParse) as exc:
        _error(str(exc))
        return 1
    except AmbiguousParse as exc:
        _error(str(exc))
        return 2

    for graph in graphs:
        if args.dump == "dot":
            sys.stdout.write(asg_dot(graph))
        else:
            print(asg_json(graph))
    return 0


def cmd_eval(args):
    if args.input:
        try:
            with open(args.input, encoding="utf-8") as fh:
                source = fh.read()
        except OSError as exc:
            _error(str(exc))
            return 1
    else:
        source = sys.stdin.read()

    stdin_text = ""
    if args.stdin:
        try:
            with open(args.stdin, encoding="utf-8") as fh:
                stdin_text = fh.read()
        except OSError as exc:
            _error(str(exc))
            return 1

    try:
        if args.lang == "calc":
            for line in run_calc(source):
                print(line)
            return 0
        output, exit_value = run_imp(source, stdin_text)
        for line in output:
            print(line)
        return int(exit_value) % 256 if exit_value else 0
    except (ParseError, LexicalError, NoValidParse, AmbiguousParse) as exc:
        _error(str(exc))
        return 1


def _test_engines(testfile):
    engines = {
        "calc": calc_engine(),
        "calc_unconstrained": calc_unconstrained_engine(),
        "imp": imp_engine(),
    }

    class _Table(dict):
        def get(self, name, default=None):
            if name not in self and name.endswith(".mcc"):
                path = os.path.join(os.path.dirname(os.path.abspath(testfile)), name)
                try:
                    self[name] = _load_engine(path)
                except Exception:
                    return default
            return super().get(name, default)

    return _Table(engines)


def cmd_test(args):
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        _error(str(exc))
        return 1
    try:
        lines, all_ok = run_test_file(text, _test_engines(args.file))
    except ValueError as exc:
        _error(str(exc))
        return 1
    for line in lines:
        print(line)
    return 0 if all_ok else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mcc",
        description="Model-based parser generator: validate models, print "
                    "generated grammars, parse inputs into abstract syntax "
                    "graphs, and run the built-in example languages.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="validate a model file")
    p.add_argument("model")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("grammar", help="print the generated grammar")
    p.add_argument("model")
    p.set_defaults(fn=cmd_grammar)

    p = sub.add_parser("parse", help="parse an input file against a model")
    p.add_argument("model")
    p.add_argument("input")
    p.add_argument("--dump", choices=["dot", "json"], default="json")
    p.add_argument("--count", action="store_true",
                   help="print the surviving interpretation count instead")
    p.add_argument("--all-parses", action="store_true",
                   help="emit every surviving interpretation")
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("eval", help="run a built-in language")
    p.add_argument("--lang", choices=["calc", "imp"], required=True)
    p.add_argument("input", nargs="?")
    p.add_argument("--stdin", help="file supplying the program's read() input")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("test", help="run an assertion file (TAP output)")
    p.add_argument("file")
    p.set_defaults(fn=cmd_test)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
