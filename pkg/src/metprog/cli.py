"""Command-line front end.

stdout carries artifacts (DOT, formatted text, JSON); stderr carries human
diagnostics, so output can be piped.  Exit codes: 0 when the run produced no
error-severity diagnostics, 1 when it did, 2 for usage or I/O failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .diagnostics import Diagnostic, has_errors
from .evolve import diff, format_diff, skeleton_from_metrics
from .formatter import format_program
from .hierarchy import compute_levels, extract_subprogram, hierarchy_report
from .lint import LintConfig, lint, load_config
from .model import Program
from .parser import ParseResult, parse
from .render import RenderOptions, to_dot
from .trace import format_chain, trace_down, trace_up
from .validator import validate


class _UsageError(Exception):
    pass


def main() -> None:
    sys.exit(run(sys.argv[1:]))


def run(argv: list[str], stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    handler = _HANDLERS[args.command]
    try:
        return handler(args, stdout, stderr)
    except OSError as exc:
        print(f"metprog: {exc}", file=stderr)
        return 2
    except _UsageError as exc:
        print(f"metprog: {exc}", file=stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text",
                        dest="output_format", help="output format")
    common.add_argument("--config", metavar="PATH", help="lint config file")
    common.add_argument("--allow-abstract-goals", action="store_true",
                        help="report goals without metrics as warnings, not errors")

    parser = argparse.ArgumentParser(
        prog="metprog",
        description="Design toolchain for modular software measurement programs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="parse and validate a program")
    p.add_argument("file")

    p = sub.add_parser("lint", parents=[common], help="validate plus design heuristics")
    p.add_argument("file")
    p.add_argument("--max-inputs", type=int, metavar="N")
    p.add_argument("--max-outputs", type=int, metavar="N")
    p.add_argument("--max-object-kinds", type=int, metavar="N")
    p.add_argument("--disable", metavar="CODES", help="comma-separated lint codes to disable")

    p = sub.add_parser("graph", parents=[common], help="emit a DOT module diagram")
    p.add_argument("file")
    p.add_argument("--levels", action="store_true", help="group nodes by hierarchy level")
    p.add_argument("--rankdir", choices=("TB", "LR"), default="TB")

    p = sub.add_parser("levels", parents=[common], help="print the hierarchy levels")
    p.add_argument("file")

    p = sub.add_parser("trace", parents=[common], help="trace derivation chains")
    p.add_argument("file")
    direction = p.add_mutually_exclusive_group(required=True)
    direction.add_argument("--up", metavar="MODULE.METRIC",
                           help="chains from a metric up to organizational goals")
    direction.add_argument("--down", metavar="MODULE.ORGGOAL",
                           help="chains from an organizational goal down to metrics")

    p = sub.add_parser("extract", parents=[common], help="extract the subprogram rooted at a module")
    p.add_argument("file")
    p.add_argument("--root", required=True, metavar="MODULE")
    p.add_argument("-o", "--output", metavar="OUT.mp")

    p = sub.add_parser("fmt", parents=[common], help="canonically format a program")
    p.add_argument("file")
    p.add_argument("--write", action="store_true", help="rewrite the file in place")

    p = sub.add_parser("diff", parents=[common], help="diff two program versions")
    p.add_argument("old")
    p.add_argument("new")

    p = sub.add_parser("skeleton", parents=[common],
                       help="reverse-engineer a module from existing metrics")
    p.add_argument("--module", required=True, metavar="ID")
    p.add_argument("--metrics", required=True, metavar="m1,m2,...")
    p.add_argument("-o", "--output", metavar="OUT.mp")

    return parser


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _emit_diagnostics(diags: list[Diagnostic], args, stdout, stderr, *,
                      always_json: bool = False) -> None:
    if args.output_format == "json":
        if diags or always_json:
            json.dump([d.to_json() for d in diags], stdout, indent=2)
            stdout.write("\n")
    else:
        for d in diags:
            print(d.render(), file=stderr)


def _parse_and_validate(path: str, args) -> tuple[ParseResult, list[Diagnostic]]:
    result = parse(_read(path), path)
    diags = list(result.diagnostics)
    if result.ok:
        diags += validate(result, allow_abstract_goals=args.allow_abstract_goals)
    return result, diags


def _lint_config(args) -> LintConfig:
    try:
        config = load_config(args.config) if args.config else LintConfig()
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    for key in ("max_inputs", "max_outputs", "max_object_kinds"):
        value = getattr(args, key, None)
        if value is not None:
            if value < 1:
                raise _UsageError(f"--{key.replace('_', '-')} must be >= 1")
            config = config.__class__(**{**config.__dict__, key: value})
    disable = getattr(args, "disable", None)
    if disable:
        config = config.disable({c.strip() for c in disable.split(",") if c.strip()})
    return config


def _cmd_check(args, stdout, stderr) -> int:
    result, diags = _parse_and_validate(args.file, args)
    _emit_diagnostics(diags, args, stdout, stderr, always_json=True)
    if has_errors(diags):
        return 1
    if args.output_format == "text":
        program = result.program
        print(f"OK: {len(program.modules)} modules, {len(program.connections)} connections",
              file=stdout)
    return 0


def _cmd_lint(args, stdout, stderr) -> int:
    config = _lint_config(args)
    result, diags = _parse_and_validate(args.file, args)
    if result.ok and not has_errors(diags):
        diags = diags + lint(result.program, config, result.span_index)
    _emit_diagnostics(diags, args, stdout, stderr, always_json=True)
    return 1 if has_errors(diags) else 0


def _cmd_graph(args, stdout, stderr) -> int:
    result, diags = _parse_and_validate(args.file, args)
    _emit_diagnostics(diags, args, stdout, stderr)
    if has_errors(diags):
        return 1
    options = RenderOptions(show_levels=args.levels, rankdir=args.rankdir)
    stdout.write(to_dot(result.program, options))
    return 0


def _cmd_levels(args, stdout, stderr) -> int:
    result, diags = _parse_and_validate(args.file, args)
    _emit_diagnostics(diags, args, stdout, stderr)
    if has_errors(diags):
        return 1
    program = result.program
    level_map = compute_levels(program)
    if args.output_format == "json":
        json.dump(level_map.to_json(), stdout, indent=2)
        stdout.write("\n")
        return 0
    mods = program.modules_by_id
    for module_id in sorted(level_map.levels, key=lambda m: (level_map.levels[m], m)):
        print(f"{level_map.levels[module_id]}\t{module_id}\t{mods[module_id].kind.value}",
              file=stdout)
    for note in hierarchy_report(program, result.span_index):
        if note.code == "I101":
            print(note.render(), file=stderr)
    return 0


def _cmd_trace(args, stdout, stderr) -> int:
    result, diags = _parse_and_validate(args.file, args)
    _emit_diagnostics(diags, args, stdout, stderr)
    if has_errors(diags):
        return 1
    spec = args.up or args.down
    module_id, sep, entity_id = spec.partition(".")
    if not sep or not module_id or not entity_id:
        raise _UsageError(f"expected MODULE.NAME, got '{spec}'")
    try:
        if args.up:
            chains = trace_up(result.program, module_id, entity_id)
            separator = " <- "
        else:
            chains = trace_down(result.program, module_id, entity_id)
            separator = " -> "
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    if args.output_format == "json":
        json.dump([c.to_json() for c in chains], stdout, indent=2)
        stdout.write("\n")
        return 0
    for chain in chains:
        print(format_chain(chain, separator), file=stdout)
    if not chains:
        print("no chains found", file=stderr)
    return 0


def _cmd_extract(args, stdout, stderr) -> int:
    result, diags = _parse_and_validate(args.file, args)
    _emit_diagnostics(diags, args, stdout, stderr)
    if has_errors(diags):
        return 1
    try:
        extracted = extract_subprogram(result.program, args.root)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    text = format_program(extracted)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0


def _cmd_fmt(args, stdout, stderr) -> int:
    result = parse(_read(args.file), args.file)
    _emit_diagnostics(list(result.diagnostics), args, stdout, stderr)
    if not result.ok:
        return 1
    text = format_program(result.program)
    if args.write:
        if text != _read(args.file):
            Path(args.file).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0


def _cmd_diff(args, stdout, stderr) -> int:
    programs: list[Program] = []
    failed = False
    for path in (args.old, args.new):
        result = parse(_read(path), path)
        _emit_diagnostics(list(result.diagnostics), args, stdout, stderr)
        if result.ok:
            programs.append(result.program)
        else:
            failed = True
    if failed:
        return 1
    d = diff(programs[0], programs[1])
    if args.output_format == "json":
        json.dump(d.to_json(), stdout, indent=2)
        stdout.write("\n")
    else:
        stdout.write(format_diff(d))
    return 0


def _cmd_skeleton(args, stdout, stderr) -> int:
    metric_ids = [m.strip() for m in args.metrics.split(",") if m.strip()]
    try:
        module = skeleton_from_metrics(metric_ids, args.module)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    text = format_program(Program(f"{args.module}_skeleton", (module,)))
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return 0


_HANDLERS = {
    "check": _cmd_check,
    "lint": _cmd_lint,
    "graph": _cmd_graph,
    "levels": _cmd_levels,
    "trace": _cmd_trace,
    "extract": _cmd_extract,
    "fmt": _cmd_fmt,
    "diff": _cmd_diff,
    "skeleton": _cmd_skeleton,
}
