"""Command-line entry point: ``bioamb {fmt|analyze|simulate|verify}``.

Exit codes: 0 on success (a truncated exploration only warns), 1 for
input errors, 2 when the analysis judgment fails on a reachable state.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from typing import Sequence

from .ast import CanonCap, Process
from .cfa import AnalysisResult, analyze, generate_constraints, item_key, solve
from .parser import ParseError, parse, pretty
from .semantics import DEFAULT_MAX_STATES, StateSpace, explore
from .verify import (
    DEFAULT_STATE_LIMIT,
    PrecisionReport,
    VerificationReport,
    check_theorem,
    measure_precision,
    random_corpus,
)

SCHEMA_VERSION = "1"

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION = 0, 1, 2


class InputError(Exception):
    pass


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load(path: str) -> tuple[str, Process]:
    text = _read(path)
    try:
        return text, parse(text)
    except ParseError as exc:
        shown = "<stdin>" if path == "-" else path
        raise InputError(f"{shown}:{exc.span.line}:{exc.span.column}: {exc.kind}: {exc.message}") from None


def _digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def _document(command: str, text: str, payload: dict) -> str:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "input_digest": _digest(text),
        "payload": payload,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False, sort_keys=False)


# --- serializers -------------------------------------------------------------


def _sorted_items(items) -> list[str]:
    return [str(i) for i in sorted(items, key=item_key)]


def result_to_json(result: AnalysisResult) -> dict:
    contents = {mu: _sorted_items(items) for mu, items in sorted(result.contents.items())}
    bindings = {
        str(n): sorted(str(v) for v in vs)
        for n, vs in sorted(result.bindings.items(), key=lambda kv: str(kv[0]))
    }
    return {
        "ambients": result.ambients,
        "contents": contents,
        "bindings": dict(sorted(bindings.items())),
        "top": result.top,
        "stats": dict(sorted(result.stats.items())),
    }


def space_to_json(space: StateSpace, trace: bool = False) -> dict:
    out = {
        "states": len(space.states),
        "transitions": len(space.edges),
        "depth_reached": space.depth_reached,
        "truncated": space.truncated,
    }
    if trace:
        out["edges"] = [[src, sorted(r.families), dst] for src, r, dst in space.edges]
        out["terms"] = [pretty(s) for s in space.states]
    return out


def verification_to_json(report: VerificationReport) -> dict:
    return {
        "process": report.process,
        "states_checked": report.states_checked,
        "depth": report.depth,
        "violations": [list(v) for v in report.violations],
        "truncated": report.truncated,
        "families": sorted(report.families),
    }


def precision_to_json(report: PrecisionReport) -> dict:
    def pairs(s):
        return [list(p) for p in sorted(s)]

    return {
        "exact_pairs": pairs(report.exact_pairs),
        "predicted_pairs": pairs(report.predicted_pairs),
        "spurious": pairs(report.spurious),
        "missed": pairs(report.missed),
        "truncated": report.truncated,
    }


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def result_to_dot(result: AnalysisResult, initial: AnalysisResult | None = None) -> str:
    """Father-son graph: ovals for ambients, boxes for capabilities; edges
    already present in ``initial`` are black, derived ones red."""
    seed = initial.contents if initial is not None else result.contents
    lines = ["digraph analysis {", "  node [fontname=Helvetica];"]
    owners = [result.top] + result.ambients
    for mu in owners:
        lines.append(f"  {_quote(mu)} [shape=oval];")
    for mu in owners:
        for k, item in enumerate(sorted(result.items(mu), key=item_key)):
            colour = "black" if item in seed.get(mu, ()) else "red"
            if isinstance(item, CanonCap):
                node = _quote(f"{mu}/{k}")
                lines.append(f"  {node} [shape=box, label={_quote(str(item))}];")
            else:
                node = _quote(item)
            lines.append(f"  {_quote(mu)} -> {node} [color={colour}];")
    lines.append("}")
    return "\n".join(lines)


def result_to_text(result: AnalysisResult) -> str:
    lines = ["contents:"]
    for mu in [result.top] + result.ambients:
        lines.append(f"  {mu}: {', '.join(_sorted_items(result.items(mu))) or '-'}")
    lines.append("bindings:")
    for n, vs in sorted(result.bindings.items(), key=lambda kv: str(kv[0])):
        lines.append(f"  {n}: {', '.join(sorted(map(str, vs)))}")
    return "\n".join(lines)


# --- commands ----------------------------------------------------------------


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def cmd_fmt(args) -> int:
    _, p = _load(args.file)
    print(pretty(p))
    return EXIT_OK


def cmd_analyze(args) -> int:
    text, p = _load(args.file)
    result = analyze(p)
    if args.format == "json":
        print(_document("analyze", text, result_to_json(result)))
    elif args.format == "dot":
        initial = solve(generate_constraints(p, result.top), closure=False, top=result.top)
        print(result_to_dot(result, initial))
    else:
        print(result_to_text(result))
    return EXIT_OK


def cmd_simulate(args) -> int:
    text, p = _load(args.file)
    space = explore(p, args.depth, args.max_states)
    if args.format == "json":
        print(_document("simulate", text, space_to_json(space, args.trace)))
    else:
        print(space.summary())
        if args.trace:
            for sid, state in enumerate(space.states):
                print(f"  [{sid}] {pretty(state)}")
            for src, redex, dst in space.edges:
                rule = "+".join(sorted(redex.families, key=lambda f: f == "rec_unfold"))
                print(f"{src} --{rule}--> {dst}")
    if space.truncated:
        _warn(f"exploration truncated (depth {args.depth}, max states {args.max_states})")
    return EXIT_OK


def _verify_one(p: Process, depth: int, limit: int) -> tuple[VerificationReport, PrecisionReport]:
    result = analyze(p)
    space = explore(p, depth, limit)
    return (
        check_theorem(p, depth, limit, result=result, space=space),
        measure_precision(p, depth, limit, result=result, space=space),
    )


def _failed(rep: VerificationReport, prec: PrecisionReport) -> bool:
    return bool(rep.violations) or (not prec.truncated and bool(prec.missed))


def cmd_verify(args) -> int:
    if args.random is not None:
        text = f"random {args.random} seed {args.seed}"
        terms = random_corpus(args.random, args.seed)
    else:
        text, p = _load(args.file)
        terms = [p]
    reports = [_verify_one(p, args.depth, args.max_states) for p in terms]
    failed = [i for i, (rep, prec) in enumerate(reports) if _failed(rep, prec)]
    truncated = sum(rep.truncated for rep, _ in reports)
    families = set().union(*(rep.families for rep, _ in reports))
    if args.format == "json":
        payload = {
            "terms": len(reports),
            "states_checked": sum(rep.states_checked for rep, _ in reports),
            "violations": sum(len(rep.violations) for rep, _ in reports),
            "failed_terms": failed,
            "families": sorted(families),
            "reports": [
                {"verification": verification_to_json(rep), "precision": precision_to_json(prec)}
                for rep, prec in reports
            ],
        }
        print(_document("verify", text, payload))
    else:
        states = sum(rep.states_checked for rep, _ in reports)
        violations = sum(len(rep.violations) for rep, _ in reports)
        print(f"{len(reports)} term(s), {states} states checked, {violations} violations")
        print(f"families exercised: {', '.join(sorted(families)) or '-'}")
        if len(reports) == 1:
            prec = reports[0][1]
            print(f"pairs: {len(prec.exact_pairs)} observed, {len(prec.predicted_pairs)} predicted, "
                  f"{len(prec.spurious)} spurious, {len(prec.missed)} missed")
        for i in failed:
            rep, prec = reports[i]
            print(f"FAILED term {i}: {rep.process}")
            for sid, rule, detail in rep.violations[:10]:
                print(f"  state {sid}: {rule}: {detail}")
            if prec.missed:
                print(f"  missed pairs: {sorted(prec.missed)}")
    if truncated:
        _warn(f"{truncated} exploration(s) truncated; results cover the explored states only")
    return EXIT_VIOLATION if failed else EXIT_OK


# --- argument parsing --------------------------------------------------------


class _ArgumentParser(argparse.ArgumentParser):
    # usage errors are input errors; exit status 2 is kept for violations
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(prog="bioamb", description="BioAmbients toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    def output_flags(p, dot: bool = False):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--json", dest="format", action="store_const", const="json")
        if dot:
            g.add_argument("--dot", dest="format", action="store_const", const="dot")
        g.add_argument("--text", dest="format", action="store_const", const="text")
        p.set_defaults(format="text")

    p = sub.add_parser("fmt", help="pretty-print a process")
    p.add_argument("file", help="input file, or - for stdin")
    p.set_defaults(func=cmd_fmt)

    p = sub.add_parser("analyze", help="compute the control-flow analysis")
    p.add_argument("file")
    output_flags(p, dot=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("simulate", help="explore reachable states")
    p.add_argument("file")
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--max-states", type=int, default=DEFAULT_MAX_STATES)
    p.add_argument("--trace", action="store_true", help="print states and edges")
    output_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="check the analysis on every reachable state")
    p.add_argument("file", nargs="?")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--max-states", type=int, default=DEFAULT_STATE_LIMIT)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random", type=int, metavar="K", help="check K generated terms instead of a file")
    output_flags(p)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command == "verify" and args.file is None and args.random is None:
        ap.error("verify needs a file or --random K")
    for flag in ("depth", "max_states", "random"):
        value = getattr(args, flag, None)
        if value is not None and value < 1:
            ap.error(f"--{flag.replace('_', '-')} must be at least 1")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
