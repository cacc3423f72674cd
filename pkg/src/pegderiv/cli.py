"""Command-line workbench: parse, check, diff, bench.

Exit status is 0 for match/pass, 1 for fail, 2 for any error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import records
from .corpus import FAMILIES
from .derivative import DerivativeSession, inject
from .grammar import Grammar, GrammarError, check_well_formed, desugar, parse_grammar
from .harness import ENGINES, GrammarGenConfig, bench_scaling, differential_run, gen_grammar, gen_inputs
from .naive import Limits, ResourceExhausted, recognize_naive
from .packrat import recognize_packrat

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


class CliError(Exception):
    pass


def _load_grammar(path: str) -> tuple[Grammar, str]:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read grammar {path}: {exc.strerror}") from None
    g = parse_grammar(raw)
    return g, g.source


def _read_input(args) -> bytes:
    given = [args.input is not None, args.file is not None, args.stdin]
    if sum(given) != 1:
        raise CliError("give exactly one of an input argument, --file or --stdin")
    if args.stdin:
        data = sys.stdin.buffer.read()
        if not args.keep_newline and data.endswith(b"\n"):
            data = data[:-2] if data.endswith(b"\r\n") else data[:-1]
    elif args.file is not None:
        try:
            with open(args.file, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read input {args.file}: {exc.strerror}") from None
    else:
        data = args.input.encode("utf-8") if not args.hex else args.input
    if args.hex:
        text = data.decode("ascii", "replace") if isinstance(data, bytes) else data
        try:
            data = bytes.fromhex("".join(text.split()))
        except ValueError:
            raise CliError("--hex input is not valid hexadecimal") from None
    return data


def _gate(core: Grammar) -> None:
    report = check_well_formed(core)
    if not report.well_formed:
        raise CliError(f"grammar is not well-formed; {report.describe()}")


def cmd_parse(args) -> int:
    g, source = _load_grammar(args.grammar)
    data = _read_input(args)
    core = desugar(g)
    ghash = records.grammar_hash(source)
    engine = args.engine
    out = sys.stdout
    if engine in ("naive", "packrat"):
        _gate(core)
    else:
        report = check_well_formed(core)
        if not report.well_formed:
            print(f"warning: {report.describe()}; the derivative engine will report fail for loops",
                  file=sys.stderr)

    if engine == "naive":
        limits = Limits(max_invocations=args.max_invocations, max_depth=args.max_depth)
        try:
            verdict, consumed, stats = recognize_naive(core, data, limits)
        except ResourceExhausted as exc:
            raise CliError(str(exc)) from None
        run = records.RunResult(engine, verdict, ghash, len(data), consumed, stats={
            "nonterminal_invocations": stats.nonterminal_invocations,
            "max_recursion_depth": stats.max_recursion_depth,
        })
    elif engine == "packrat":
        trace = None
        if args.trace:
            def trace(event, rule, pos, end):
                shown = "fail" if end < 0 else end
                print(f"memo {event} {rule}@{pos} -> {shown}", file=out)
        verdict, consumed, stats = recognize_packrat(core, data, trace=trace)
        run = records.RunResult(engine, verdict, ghash, len(data), consumed, stats={
            "evaluations": stats.evaluations, "hits": stats.hits, "memo_entries": stats.memo_entries,
        })
    else:
        session = DerivativeSession(inject(core))
        shown = 0
        for i in range(len(data) + 1):
            if session.verdict is not None:
                break
            if i < len(data):
                session.feed(data[i:i + 1])
            else:
                session.finish()
            if args.trace:
                for m in session.metrics[shown:]:
                    sym = m.symbol if m.symbol == "$" else repr(chr(m.symbol))
                    print(f"step {m.position} {sym}: nodes {m.nodes_before}->{m.nodes_after} "
                          f"b={m.max_generation} live={m.live_generations} "
                          f"compactions={m.compactions_fired}", file=out)
                shown = len(session.metrics)
        verdict = session.verdict or session.finish()
        run = records.RunResult(engine, verdict, ghash, len(data), None, metrics=session.metrics)

    if args.metrics:
        records.write(args.metrics, [run])
    if run.consumed is not None and verdict == "match":
        print(f"{verdict} {run.consumed}", file=out)
    else:
        print(verdict, file=out)
    return EXIT_OK if verdict == "match" else EXIT_FAIL


def cmd_check(args) -> int:
    g, _ = _load_grammar(args.grammar)
    report = check_well_formed(desugar(g))
    print(report.describe())
    if report.nullable_nonterminals:
        print("nullable: " + " ".join(sorted(report.nullable_nonterminals)))
    return EXIT_OK if report.well_formed else EXIT_FAIL


def _parse_alphabet(text: str) -> bytes:
    data = text.encode("utf-8")
    if not data:
        raise CliError("alphabet must not be empty")
    return data


def cmd_diff(args) -> int:
    alphabet = _parse_alphabet(args.alphabet)
    inputs = gen_inputs(alphabet, args.exhaustive, extra=args.random_inputs, extra_len=args.random_length,
                        seed=args.seed_inputs)
    if args.grammar:
        g, _ = _load_grammar(args.grammar)
        _gate(desugar(g))
        grammars = [g]
    elif args.random:
        seed, count = args.random
        grammars = [gen_grammar(GrammarGenConfig(seed=seed + i, alphabet=alphabet, sugar_enabled=args.sugar))
                    for i in range(count)]
    else:
        raise CliError("give -g GRAMMAR or --random SEED COUNT")
    failed = 0
    limits = Limits(max_invocations=args.max_invocations, max_depth=args.max_depth)
    for g in grammars:
        report = differential_run(g, inputs, limits)
        if args.json:
            print(report.to_json())
        if not report.passed:
            failed += 1
            if not args.json:
                print(f"DISAGREE on grammar:\n{report.grammar}")
                for row in report.disagreements[:20]:
                    print("  input=%r naive=%s packrat=%s derivative=%s" % row)
    if not args.json:
        print(f"{len(grammars)} grammar(s), {len(inputs)} input(s) each, {failed} with disagreements")
    return EXIT_OK if failed == 0 else EXIT_FAIL


def _parse_n_values(text: str) -> list[int]:
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    if not out:
        raise CliError("empty -n range")
    return out


def cmd_bench(args) -> int:
    if args.family not in FAMILIES:
        raise CliError(f"unknown family {args.family}; choose from {', '.join(FAMILIES)}")
    try:
        n_values = _parse_n_values(args.n)
    except ValueError:
        raise CliError(f"bad -n range {args.n!r}") from None
    engines = [e.strip() for e in args.engines.split(",") if e.strip()]
    for e in engines:
        if e not in ENGINES:
            raise CliError(f"unknown engine {e}")
    limits = Limits(max_invocations=args.max_invocations, max_depth=args.max_depth)
    rows = bench_scaling(args.family, n_values, engines, limits)
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    cols = ["n", "engine", "verdict", "wall_time", "naive_invocations", "packrat_evaluations",
            "peak_nodes", "max_generation", "max_live_generations"]
    print("\t".join(cols))
    for r in rows:
        cells = []
        for c in cols:
            v = r[c]
            cells.append(f"{v:.4f}" if isinstance(v, float) else ("-" if v is None else str(v)))
        print("\t".join(cells))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pegderiv", description="PEG recognizers and measurement workbench")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="recognize one input")
    p.add_argument("-g", "--grammar", required=True)
    p.add_argument("-e", "--engine", choices=ENGINES, default="derivative")
    p.add_argument("input", nargs="?", help="input text (UTF-8)")
    p.add_argument("--file", help="read raw input bytes from a file")
    p.add_argument("--stdin", action="store_true", help="read input from standard input")
    p.add_argument("--keep-newline", action="store_true", help="keep a trailing newline read from stdin")
    p.add_argument("--hex", action="store_true", help="input is hexadecimal")
    p.add_argument("--metrics", metavar="PATH", help="write a metrics document")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--max-invocations", type=int, default=Limits.max_invocations)
    p.add_argument("--max-depth", type=int, default=Limits.max_depth)
    p.set_defaults(func=cmd_parse)

    c = sub.add_parser("check", help="well-formedness report")
    c.add_argument("grammar")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("diff", help="differential run across all engines")
    d.add_argument("-g", "--grammar")
    d.add_argument("--random", nargs=2, type=int, metavar=("SEED", "COUNT"))
    d.add_argument("--sugar", action="store_true", help="random grammars may use sugar forms")
    d.add_argument("--exhaustive", type=int, default=6, metavar="LEN")
    d.add_argument("--alphabet", default="abc")
    d.add_argument("--random-inputs", type=int, default=0)
    d.add_argument("--random-length", type=int, default=12)
    d.add_argument("--seed-inputs", type=int, default=0)
    d.add_argument("--json", action="store_true", help="print one report per grammar as JSON")
    d.add_argument("--max-invocations", type=int, default=2_000_000)
    d.add_argument("--max-depth", type=int, default=20_000)
    d.set_defaults(func=cmd_diff)

    b = sub.add_parser("bench", help="scaling measurements")
    b.add_argument("--family", required=True)
    b.add_argument("-n", default="6..14")
    b.add_argument("-e", "--engines", default="naive,packrat,derivative")
    b.add_argument("--out", help="write rows as JSON lines")
    b.add_argument("--max-invocations", type=int, default=Limits.max_invocations)
    b.add_argument("--max-depth", type=int, default=Limits.max_depth)
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return args.func(args)
    except (CliError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
