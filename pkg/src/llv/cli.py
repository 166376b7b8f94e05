"""The ``llv`` command line.

Exit codes: 0 on success, 1 when a check or verification fails, 2 on usage,
parse or input errors.  JSON output is pretty-printed with a fixed key order
so identical inputs give byte-identical output.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Sequence

from .corpus import Corpus, load_corpus, term
from .derivation import DerivationError, check, from_json, judgment_str, measure, to_json
from .inference import SearchBounds, Searcher, Trace, guided_run, type_via_trace, typable
from .reduction import explore, parallel_values
from .semantics import interp, obs_check
from .syntax import ParseError, free_vars, is_value, print_term, size
from .typesys import EMPTY, TypeSyntaxError, par_unit, parse_type, print_type
from .verify import SUITES, run_suite

OK, FAILED, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from e


def _load_derivation(path: str, corpus: Corpus):
    try:
        return from_json(_read_json(path), corpus)
    except (KeyError, TypeError) as e:
        raise UsageError(f"{path} is not a derivation: missing or malformed {e}") from e


def _closed(t, what: str = "term"):
    if free_vars(t):
        raise UsageError(f"{what} must be closed: {print_term(t)} has free {', '.join(sorted(free_vars(t)))}")
    return t


# -- commands ---------------------------------------------------------------


def cmd_parse(args, corpus: Corpus, out) -> int:
    t = term(args.term, corpus)
    if args.json:
        out.write(dump({"term": print_term(t), "size": size(t), "value": is_value(t), "free": sorted(free_vars(t))}))
    else:
        out.write(print_term(t) + "\n")
    return OK


def cmd_reduce(args, corpus: Corpus, out) -> int:
    t = term(args.term, corpus)
    g = explore(t, args.fuel, args.states)
    nfs = g.normal_forms()
    if g.exhausted and not nfs:
        verdict = "Diverges"
    elif nfs:
        verdict = "Converges"
    else:
        verdict = "Unknown"
    if args.graph:
        Path(args.graph).write_text(dump(g.to_json()), encoding="utf-8")
    if args.json:
        out.write(dump({
            "term": print_term(t),
            "verdict": verdict,
            "normal_forms": [{"term": print_term(n), "steps": k} for n, k in nfs],
            "states": len(g.nodes),
            "exhausted": g.exhausted,
        }))
    else:
        out.write(f"{verdict} ({len(g.nodes)} states, {'exhausted' if g.exhausted else 'fuel hit'})\n")
        for n, k in nfs:
            out.write(f"  {print_term(n)}  after {k} steps\n")
    return OK


def cmd_check(args, corpus: Corpus, out) -> int:
    d = _load_derivation(args.derivation, corpus)
    try:
        check(d)
    except DerivationError as e:
        if args.json:
            out.write(dump({"valid": False, "path": list(e.path), "error": str(e)}))
        else:
            out.write(f"invalid: {e}\n")
        return FAILED
    if args.json:
        out.write(dump({"valid": True, "judgment": judgment_str(d), "measure": measure(d)}))
    else:
        out.write(f"{judgment_str(d)}\nmeasure {measure(d)}\n")
    return OK


def cmd_infer(args, corpus: Corpus, out) -> int:
    t = _closed(term(args.term, corpus))
    if args.type is not None and args.k is not None:
        raise UsageError("--type and --k are exclusive")
    b = SearchBounds(max_type_size=args.type_size, max_depth=args.depth, max_k=args.max_k)
    s = Searcher(b)
    if args.type is None and args.k is None:
        d = typable(t, searcher=s)
        ms = [] if d is None else [measure(d)]
    else:
        goal = parse_type(args.type) if args.type is not None else par_unit(args.k)
        ms = s.results(EMPTY, t, goal)
        d = next(s.derivations(EMPTY, t, goal, ms[0])) if ms else None
    if d is None:
        msg = f"no derivation for {print_term(t)} within bounds (type size {b.max_type_size}, depth {b.max_depth}, k {b.max_k})"
        if args.json:
            out.write(dump({"term": print_term(t), "typable": False, "message": msg}))
        else:
            out.write(msg + "\n")
        return FAILED
    check(d)
    if args.json:
        out.write(dump({
            "term": print_term(t),
            "typable": True,
            "type": print_type(d.type),
            "measures": sorted(ms),
            "derivation": to_json(d),
        }))
    else:
        out.write(f"{judgment_str(d)}\nmeasure {measure(d)}\n")
        if len(ms) > 1:
            out.write(f"all measures: {' '.join(map(str, sorted(ms)))}\n")
    return OK


def cmd_run(args, corpus: Corpus, out) -> int:
    d = _load_derivation(args.guided, corpus)
    try:
        check(d)
    except DerivationError as e:
        out.write(f"invalid derivation: {e}\n")
        return FAILED
    _closed(d.term, "the derivation's subject")
    trace = guided_run(d)
    out.write(dump(trace.to_json()))
    return OK


def cmd_expand(args, corpus: Corpus, out) -> int:
    try:
        trace = Trace.from_json(_read_json(args.trace), corpus)
    except (KeyError, TypeError) as e:
        raise UsageError(f"{args.trace} is not a trace: missing or malformed {e}") from e
    _closed(trace.start, "the trace's start")
    try:
        trace.replay()
    except ValueError as e:
        out.write(f"invalid trace: {e}\n")
        return FAILED
    if parallel_values(trace.end) is None:
        out.write(f"trace ends in {print_term(trace.end)}, not a parallel composition of values\n")
        return FAILED
    out.write(dump(to_json(type_via_trace(trace))))
    return OK


def cmd_interp(args, corpus: Corpus, out) -> int:
    t = _closed(term(args.term, corpus))
    approx = interp(t, args.type_size)
    if args.json:
        out.write(dump(approx.to_json()))
    else:
        out.write(f"{len(approx.types)} types of size <= {args.type_size}\n")
        for ty in approx.sorted_types():
            out.write(f"  {print_type(ty)}\n")
    return OK


def _load_pool(path: str, corpus: Corpus):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e
    pool = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip().rstrip(";").strip()
        if line:
            pool.append(_closed(term(line, corpus), "pool entry"))
    if not pool:
        raise UsageError(f"{path} holds no terms")
    return pool


def cmd_obs(args, corpus: Corpus, out) -> int:
    m = _closed(term(args.left, corpus))
    n = _closed(term(args.right, corpus))
    if args.args < 0:
        raise UsageError("--args must be non-negative")
    pool = _load_pool(args.pool, corpus) if args.pool else None
    report = obs_check(m, n, args.args, pool)
    if args.json:
        out.write(dump(report.to_json()))
    else:
        out.write(f"{report.verdict} ({report.tried} argument vectors, {report.unknown} unknown)\n")
        if report.separated:
            out.write(f"  witness: {' '.join(print_term(a) for a in report.witness) or '(no arguments)'}\n")
            out.write(f"  {report.direction}\n")
    return OK


def cmd_verify(args, corpus: Corpus, out) -> int:
    if args.size is not None and args.size < 1:
        raise UsageError("--size must be positive")
    result = run_suite(args.suite, args.size, args.seed, corpus)
    out.write(dump(result.to_json()) if args.json else result.render() + "\n")
    return OK if result.ok else FAILED


# -- parser -----------------------------------------------------------------


def _globals(suppress: bool) -> argparse.ArgumentParser:
    # the same flags are accepted before and after the command name
    p = argparse.ArgumentParser(add_help=False)
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--corpus", default=default(None), help="corpus file of `let Name = term;` lines")
    p.add_argument("--json", action="store_true", default=default(False), help="machine-readable output")
    p.add_argument("--seed", type=int, default=default(0), help="seed for randomized checks")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="llv", description="Reduce, type and compare terms of a non-deterministic lambda calculus.", parents=[_globals(False)])
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_globals(True)]

    p = sub.add_parser("parse", parents=common, help="parse and pretty-print a term")
    p.add_argument("term")
    p.set_defaults(run=cmd_parse)

    p = sub.add_parser("reduce", parents=common, help="explore the reduction graph")
    p.add_argument("term")
    p.add_argument("--fuel", type=int, default=200, help="maximum reduction depth")
    p.add_argument("--states", type=int, default=10_000, help="maximum number of states")
    p.add_argument("--graph", metavar="OUT", help="write the graph as JSON")
    p.set_defaults(run=cmd_reduce)

    p = sub.add_parser("check", parents=common, help="check a derivation file")
    p.add_argument("derivation")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("infer", parents=common, help="search for a typing derivation")
    p.add_argument("term")
    p.add_argument("--type", help="goal type, e.g. '1 % 1'")
    p.add_argument("--k", type=int, help="goal 1 % ... % 1 with K components")
    p.add_argument("--type-size", type=int, default=3)
    p.add_argument("--depth", type=int, default=64)
    p.add_argument("--max-k", type=int, default=3)
    p.set_defaults(run=cmd_infer)

    p = sub.add_parser("run", parents=common, help="reduce along a derivation and print the trace")
    p.add_argument("--guided", required=True, metavar="DERIVATION")
    p.set_defaults(run=cmd_run)

    p = sub.add_parser("expand", parents=common, help="rebuild a derivation from a converging trace")
    p.add_argument("--trace", required=True)
    p.set_defaults(run=cmd_expand)

    p = sub.add_parser("interp", parents=common, help="bounded interpretation of a closed term")
    p.add_argument("term")
    p.add_argument("--type-size", type=int, required=True)
    p.set_defaults(run=cmd_interp)

    p = sub.add_parser("obs", parents=common, help="look for arguments separating two terms")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--args", type=int, default=2, help="maximum number of arguments")
    p.add_argument("--pool", help="file with one closed term per line")
    p.set_defaults(run=cmd_obs)

    p = sub.add_parser("verify", parents=common, help="run a verification suite")
    p.add_argument("--suite", required=True, choices=sorted(SUITES))
    p.add_argument("--size", type=int, help="term size for the exhaustive clock check")
    p.set_defaults(run=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    random.seed(args.seed)
    try:
        corpus = load_corpus(args.corpus)
        return args.run(args, corpus, out)
    except (UsageError, ParseError, TypeSyntaxError) as e:
        print(f"llv: error: {e}", file=sys.stderr)
        return USAGE
    except DerivationError as e:
        print(f"llv: invalid derivation: {e}", file=sys.stderr)
        return FAILED
    except (OSError, ValueError) as e:
        print(f"llv: error: {e}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
