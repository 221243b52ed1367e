"""Command line entry point: ``verify``, ``bench`` and ``check-trace``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .adapters import SpawnError, UnsupportedConstruct
from .bench import run_suite, summarize, verifier_header
from .calculus import CertificateFailure, check_trace, dump_trace, load_trace
from .config import Settings, load_settings, parse_penalties, with_overrides
from .driver import prepare, prove
from .program.parser import ParseError, parse

EXIT = {"success": 0, "fail": 1, "unknown": 2, "timeout": 2}
USAGE = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _penalties(text: str) -> tuple[float, ...]:
    try:
        values = parse_penalties(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad penalty list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("at least one penalty is needed")
    return values


def _common() -> argparse.ArgumentParser:
    # every default is None so that config-file values survive unless a flag is given
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", help="INI file with an [invguide] section mirroring these flags")
    g = p.add_argument_group("driver")
    g.add_argument("--max-proposals", type=int, dest="max_proposals", metavar="K")
    g.add_argument("--timeout", type=float, metavar="S", help="wall-clock budget per instance")
    g.add_argument("--no-repair", dest="repair", action="store_const", const=False)
    g.add_argument("--no-reprompt", dest="reprompt", action="store_const", const=False)
    g = p.add_argument_group("verifier")
    g.add_argument("--verifier", choices=("builtin", "external"))
    g.add_argument("--engine", choices=("explicit", "kinduction"))
    g.add_argument("--width", type=int, metavar="W")
    g.add_argument("--max-states", type=int, dest="max_states")
    g.add_argument("--verifier-cmd", dest="verifier_cmd", metavar="CMD",
                   help="external command; {file} is replaced by the rendered source")
    g.add_argument("--verifier-timeout", type=float, dest="verifier_timeout", metavar="S")
    g.add_argument("--dialect", choices=("svcomp", "plain"))
    g = p.add_argument_group("oracle")
    g.add_argument("--oracle", choices=("live", "scripted", "replay"))
    g.add_argument("--oracle-script", dest="oracle_script", metavar="FILE")
    g.add_argument("--replay-log", dest="replay_log", metavar="FILE")
    g.add_argument("--oracle-log", dest="oracle_log", metavar="FILE")
    g.add_argument("--samples", type=int)
    g.add_argument("--penalties", type=_penalties, metavar="P1,P2")
    g.add_argument("--model")
    g.add_argument("--endpoint")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(prog="invguide", description="Oracle-guided, verifier-checked proofs of assertions.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="prove the assertion of one program")
    v.add_argument("file")
    v.add_argument("--property-line", type=int, dest="property_line", metavar="N")
    v.add_argument("--trace", metavar="FILE", help="write the rule-application trace as JSON lines")

    b = sub.add_parser("bench", parents=[common], help="run every program of a directory")
    b.add_argument("dir")
    b.add_argument("--runs", type=int, default=1)
    b.add_argument("--out", default="results.csv", metavar="CSV")
    b.add_argument("--trace-dir", dest="trace_dir", metavar="DIR")
    b.add_argument("--jobs", type=int, default=1)

    c = sub.add_parser("check-trace", parents=[common], help="re-check a trace with the builtin verifier")
    c.add_argument("file")
    return parser


def settings_from(args: argparse.Namespace) -> Settings:
    base = load_settings(args.config) if args.config else Settings()
    return with_overrides(base, **vars(args))


def cmd_verify(args, settings: Settings) -> int:
    program, goal = prepare(parse(Path(args.file).read_text(), width=settings.effective_width),
                            args.property_line)
    result = prove(program, goal, settings.make_verifier(), settings.make_oracle(),
                   settings.driver_params(), certify=True)
    if args.trace:
        dump_trace(result.trace, args.trace, {"instance": Path(args.file).name, **verifier_header(settings)})
    print(f"outcome: {result.outcome}")
    print(f"goal: {goal}")
    print(f"rules: {' '.join(result.trace.rules)}")
    print(f"proposals: {result.proposals}  verifier calls: {result.verifier_calls}  "
          f"oracle calls: {result.oracle_calls}  time: {result.seconds:.2f}s")
    return EXIT[result.outcome]


def cmd_bench(args, settings: Settings) -> int:
    if args.runs < 1 or args.jobs < 1:
        raise ValueError("--runs and --jobs must be at least 1")
    if not Path(args.dir).is_dir():
        raise ValueError(f"{args.dir} is not a directory")
    reports = run_suite(args.dir, settings, args.runs, args.out, args.trace_dir, args.jobs)
    for r in reports:
        print(f"{r.run} {r.instance}: {r.outcome} ({r.proposals} proposals, {r.seconds:.2f}s)")
    for row in summarize(reports):
        print(f"run {row['run']}: solved {row['Solved']}/{row['instances']}  "
              f"time {row['Time'] or '-'}  proposals {row['#proposals'] or '-'}")
    print(f"wrote {args.out}")
    return 0


def cmd_check_trace(args, settings: Settings) -> int:
    trace = load_trace(args.file)
    # replay with the verifier configuration recorded at proof time unless overridden
    header = json.loads(Path(args.file).read_text().splitlines()[0])
    settings = with_overrides(settings, **{k: header.get(k) for k in ("engine", "max_states", "induction_depth")
                                           if getattr(args, k, None) is None})
    if settings.verifier != "builtin":
        raise ValueError("traces are re-checked with the builtin verifier")
    try:
        cert = check_trace(trace, settings.make_verifier())
    except CertificateFailure as exc:
        print(f"rejected: {exc}")
        return 1
    print(f"certified: {cert.outcome} ({cert.steps} steps, {cert.replayed_calls} verdicts replayed)")
    return 0


COMMANDS = {"verify": cmd_verify, "bench": cmd_bench, "check-trace": cmd_check_trace}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    try:
        settings = settings_from(args)
        return COMMANDS[args.command](args, settings)
    except CertificateFailure:
        raise  # a produced trace that does not check is a bug, not a usage error
    except (OSError, ParseError, ValueError, UnsupportedConstruct, SpawnError) as exc:
        print(f"invguide: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
