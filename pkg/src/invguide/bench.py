"""Benchmark harness: one instance per file, per-run CSV rows and per-run summaries."""

from __future__ import annotations

import csv
import logging
import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .calculus import dump_trace
from .config import Settings
from .driver import prepare, prove
from .program.parser import ParseError, parse

log = logging.getLogger(__name__)

SOURCE_SUFFIXES = (".c", ".imp")
COLUMNS = ("run", "instance", "outcome", "Solved", "Time", "#proposals", "log2_bucket",
           "verifier_calls", "trace", "error")
SUMMARY_COLUMNS = ("run", "instances", "Solved", "Time", "#proposals", "skipped")


def log2_bucket(n: int) -> int:
    """ceil(log2(max(n, 1)))."""
    return (n - 1).bit_length() if n >= 1 else 0


@dataclass(frozen=True)
class RunReport:
    instance: str
    outcome: str  # success | fail | unknown | timeout | skipped
    seconds: float = 0.0
    proposals: int = 0
    verifier_calls: int = 0
    trace_path: str = ""
    run: str = "A"
    error: str = ""

    @property
    def solved(self) -> bool:
        return self.outcome == "success"

    def row(self) -> dict:
        return {
            "run": self.run, "instance": self.instance, "outcome": self.outcome,
            "Solved": int(self.solved), "Time": f"{self.seconds:.3f}", "#proposals": self.proposals,
            "log2_bucket": log2_bucket(self.proposals), "verifier_calls": self.verifier_calls,
            "trace": self.trace_path, "error": self.error,
        }


def verifier_header(settings: Settings) -> dict:
    """Verifier settings a trace needs for its verdicts to replay identically."""
    return {"engine": settings.engine, "max_states": settings.max_states,
            "induction_depth": settings.induction_depth}


def run_label(index: int) -> str:
    letters = string.ascii_uppercase
    return letters[index] if index < len(letters) else f"R{index + 1}"


def sibling(path: Path, suffix: str) -> Path | None:
    candidate = path.with_name(path.stem + suffix)
    return candidate if candidate.exists() else None


def run_instance(path: str | Path, settings: Settings, trace_dir: str | Path | None = None,
                 run: str = "A", property_line: int | None = None) -> RunReport:
    """Prove the single assertion of one file and persist its trace."""
    path = Path(path)
    try:
        program, goal = prepare(parse(path.read_text(), width=settings.effective_width), property_line)
    except (OSError, ParseError, ValueError) as exc:
        return RunReport(path.name, "skipped", run=run, error=str(exc))
    out = Path(trace_dir) if trace_dir else None
    oracle_log = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        oracle_log = out / f"{path.stem}.{run}.oracle.jsonl"
    script = settings.oracle_script or sibling(path, ".script.json")
    replay = settings.replay_log or sibling(path, ".replay.jsonl")
    oracle = settings.make_oracle(str(script) if script else None,
                                  str(oracle_log) if oracle_log else None,
                                  str(replay) if replay else None)
    verifier = settings.make_verifier()
    result = prove(program, goal, verifier, oracle, settings.driver_params(), certify=True)
    trace_path = ""
    if out is not None:
        trace_path = str(out / f"{path.stem}.{run}.trace.jsonl")
        dump_trace(result.trace, trace_path, {"instance": path.name, "run": run, **verifier_header(settings)})
    return RunReport(path.name, result.outcome, result.seconds, result.proposals,
                     result.verifier_calls, trace_path, run)


def _job(args) -> RunReport:
    return run_instance(*args)


def instances(directory: str | Path) -> list[Path]:
    return sorted(p for p in Path(directory).iterdir() if p.suffix in SOURCE_SUFFIXES and p.is_file())


def summarize(reports: list[RunReport]) -> list[dict]:
    """Per-run aggregate: solved count, and mean time and proposals over solved instances."""
    rows = []
    for run in sorted({r.run for r in reports}):
        mine = [r for r in reports if r.run == run]
        solved = [r for r in mine if r.solved]
        rows.append({
            "run": run,
            "instances": sum(r.outcome != "skipped" for r in mine),
            "Solved": len(solved),
            "Time": f"{sum(r.seconds for r in solved) / len(solved):.3f}" if solved else "",
            "#proposals": f"{sum(r.proposals for r in solved) / len(solved):.2f}" if solved else "",
            "skipped": sum(r.outcome == "skipped" for r in mine),
        })
    return rows


def write_csv(path: str | Path, rows: list[dict], columns) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns))
        writer.writeheader()
        writer.writerows(rows)


def run_suite(directory: str | Path, settings: Settings, runs: int = 1, out: str | Path | None = None,
              trace_dir: str | Path | None = None, jobs: int = 1) -> list[RunReport]:
    """Run every instance of ``directory`` ``runs`` times (labels A, B, C, ...).

    Writes ``out`` with one row per (run, instance), ``<out stem>.summary.csv``
    with one row per run and, for several runs, ``<out stem>.<label>.csv`` each.
    """
    files = instances(directory)
    if trace_dir is None and out is not None:
        trace_dir = Path(out).with_suffix("").as_posix() + ".traces"
    tasks = [(f, settings, trace_dir, run_label(i)) for i in range(runs) for f in files]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_job, tasks))
    else:
        reports = [_job(t) for t in tasks]
    if out is not None:
        out = Path(out)
        write_csv(out, [r.row() for r in reports], COLUMNS)
        write_csv(out.with_suffix(".summary.csv"), summarize(reports), SUMMARY_COLUMNS)
        if runs > 1:
            for i in range(runs):
                label = run_label(i)
                write_csv(out.with_suffix(f".{label}.csv"), [r.row() for r in reports if r.run == label], COLUMNS)
    for r in reports:
        log.info("%s %s: %s", r.run, r.instance, r.outcome)
    return reports

