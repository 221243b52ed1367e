"""Propose/repair oracles: live chat-completion endpoint, script, replay log, callback."""

from __future__ import annotations

import hashlib
import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from ..program.parser import ParseError, parse_expr
from ..program.printer import print_expr, print_program
from ..program.syntax import Program, Property
from ..verifier.types import Answer
from .prompts import NoMarkers, build_propose_prompt, build_repair_prompt, visible_markers
from .responses import Origin, Proposal, enforce_condition1, parse_response, rank_and_dedup


class OracleUnavailable(RuntimeError):
    """Network, authentication or protocol failure talking to the model."""


@dataclass(frozen=True)
class OracleConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4"
    samples: int = 4
    penalties: tuple[float, ...] = (1.5, 2.0)
    max_tokens: int = 256
    api_key_env: str = "OPENAI_API_KEY"
    mode: str = "scripted"  # live | scripted | replay
    penalty_field: str = "frequency_penalty"
    timeout: float = 60.0

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be at least 1")
        if self.mode not in ("live", "scripted", "replay"):
            raise ValueError(f"unknown oracle mode {self.mode!r}")


@dataclass(frozen=True)
class Request:
    kind: str  # propose | repair
    prompt: str
    fingerprint: str
    goal: Property
    failed: Property | None = None
    verdict: Answer | None = None


def fingerprint(kind: str, program: Program, goal: Property, failed: Property | None = None) -> str:
    parts = [kind, print_program(program), print_expr(goal.predicate), str(goal.line)]
    if failed is not None:
        parts += [print_expr(failed.predicate), str(failed.line)]
    return hashlib.sha256("\x1f".join(parts).encode()).hexdigest()[:16]


class Oracle:
    """Template for both oracle kinds: prompt, sample, parse, rank, filter."""

    name = "oracle"

    def __init__(self, log_path: str | Path | None = None):
        self.log_path = Path(log_path) if log_path else None
        self._log_lock = threading.Lock()
        self.calls = 0

    def samples(self, request: Request) -> list[str]:
        raise NotImplementedError

    def _log(self, request: Request, responses: Sequence[str]) -> None:
        if self.log_path is None:
            return
        with self._log_lock, self.log_path.open("a") as fh:
            for i, text in enumerate(responses):
                fh.write(json.dumps({
                    "oracle": self.name, "kind": request.kind, "fingerprint": request.fingerprint,
                    "call": self.calls, "sample": i, "prompt": request.prompt, "response": text,
                }) + "\n")

    def _collect(self, request: Request, program: Program, markers: dict[str, int],
                 fixed_line: int | None, origin: Origin) -> list[Proposal]:
        self.calls += 1
        responses = self.samples(request)
        self._log(request, responses)
        found: list[Proposal] = []
        for text in responses:
            found.extend(parse_response(text, markers, program, fixed_line, self.name,
                                        request.fingerprint, origin))
        return enforce_condition1(rank_and_dedup(found), request.goal)

    def propose(self, program: Program, goal: Property) -> list[Proposal]:
        try:
            prompt, markers = build_propose_prompt(program, goal)
        except NoMarkers:
            return []
        request = Request("propose", prompt, fingerprint("propose", program, goal), goal)
        return self._collect(request, program, markers, None, Origin("propose", goal))

    def repair(self, program: Program, goal: Property, failed: Property, verdict: Answer) -> list[Proposal]:
        prompt = build_repair_prompt(program, goal, failed, verdict)
        request = Request("repair", prompt, fingerprint("repair", program, goal, failed), goal, failed, verdict)
        origin = Origin("repair", goal, failed, verdict.value)
        return self._collect(request, program, {}, failed.line, origin)


# ---------------------------------------------------------------- scripted


def _normalize_key(key: str, markers: dict[str, int] | None = None) -> tuple[str, str | None]:
    text, _, at = key.rpartition("@") if "@" in key else (key, "", "")
    text = text.strip()
    try:
        pred = print_expr(parse_expr(text))
    except ParseError:
        pred = text
    return pred, (at.strip() or None)


class ScriptedOracle(Oracle):
    """Deterministic oracle answering from a JSON-like script.

    ``{"propose": {"goal": [call, ...]}, "repair": {"goal | failed": [...]},
    "fingerprints": {"<hex>": [...]}}`` where each call is a response string or
    a list of sample strings and a goal key is ``pred`` or ``pred@line``
    (``line`` a number or a marker name). Each oracle call consumes one entry.
    """

    name = "scripted"

    def __init__(self, script: dict | None = None, log_path: str | Path | None = None):
        super().__init__(log_path)
        script = script or {}
        self.by_fingerprint = {k: list(v) for k, v in script.get("fingerprints", {}).items()}
        self.propose_entries = [(_normalize_key(k), list(v)) for k, v in script.get("propose", {}).items()]
        self.repair_entries = []
        for k, v in script.get("repair", {}).items():
            goal_key, sep, failed_key = k.partition("|")
            if not sep:
                raise ValueError(f"repair key {k!r} must look like 'goal | failed'")
            self.repair_entries.append(((_normalize_key(goal_key), _normalize_key(failed_key)), list(v)))
        self._program: Program | None = None

    @classmethod
    def from_file(cls, path: str | Path, log_path: str | Path | None = None) -> ScriptedOracle:
        return cls(json.loads(Path(path).read_text()), log_path)

    def _matches(self, key: tuple[str, str | None], prop: Property, program: Program) -> int | None:
        """Match quality: 2 with a line or marker, 1 by predicate only, None otherwise."""
        pred, at = key
        if pred != print_expr(prop.predicate):
            return None
        if at is None:
            return 1
        if at.isdigit():
            return 2 if int(at) == prop.line else None
        return 2 if program.markers.get(at) == prop.line else None

    def _take(self, entries, score) -> list[str]:
        best = None
        for key, calls in entries:
            s = score(key)
            if s is not None and calls and (best is None or s > best[0]):
                best = (s, calls)
        if best is None:
            return []
        call = best[1].pop(0)
        return [call] if isinstance(call, str) else list(call)

    def samples(self, request: Request) -> list[str]:
        if request.fingerprint in self.by_fingerprint:
            calls = self.by_fingerprint[request.fingerprint]
            if not calls:
                return []
            call = calls.pop(0)
            return [call] if isinstance(call, str) else list(call)
        program = self._program
        if request.kind == "propose":
            return self._take(self.propose_entries, lambda k: self._matches(k, request.goal, program))

        def score(key):
            a = self._matches(key[0], request.goal, program)
            b = self._matches(key[1], request.failed, program)
            return None if a is None or b is None else a + b

        return self._take(self.repair_entries, score)

    def propose(self, program: Program, goal: Property) -> list[Proposal]:
        self._program = program
        return super().propose(program, goal)

    def repair(self, program: Program, goal: Property, failed: Property, verdict: Answer) -> list[Proposal]:
        self._program = program
        return super().repair(program, goal, failed, verdict)


# ---------------------------------------------------------------- replay


class ReplayOracle(Oracle):
    """Answers from a replay log written by any oracle, matched by fingerprint."""

    name = "replay"

    def __init__(self, replay_path: str | Path, log_path: str | Path | None = None):
        super().__init__(log_path)
        grouped: dict[str, dict[int, list[tuple[int, str]]]] = {}
        for line in Path(replay_path).read_text().splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            grouped.setdefault(rec["fingerprint"], {}).setdefault(rec["call"], []).append(
                (rec["sample"], rec["response"]))
        self.queues = {
            fp: [[text for _, text in sorted(calls[c])] for c in sorted(calls)]
            for fp, calls in grouped.items()
        }

    def samples(self, request: Request) -> list[str]:
        queue = self.queues.get(request.fingerprint)
        return queue.pop(0) if queue else []


# ---------------------------------------------------------------- live


class LiveOracle(Oracle):
    """Chat-completion client; one request per (penalty, sample) pair, issued concurrently."""

    name = "live"

    def __init__(self, config: OracleConfig, log_path: str | Path | None = None, client=None):
        super().__init__(log_path)
        self.config = config
        self._client = client

    def _client_or_new(self):
        if self._client is None:
            import httpx

            self._client = httpx.Client(timeout=self.config.timeout)
        return self._client

    def _one(self, prompt: str, penalty: float) -> str:
        import httpx

        key = os.environ.get(self.config.api_key_env)
        if not key:
            raise OracleUnavailable(f"environment variable {self.config.api_key_env} is not set")
        body = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": self.config.max_tokens,
            self.config.penalty_field: penalty,
        }
        try:
            resp = self._client_or_new().post(
                self.config.endpoint, json=body, headers={"Authorization": f"Bearer {key}"})
            resp.raise_for_status()
            return resp.json()["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            raise OracleUnavailable(str(exc)) from exc

    def samples(self, request: Request) -> list[str]:
        jobs = [p for p in self.config.penalties for _ in range(self.config.samples)]
        with ThreadPoolExecutor(max_workers=min(8, len(jobs))) as pool:
            # map keeps sample order, so merging stays deterministic
            return list(pool.map(lambda p: self._one(request.prompt, p), jobs))


# ---------------------------------------------------------------- callback


class CallbackOracle(Oracle):
    """Oracle backed by Python functions returning response texts or Properties.

    Properties bypass text parsing but still go through ranking and the
    line-ordering filter. Useful for adversarial testing.
    """

    name = "callback"

    def __init__(self, propose: Callable[[Program, Property], Iterable] | None = None,
                 repair: Callable[[Program, Property, Property, Answer], Iterable] | None = None,
                 log_path: str | Path | None = None):
        super().__init__(log_path)
        self._propose_fn = propose
        self._repair_fn = repair

    def _direct(self, items: Iterable, request: Request, program: Program, markers, fixed_line,
                origin: Origin) -> list[Proposal]:
        self.calls += 1
        found: list[Proposal] = []
        texts = []
        for item in items:
            if isinstance(item, Property):
                line = fixed_line if fixed_line is not None else item.line
                found.append(Proposal(Property(item.predicate, line), 1, self.name,
                                      print_expr(item.predicate), request.fingerprint, 0, origin))
            else:
                texts.append(item)
                found.extend(parse_response(item, markers, program, fixed_line, self.name,
                                            request.fingerprint, origin))
        self._log(request, texts)
        return enforce_condition1(rank_and_dedup(found), request.goal)

    def propose(self, program: Program, goal: Property) -> list[Proposal]:
        if self._propose_fn is None:
            return []
        markers = visible_markers(program, goal) if program.markers else {}
        request = Request("propose", "", fingerprint("propose", program, goal), goal)
        return self._direct(self._propose_fn(program, goal), request, program, markers, None,
                            Origin("propose", goal))

    def repair(self, program: Program, goal: Property, failed: Property, verdict: Answer) -> list[Proposal]:
        if self._repair_fn is None:
            return []
        request = Request("repair", "", fingerprint("repair", program, goal, failed), goal, failed, verdict)
        return self._direct(self._repair_fn(program, goal, failed, verdict), request, program, {},
                            failed.line, Origin("repair", goal, failed, verdict.value))


def make_oracle(config: OracleConfig, script: str | Path | None = None,
                log_path: str | Path | None = None, replay: str | Path | None = None) -> Oracle:
    if config.mode == "live":
        return LiveOracle(config, log_path)
    if config.mode == "replay":
        if replay is None:
            raise ValueError("replay mode needs a replay log")
        return ReplayOracle(replay, log_path)
    if script is None:
        return ScriptedOracle({}, log_path)
    return ScriptedOracle.from_file(script, log_path)
