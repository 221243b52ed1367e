from __future__ import annotations

import enum
from dataclasses import dataclass, field


class Answer(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


class Stability(enum.Enum):
    STABLE = "stable"
    NOT_STABLE = "not_stable"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Step:
    line: int
    store: tuple[tuple[str, int], ...]

    def as_dict(self) -> dict[str, int]:
        return dict(self.store)


@dataclass(frozen=True)
class Counterexample:
    """A violating run: visited lines with stores, and the nondet values consumed."""

    steps: tuple[Step, ...]
    resolution: tuple[int, ...]
    line: int


@dataclass(frozen=True)
class Verdict:
    value: Answer
    counterexample: Counterexample | None = None
    states: int = 0
    seconds: float = 0.0
    reason: str = ""

    def __post_init__(self):
        # a checker-built refutation always carries its witness; external tools
        # report a bare False (flagged by reason="external")
        if self.value is Answer.FALSE and self.counterexample is None and self.reason != "external":
            raise ValueError("False verdicts from the built-in checker need a counterexample")


@dataclass(frozen=True)
class StabilityResult:
    value: Stability
    witness: tuple[Step, ...] = ()
    resolution: tuple[int, ...] = ()
    states: int = 0


@dataclass(frozen=True)
class Budget:
    max_states: int = 1_000_000
    max_seconds: float = 30.0
    # None explores every rand() value; an int samples that many (True becomes Unknown)
    nondet_samples: int | None = None
    induction_depth: int = 16
    seed: int = field(default=0, compare=True)

    def __post_init__(self):
        if self.max_states < 1 or self.max_seconds <= 0 or self.induction_depth < 1:
            raise ValueError("budget limits must be positive")
        if self.nondet_samples is not None and self.nondet_samples < 1:
            raise ValueError("nondet_samples must be positive")
