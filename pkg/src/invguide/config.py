"""Run settings shared by the CLI and the bench harness, with INI-file loading."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .adapters import AdapterConfig, ExternalVerifier
from .driver import DriverParams
from .oracle.oracles import Oracle, OracleConfig, make_oracle
from .verifier.api import BuiltinVerifier, CachedVerifier
from .verifier.types import Budget

SECTION = "invguide"


@dataclass(frozen=True)
class Settings:
    # driver
    max_proposals: int = 10
    timeout: float = 900.0
    repair: bool = True
    reprompt: bool = True
    # verifier
    verifier: str = "builtin"  # builtin | external
    engine: str = "explicit"  # explicit | kinduction
    width: int | None = None  # default: 8 builtin, 32 external
    max_states: int = 1_000_000
    verifier_timeout: float = 30.0
    induction_depth: int = 16
    verifier_cmd: str | None = None
    dialect: str = "svcomp"
    success_pattern: str = "VERIFICATION SUCCESSFUL"
    failure_pattern: str = "VERIFICATION FAILED"
    # oracle
    oracle: str = "scripted"  # live | scripted | replay
    oracle_script: str | None = None
    replay_log: str | None = None
    oracle_log: str | None = None
    samples: int = 4
    penalties: tuple[float, ...] = (1.5, 2.0)
    endpoint: str = OracleConfig.endpoint
    model: str = OracleConfig.model
    max_tokens: int = OracleConfig.max_tokens
    api_key_env: str = OracleConfig.api_key_env
    penalty_field: str = OracleConfig.penalty_field

    @property
    def effective_width(self) -> int:
        if self.width is not None:
            return self.width
        return 8 if self.verifier == "builtin" else 32

    def budget(self) -> Budget:
        return Budget(max_states=self.max_states, max_seconds=self.verifier_timeout,
                      induction_depth=self.induction_depth)

    def driver_params(self) -> DriverParams:
        return DriverParams(k=self.max_proposals, budget=self.budget(), instance_timeout=self.timeout,
                            repair=self.repair, reprompt=self.reprompt)

    def oracle_config(self) -> OracleConfig:
        return OracleConfig(endpoint=self.endpoint, model=self.model, samples=self.samples,
                            penalties=tuple(self.penalties), max_tokens=self.max_tokens,
                            api_key_env=self.api_key_env, mode=self.oracle, penalty_field=self.penalty_field)

    def make_verifier(self):
        if self.verifier == "builtin":
            return CachedVerifier(BuiltinVerifier(self.engine, self.budget()))
        if self.verifier == "external":
            if not self.verifier_cmd:
                raise ValueError("the external verifier needs a command")
            adapter = AdapterConfig.from_command(
                self.verifier_cmd, dialect=self.dialect, timeout=self.verifier_timeout,
                success_pattern=self.success_pattern, failure_pattern=self.failure_pattern)
            return CachedVerifier(ExternalVerifier(adapter))
        raise ValueError(f"unknown verifier {self.verifier!r}")

    def make_oracle(self, script: str | None = None, log: str | None = None,
                    replay: str | None = None) -> Oracle:
        return make_oracle(self.oracle_config(), script or self.oracle_script,
                           log or self.oracle_log, replay or self.replay_log)


def _boolean(raw: str) -> bool:
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def parse_penalties(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.replace(",", " ").split())


def _optional(convert):
    return lambda raw: None if raw.strip().lower() in ("", "none") else convert(raw.strip())


# annotations are strings under postponed evaluation
_CONVERTERS = {
    "bool": _boolean,
    "int": int,
    "float": float,
    "str": str.strip,
    "int | None": _optional(int),
    "str | None": _optional(str),
    "tuple[float, ...]": parse_penalties,
}


def _coerce(name: str, raw: str):
    kind = {f.name: f.type for f in fields(Settings)}[name]
    return _CONVERTERS[kind](raw)


def load_settings(path: str | Path, base: Settings | None = None) -> Settings:
    """Read ``[invguide]`` key-value pairs; keys are the option names with underscores."""
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(path)
    if not parser.has_section(SECTION):
        raise ValueError(f"{path}: missing [{SECTION}] section")
    known = {f.name for f in fields(Settings)}
    values = {}
    for key, raw in parser.items(SECTION):
        name = key.replace("-", "_")
        if name not in known:
            raise ValueError(f"{path}: unknown setting {key!r}")
        values[name] = _coerce(name, raw)
    return replace(base or Settings(), **values)


def with_overrides(settings: Settings, **values) -> Settings:
    """Replace the given settings, ignoring ``None`` (an option left unset)."""
    known = {f.name for f in fields(Settings)}
    return replace(settings, **{k: v for k, v in values.items() if k in known and v is not None})
