"""Proposal and repair oracles, prompts and response handling."""

from .oracles import (CallbackOracle, LiveOracle, Oracle, OracleConfig, OracleUnavailable, ReplayOracle,
                      ScriptedOracle, make_oracle)
from .prompts import build_propose_prompt, build_repair_prompt
from .responses import Proposal, enforce_condition1, parse_response, rank_and_dedup

__all__ = [
    "CallbackOracle", "LiveOracle", "Oracle", "OracleConfig", "OracleUnavailable", "Proposal",
    "ReplayOracle", "ScriptedOracle", "build_propose_prompt", "build_repair_prompt",
    "enforce_condition1", "make_oracle", "parse_response", "rank_and_dedup",
]
