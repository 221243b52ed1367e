"""Oracle-guided proofs of program assertions, certified by a rule-level trace."""

from .calculus import Rule, Terminal, Trace, check_trace, dump_trace, load_trace
from .driver import DriverParams, RunResult, prepare, prove
from .program import Program, Property, parse
from .verifier import Answer, Budget, BuiltinVerifier

__version__ = "0.1.0"

__all__ = [
    "Answer", "Budget", "BuiltinVerifier", "DriverParams", "Program", "Property", "Rule", "RunResult",
    "Terminal", "Trace", "check_trace", "dump_trace", "load_trace", "parse", "prepare", "prove",
]
