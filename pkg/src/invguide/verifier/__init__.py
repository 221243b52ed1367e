"""The three-valued verifier: explicit-state and k-induction engines behind one interface."""

from .api import BuiltinVerifier, CachedVerifier, Verifier, syntactic_stability
from .evaluate import evaluate
from .types import Answer, Budget, Counterexample, Stability, StabilityResult, Verdict

__all__ = [
    "Answer", "Budget", "BuiltinVerifier", "CachedVerifier", "Counterexample", "Stability",
    "StabilityResult", "Verdict", "Verifier", "evaluate", "syntactic_stability",
]
