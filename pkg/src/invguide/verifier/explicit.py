"""Exhaustive breadth-first exploration of ``(pc, store)`` states."""

from __future__ import annotations

import random
import time
from collections import deque
from typing import Iterable

from ..program.syntax import Program, Property
from .semantics import CFG, compile_program
from .types import (
    Answer,
    Budget,
    Counterexample,
    Stability,
    StabilityResult,
    Step,
    Verdict,
)

_CLOCK_EVERY = 1024


def _sampler(budget: Budget):
    if budget.nondet_samples is None:
        return None
    rng = random.Random(budget.seed)

    def sample(domain: int) -> Iterable[int]:
        if domain <= budget.nondet_samples:
            return range(domain)
        return sorted(rng.sample(range(domain), budget.nondet_samples))

    return sample


def _path(cfg: CFG, parents: dict, state) -> tuple[tuple[Step, ...], tuple[int, ...]]:
    chain = []
    resolution = []
    while state is not None:
        parent, r = parents[state]
        chain.append(state)
        if r is not None:
            resolution.append(r)
        state = parent
    chain.reverse()
    resolution.reverse()
    steps = tuple(
        Step(cfg.nodes[pc].line, cfg.store_items(store)) for pc, store in chain if cfg.nodes[pc].check
    )
    return steps, tuple(resolution)


def explore(cfg: CFG, budget: Budget) -> Verdict:
    start = time.monotonic()
    sample = _sampler(budget)
    init = (cfg.entry, cfg.initial_store())
    parents = {init: (None, None)}
    queue = deque([init])
    exhausted = False
    count = 0
    while queue:
        count += 1
        if count % _CLOCK_EVERY == 0 and time.monotonic() - start > budget.max_seconds:
            return Verdict(Answer.UNKNOWN, states=len(parents), seconds=time.monotonic() - start,
                           reason="time budget exhausted")
        state = queue.popleft()
        pc, store = state
        if cfg.dead(pc, store):
            continue
        if cfg.bad(pc, store):
            steps, resolution = _path(cfg, parents, state)
            cex = Counterexample(steps, resolution, cfg.nodes[pc].line)
            return Verdict(Answer.FALSE, cex, states=len(parents), seconds=time.monotonic() - start)
        for r, npc, nstore in cfg.successors(pc, store, sample):
            nxt = (npc, nstore)
            if nxt in parents:
                continue
            if len(parents) >= budget.max_states:
                exhausted = True
                break
            parents[nxt] = (state, r)
            queue.append(nxt)
        if exhausted:
            return Verdict(Answer.UNKNOWN, states=len(parents), seconds=time.monotonic() - start,
                           reason="state budget exhausted")
    elapsed = time.monotonic() - start
    if sample is not None and any(n.nondet and n.domain > budget.nondet_samples for n in cfg.nodes):
        return Verdict(Answer.UNKNOWN, states=len(parents), seconds=elapsed, reason="nondet sampled")
    return Verdict(Answer.TRUE, states=len(parents), seconds=elapsed)


def verify(program: Program, assumptions: Iterable[Property], goal: Property,
           budget: Budget | None = None) -> Verdict:
    cfg = compile_program(program, assumptions, goal)
    return explore(cfg, budget or Budget())


def stability(program: Program, q: Property, budget: Budget | None = None) -> StabilityResult:
    """Search the product of states with the truth value of ``q`` seen so far.

    A path reaching ``q.line`` once with ``q`` true and once with it false is a
    witness execution for instability.
    """
    budget = budget or Budget()
    cfg = compile_program(program, (), None)
    check = compile_program(program, (), q).goal
    start = time.monotonic()
    init = (cfg.entry, cfg.initial_store(), None)
    parents: dict = {init: (None, None)}
    queue = deque([init])
    count = 0
    while queue:
        count += 1
        if count % _CLOCK_EVERY == 0 and time.monotonic() - start > budget.max_seconds:
            return StabilityResult(Stability.UNKNOWN, states=len(parents))
        state = queue.popleft()
        pc, store, seen = state
        if cfg.dead(pc, store):
            continue
        node = cfg.nodes[pc]
        if node.check and node.line == q.line:
            value = check.holds(store)
            if seen is not None and seen != value:
                chain, resolution = [], []
                cur = state
                while cur is not None:
                    parent, r = parents[cur]
                    chain.append(cur)
                    if r is not None:
                        resolution.append(r)
                    cur = parent
                witness = tuple(
                    Step(cfg.nodes[c[0]].line, cfg.store_items(c[1]))
                    for c in reversed(chain) if cfg.nodes[c[0]].check
                )
                return StabilityResult(Stability.NOT_STABLE, witness, tuple(reversed(resolution)), len(parents))
            seen = value
        for r, npc, nstore in cfg.successors(pc, store):
            nxt = (npc, nstore, seen)
            if nxt in parents:
                continue
            if len(parents) >= budget.max_states:
                return StabilityResult(Stability.UNKNOWN, states=len(parents))
            parents[nxt] = (state, r)
            queue.append(nxt)
    return StabilityResult(Stability.STABLE, states=len(parents))
