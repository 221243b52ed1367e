"""k-induction over the explicit CFG.

Base case: every path of at most k steps from the initial state is explored
(a fixpoint found on the way is an exact answer). Step case: starting from all
violating states, walk predecessors through non-violating, non-truncated
states; if this backward frontier empties within k steps, no reachable
violation can exist.
"""

from __future__ import annotations

import itertools
import time
from collections import deque
from typing import Iterable

from ..program.syntax import Program, Property
from .explicit import _path
from .semantics import CFG, compile_program
from .types import Answer, Budget, Counterexample, Verdict

# step-case enumeration of a whole store space is refused above this size
MAX_STORE_SPACE = 1 << 20


def _base_case(cfg: CFG, budget: Budget, start: float) -> Verdict | None:
    init = (cfg.entry, cfg.initial_store())
    parents = {init: (None, None)}
    depth = {init: 0}
    queue = deque([init])
    while queue:
        if time.monotonic() - start > budget.max_seconds:
            return Verdict(Answer.UNKNOWN, states=len(parents), reason="time budget exhausted")
        state = queue.popleft()
        pc, store = state
        if cfg.dead(pc, store):
            continue
        if cfg.bad(pc, store):
            steps, resolution = _path(cfg, parents, state)
            return Verdict(Answer.FALSE, Counterexample(steps, resolution, cfg.nodes[pc].line),
                           states=len(parents))
        if depth[state] >= budget.induction_depth:
            # frontier reached at the bound; the step case has to close the gap
            continue
        for r, npc, nstore in cfg.successors(pc, store):
            nxt = (npc, nstore)
            if nxt in parents:
                continue
            if len(parents) >= budget.max_states:
                return Verdict(Answer.UNKNOWN, states=len(parents), reason="state budget exhausted")
            parents[nxt] = (state, r)
            depth[nxt] = depth[state] + 1
            queue.append(nxt)
    if all(d < budget.induction_depth for d in depth.values()):
        return Verdict(Answer.TRUE, states=len(parents), reason="fixpoint within bound")
    return None


def _predecessors(cfg: CFG) -> dict[int, list[int]]:
    preds: dict[int, list[int]] = {}
    for pc, node in enumerate(cfg.nodes):
        if node.kind == "end":
            continue
        targets = {node.succ} if node.kind != "branch" else {node.succ, node.alt}
        for t in targets:
            preds.setdefault(t, []).append(pc)
    return preds


class _Preimages:
    """Predecessor stores, with assignment inverses memoised per node and context.

    The context of an assignment is the store without its target, so frontier
    states that differ only in the assigned variable share one table.
    """

    def __init__(self, cfg: CFG):
        self.cfg = cfg
        self.preds = _predecessors(cfg)
        self.inverses: dict[tuple[int, tuple], dict[int, list[int]]] = {}

    def _inverse(self, pc: int, nstore: tuple) -> dict[int, list[int]]:
        node = self.cfg.nodes[pc]
        t = node.target
        key = (pc, nstore[:t] + nstore[t + 1:])
        table = self.inverses.get(key)
        if table is None:
            table = {}
            for v in range(self.cfg.masks[t] + 1):
                store = nstore[:t] + (v,) + nstore[t + 1:]
                for new in {node.fn(store, r) & node.target_mask for r in self.cfg.values(pc)}:
                    table.setdefault(new, []).append(v)
            self.inverses[key] = table
        return table

    def __call__(self, frontier: set) -> Iterable[tuple[int, tuple]]:
        cfg = self.cfg
        for npc, nstore in frontier:
            for pc in self.preds.get(npc, ()):
                node = cfg.nodes[pc]
                if node.kind == "assign":
                    t = node.target
                    olds = range(cfg.masks[t] + 1) if node.pure_havoc else self._inverse(pc, nstore).get(nstore[t], ())
                    for v in olds:
                        yield pc, nstore[:t] + (v,) + nstore[t + 1:]
                elif node.kind == "branch":
                    for r in cfg.values(pc):
                        taken = bool(node.fn(nstore, r))
                        if (node.succ if taken else node.alt) == npc:
                            yield pc, nstore
                            break
                elif node.kind == "assume":
                    if node.fn(nstore, 0):
                        yield pc, nstore
                else:
                    yield pc, nstore


def _step_case(cfg: CFG, budget: Budget, start: float, explored: int) -> Verdict:
    goal = cfg.goal
    space = 1
    for m in cfg.masks:
        space *= m + 1
    if space > MAX_STORE_SPACE:
        return Verdict(Answer.UNKNOWN, states=explored, reason="store space too large for induction")
    frontier = set()
    for pc, node in enumerate(cfg.nodes):
        if node.check and node.line == goal.line:
            for store in itertools.product(*(range(m + 1) for m in cfg.masks)):
                if not cfg.dead(pc, store) and cfg.bad(pc, store):
                    frontier.add((pc, store))
    pre = _Preimages(cfg)
    states = explored + len(frontier)
    for _ in range(budget.induction_depth):
        if not frontier:
            return Verdict(Answer.TRUE, states=states, reason="inductive")
        if time.monotonic() - start > budget.max_seconds:
            return Verdict(Answer.UNKNOWN, states=states, reason="time budget exhausted")
        previous, frontier = frontier, set()
        for i, (pc, store) in enumerate(pre(previous)):
            if i % 4096 == 0 and time.monotonic() - start > budget.max_seconds:
                return Verdict(Answer.UNKNOWN, states=states, reason="time budget exhausted")
            if not cfg.dead(pc, store) and not cfg.bad(pc, store):
                frontier.add((pc, store))
        states += len(frontier)
        if states > budget.max_states:
            return Verdict(Answer.UNKNOWN, states=states, reason="state budget exhausted")
    if not frontier:
        return Verdict(Answer.TRUE, states=states, reason="inductive")
    return Verdict(Answer.UNKNOWN, states=states, reason="not inductive within bound")


def verify(program: Program, assumptions: Iterable[Property], goal: Property,
           budget: Budget | None = None) -> Verdict:
    budget = budget or Budget()
    start = time.monotonic()
    cfg = compile_program(program, assumptions, goal)
    base = _base_case(cfg, budget, start)
    if base is not None:
        return _timed(base, start)
    return _timed(_step_case(cfg, budget, start, 0), start)


def _timed(v: Verdict, start: float) -> Verdict:
    return Verdict(v.value, v.counterexample, v.states, time.monotonic() - start, v.reason)
