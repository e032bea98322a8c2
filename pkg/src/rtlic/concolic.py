"""Distance-guided concolic search and the incremental target loop.

One search simulates the current test with symbolic inputs from ``start``
on, picks the executed branch whose untaken side is closest to the target
(earlier cycles first on ties), asks the solver for inputs that flip it
while keeping every earlier branch decision, and re-simulates. Inputs
before ``start`` stay fixed, so whatever an earlier search activated keeps
happening at the same cycle.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .cfg import DistanceMap, compute_distance
from .errors import RtlicError
from .sim import BranchEvent, SimulationTrace, Simulator, TestSet
from .solver import terms as T
from .solver.core import ConstraintVector, Predicate, SolveResult, solve, var_name

log = logging.getLogger(__name__)

_PHASE_ORDER = {"pre": 0, "edge": 1, "post": 2}


@dataclass(frozen=True)
class SearchConfig:
    n: int = 10
    limit: int = 10
    seed: int = 0
    conflict_limit: int = 200_000

    def __post_init__(self):
        if self.n < 1 or self.limit < 1:
            raise RtlicError("unroll and limit must both be >= 1")


@dataclass(frozen=True)
class AlternateBranch:
    block: str  # the side that was not taken
    branch_block: str
    negated_guard: tuple  # (Expr, polarity) that has to hold to enter ``block``
    cycle: int
    distance: int
    phase: str
    index: int  # position of the branch event in the trace

    @property
    def key(self) -> tuple:
        return (self.branch_block, self.cycle, self.phase)


@dataclass(frozen=True)
class SearchOutcome:
    tests: TestSet
    solved: bool
    activation: Optional[int] = None
    ab_cycle: Optional[int] = None  # cycle of the branch whose flip led to activation
    iterations: int = 0
    attempts: tuple = ()  # (block, cycle, phase, verdict)

    @property
    def next_start(self) -> Optional[int]:
        return None if self.activation is None else self.activation + 1


@dataclass(frozen=True)
class TargetResult:
    marker: str
    block: str
    solved: bool
    iterations: int
    start: int
    activation: Optional[int]
    ab_cycle: Optional[int]
    fragment: tuple  # TestVectors of cycles start..activation
    attempts: tuple = ()


@dataclass(frozen=True)
class IncrementalResult:
    tests: tuple  # TargetResult per queue entry, then the final target
    combined: TestSet
    initial: TestSet = field(repr=False, default=TestSet())

    @property
    def solved(self) -> tuple:
        return tuple(r.solved for r in self.tests)

    @property
    def success(self) -> bool:
        return bool(self.tests) and all(self.solved)


def select_alternate_branches(p: SimulationTrace, ds: DistanceMap, start: int,
                              key_of=None) -> list[AlternateBranch]:
    seen, out = set(), []
    for i, ev in enumerate(p.events):
        if ev.cycle < start or ev.other is None:
            continue
        k = (ev.block, ev.cycle, ev.phase)
        if k in seen:
            continue
        seen.add(k)
        d = ds.get(ev.other)
        if d is None or ev.other in p.blocks_at(ev.cycle):
            continue
        out.append(AlternateBranch(ev.other, ev.block, (None, not ev.polarity),
                                   ev.cycle, d, ev.phase, i))
    key_of = key_of or _label_key
    out.sort(key=lambda a: (a.distance, a.cycle, key_of(a.block), _PHASE_ORDER[a.phase]))
    return out


def _label_key(label: str) -> tuple:
    return (0, int(label[1:])) if label.startswith("E") else (1, int(label[1:]))


def build_constraint_vector(ab: AlternateBranch, p: SimulationTrace, inputs: dict,
                            tests: TestSet, dominators=None) -> ConstraintVector:
    """Keep the path up to ``ab`` and negate ``ab`` itself.

    Every branch decision of earlier cycles is kept. In the pivot cycle only
    the decisions that lead to the pivot (branches of the same process run
    that dominate it) are kept; everything else in that cycle is free and
    reaches the pivot through the unrolled state terms.
    """
    ev = p.events[ab.index]
    doms = dominators
    per_cycle: list[list[Predicate]] = [[] for _ in range(ab.cycle)]
    for i, e in enumerate(p.events[: ab.index]):
        if e.term.op == "const":
            continue
        if e.cycle == ab.cycle and (e.process != ev.process or e.phase != ev.phase
                                    or (doms is not None and e.block not in doms)):
            continue
        per_cycle[e.cycle - 1].append(Predicate(e.term, e.polarity, e.cycle, e.block, e.phase))
    pivot = Predicate(ev.term, not ev.polarity, ev.cycle, ev.block, ev.phase)
    defaults = {var_name(k, c): tests.value(k, c) for c in range(1, ab.cycle + 1) for k in inputs}
    return ConstraintVector(tuple(tuple(x) for x in per_cycle), pivot,
                            tuple(inputs.items()), defaults)


def concolic(design, target: str, tests: TestSet, start: int, cfg: SearchConfig,
             sim: Optional[Simulator] = None, solver=None) -> SearchOutcome:
    """Search for inputs at cycles >= ``start`` that execute block ``target``."""
    sim = sim or Simulator(design)
    solver = solver or (lambda cv: solve(cv, cfg.conflict_limit))
    if not 1 <= start <= cfg.n:
        return SearchOutcome(tests, False)
    tests = tests.padded(sim.inputs, cfg.n)
    ds = compute_distance(sim.cs, target)
    key_of = lambda label: sim.cs.blocks[label].key  # noqa: E731
    trace = sim.run(tests, cfg.n, symbolic_from=start)
    act = trace.first_activation(target, start)
    if act is not None:
        return SearchOutcome(tests, True, act, None, 0)
    tried: set = set()
    iterations = 0
    attempts = []
    while iterations < cfg.limit:
        progressed = False
        for ab in select_alternate_branches(trace, ds, start, key_of):
            if ab.key in tried:
                continue
            tried.add(ab.key)
            if trace.events[ab.index].term.op == "const":
                continue  # no input at or after start can change this branch
            if iterations >= cfg.limit:
                break
            doms = sim.cs.cfg_of(ab.branch_block).dominators(ab.branch_block)
            cv = build_constraint_vector(ab, trace, sim.inputs, tests, doms)
            iterations += 1
            res: SolveResult = solver(cv)
            log.debug("flip %s@%d/%s d=%d -> %s", ab.branch_block, ab.cycle, ab.phase,
                      ab.distance, res.status)
            if not res.sat:
                attempts.append((ab.block, ab.cycle, ab.phase, res.status))
                continue
            candidate = tests.with_values(res.model.assignments, range(start, ab.cycle + 1))
            new_trace = sim.run(candidate, cfg.n, symbolic_from=start)
            if ab.block not in new_trace.blocks_at(ab.cycle):
                attempts.append((ab.block, ab.cycle, ab.phase, "rejected"))
                continue
            attempts.append((ab.block, ab.cycle, ab.phase, "flipped"))
            tests, trace = candidate, new_trace
            act = trace.first_activation(target, start)
            if act is not None:
                return SearchOutcome(tests, True, act, ab.cycle, iterations, tuple(attempts))
            progressed = True
            break
        if not progressed:
            break
    return SearchOutcome(tests, False, None, None, iterations, tuple(attempts))


def incremental_run(design, tq, final_target: str, cfg: SearchConfig,
                    initial: Optional[TestSet] = None, solver=None) -> IncrementalResult:
    """Solve the queue in order, each search starting after the previous activation."""
    sim = Simulator(design)
    tests = initial if initial is not None else TestSet.random(sim.inputs, cfg.n, cfg.seed)
    first = tests
    start = 1
    results = []
    goals = [(t.marker, t.block) for t in tq] + [(sim.markers.get(final_target, final_target), final_target)]
    for marker, block in goals:
        out = concolic(design, block, tests, start, cfg, sim, solver)
        tests = out.tests
        if not out.solved:
            results.append(TargetResult(marker, block, False, out.iterations, start, None, None,
                                        (), out.attempts))
            log.info("%s not activated within limit", marker)
            return IncrementalResult(tuple(results), tests, first)
        frag = tuple(tests.slice(start, out.activation))
        results.append(TargetResult(marker, block, True, out.iterations, start, out.activation,
                                    out.ab_cycle, frag, out.attempts))
        log.info("%s activated at cycle %d", marker, out.activation)
        start = out.activation + 1
        if start > cfg.n and (marker, block) != goals[-1]:
            results.append(TargetResult(goals[len(results)][0], goals[len(results)][1], False, 0,
                                        start, None, None, ()))
            return IncrementalResult(tuple(results), tests, first)
    combined = TestSet(tuple(tests.slice(1, start - 1)))
    return IncrementalResult(tuple(results), combined, first)
