from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import terms as T
from .bitblast import BitBlaster
from .sat import SAT, UNKNOWN, UNSAT, SatSolver


def var_name(signal: str, cycle: int) -> str:
    return f"{signal}__c{cycle}"


def split_var(name: str) -> tuple[str, int]:
    sig, _, c = name.rpartition("__c")
    return sig, int(c)


@dataclass(frozen=True)
class Predicate:
    """Requires ``term`` (1 bit) to evaluate to ``polarity``."""

    term: T.Term
    polarity: bool
    cycle: int
    block: str = ""  # branch block the guard belongs to
    phase: str = ""

    @property
    def required(self) -> T.Term:
        return self.term if self.polarity else T.bvnot(self.term)


@dataclass(frozen=True)
class ConstraintVector:
    per_cycle: tuple  # per_cycle[i] holds the predicates of cycle i + 1
    pivot: Predicate
    inputs: tuple = ()  # (name, width) of the design inputs
    defaults: dict = field(default_factory=dict, compare=False)  # var name -> current value

    @property
    def cycle(self) -> int:
        return self.pivot.cycle

    def predicates(self) -> list[Predicate]:
        return [p for cyc in self.per_cycle for p in cyc] + [self.pivot]

    def formula(self) -> T.Term:
        return T.conj(p.required for p in self.predicates())


@dataclass(frozen=True)
class Model:
    assignments: dict  # (input, cycle) -> int

    def env(self) -> dict:
        return {var_name(s, c): v for (s, c), v in self.assignments.items()}


@dataclass(frozen=True)
class SolveResult:
    status: str  # sat | unsat | unknown
    model: Optional[Model] = None
    conflicts: int = 0
    clauses: int = 0

    @property
    def sat(self) -> bool:
        return self.status == SAT


def solve(cv: ConstraintVector, conflict_limit: int = 200_000) -> SolveResult:
    f = cv.formula()
    if f is T.FALSE:
        return SolveResult(UNSAT)
    bb = BitBlaster()
    out = bb.blast(f)[0]
    bb.clauses.append([out])
    phases = {}
    for name, bits in bb.var_bits.items():
        v = cv.defaults.get(name, 0)
        for i, b in enumerate(bits):
            phases[b] = (v >> i) & 1
    s = SatSolver(bb.nvars, bb.clauses, phases, conflict_limit)
    status = s.solve()
    if status != SAT:
        return SolveResult(status, None, s.conflicts, len(bb.clauses))
    bits_true = s.model()
    found = {}
    for name, bits in bb.var_bits.items():
        found[name] = sum(1 << i for i, b in enumerate(bits) if bits_true[b])
    return SolveResult(SAT, complete_model(cv, found), s.conflicts, len(bb.clauses))


def complete_model(cv: ConstraintVector, found: dict) -> Model:
    """Model over every input of cycles 1..pivot; unsolved ones keep the current test value."""
    out = {}
    for cycle in range(1, cv.cycle + 1):
        for sig, _w in cv.inputs:
            name = var_name(sig, cycle)
            out[(sig, cycle)] = found.get(name, cv.defaults.get(name, 0))
    for name, v in found.items():
        out.setdefault(split_var(name), v)
    return Model(dict(sorted(out.items())))


def check_model(cv: ConstraintVector, m: Model) -> bool:
    env = m.env()
    memo: dict = {}
    for p in cv.predicates():
        try:
            if T.evaluate(p.term, env, memo) != int(p.polarity):
                return False
        except KeyError:
            return False
    return True


__all__ = ["ConstraintVector", "Model", "Predicate", "SolveResult", "SAT", "UNSAT", "UNKNOWN", "complete_model",
           "check_model", "solve", "split_var", "var_name"]
