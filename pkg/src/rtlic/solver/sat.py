"""Conflict-driven clause learning SAT search.

Two watched literals, first-UIP learning, activity-ordered decisions with a
deterministic tie-break on variable index, saved phases, no restarts.
Literals are non-zero ints in DIMACS convention.
"""

from __future__ import annotations

import heapq
from typing import Optional, Sequence

SAT, UNSAT, UNKNOWN = "sat", "unsat", "unknown"


class SatSolver:
    def __init__(self, num_vars: int, clauses: Sequence[Sequence[int]],
                 phases: Optional[dict] = None, conflict_limit: int = 200_000):
        self.n = num_vars
        self.value = [0] * (num_vars + 1)  # 1 true, -1 false, 0 unassigned
        self.level = [0] * (num_vars + 1)
        self.reason: list = [None] * (num_vars + 1)
        self.phase = [False] * (num_vars + 1)
        for v, b in (phases or {}).items():
            self.phase[v] = bool(b)
        self.activity = [0.0] * (num_vars + 1)
        self.inc = 1.0
        self.heap = [(0.0, v) for v in range(1, num_vars + 1)]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: dict[int, list] = {}
        self.clauses: list[list[int]] = []
        self.conflict_limit = conflict_limit
        self.conflicts = 0
        self.ok = True
        for c in clauses:
            if not self.add_clause(c):
                self.ok = False
                break

    def lit_value(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits) -> bool:
        lits = sorted(set(lits), key=abs)
        if any(-l in lits for l in lits):
            return True
        lits = [l for l in lits if self.lit_value(l) != -1]
        if any(self.lit_value(l) == 1 for l in lits):
            return True
        if not lits:
            return False
        if len(lits) == 1:
            self.assign(lits[0], None)
            return self.propagate() is None
        self.clauses.append(lits)
        self.watches.setdefault(-lits[0], []).append(lits)
        self.watches.setdefault(-lits[1], []).append(lits)
        return True

    def assign(self, lit, reason):
        v = abs(lit)
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def propagate(self):
        """Unit propagation; returns a conflicting clause or None."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            # clauses watching -lit are now watching a false literal
            ws = self.watches.get(lit)
            if not ws:
                continue
            i = 0
            keep = []
            conflict = None
            while i < len(ws):
                c = ws[i]
                i += 1
                if c[0] == -lit:
                    c[0], c[1] = c[1], c[0]
                if self.lit_value(c[0]) == 1:
                    keep.append(c)
                    continue
                for k in range(2, len(c)):
                    if self.lit_value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(-c[1], []).append(c)
                        break
                else:
                    keep.append(c)
                    if self.lit_value(c[0]) == -1:
                        conflict = c
                        keep.extend(ws[i:])
                        break
                    self.assign(c[0], c)
            self.watches[lit] = keep
            if conflict is not None:
                return conflict
        return None

    def bump(self, v):
        self.activity[v] += self.inc
        if self.activity[v] > 1e100:
            for i in range(1, self.n + 1):
                self.activity[i] *= 1e-100
            self.inc *= 1e-100
            self.heap = [(-self.activity[i], i) for i in range(1, self.n + 1) if self.value[i] == 0]
            heapq.heapify(self.heap)
            return
        heapq.heappush(self.heap, (-self.activity[v], v))

    def analyze(self, conflict):
        learnt = [0]
        seen = set()
        counter = 0
        lit = None
        idx = len(self.trail) - 1
        clause = conflict
        cur_level = len(self.trail_lim)
        while True:
            for q in clause:
                if lit is not None and q == lit:
                    continue
                v = abs(q)
                if v in seen or self.level[v] == 0:
                    continue
                seen.add(v)
                self.bump(v)
                if self.level[v] == cur_level:
                    counter += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            lit = self.trail[idx]
            idx -= 1
            seen.discard(abs(lit))
            counter -= 1
            if counter == 0:
                break
            clause = self.reason[abs(lit)]
        learnt[0] = -lit
        self.inc *= 1.05
        if len(learnt) == 1:
            return learnt, 0
        # second watch goes to the highest remaining level
        best = max(range(1, len(learnt)), key=lambda i: self.level[abs(learnt[i])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def backtrack(self, level):
        if len(self.trail_lim) <= level:
            return
        start = self.trail_lim[level]
        for lit in self.trail[start:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            self.value[v] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[start:]
        del self.trail_lim[level:]
        self.qhead = len(self.trail)

    def decide(self) -> Optional[int]:
        while self.heap:
            act, v = heapq.heappop(self.heap)
            if self.value[v] == 0 and -act == self.activity[v]:
                return v if self.phase[v] else -v
        for v in range(1, self.n + 1):  # stale heap entries only
            if self.value[v] == 0:
                return v if self.phase[v] else -v
        return None

    def solve(self) -> str:
        if not self.ok:
            return UNSAT
        if self.propagate() is not None:
            return UNSAT
        while True:
            conflict = self.propagate()
            if conflict is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    return UNSAT
                if self.conflicts > self.conflict_limit:
                    return UNKNOWN
                learnt, back = self.analyze(conflict)
                self.backtrack(back)
                if len(learnt) == 1:
                    self.assign(learnt[0], None)
                else:
                    self.clauses.append(learnt)
                    self.watches.setdefault(-learnt[0], []).append(learnt)
                    self.watches.setdefault(-learnt[1], []).append(learnt)
                    self.assign(learnt[0], learnt)
                continue
            lit = self.decide()
            if lit is None:
                return SAT
            self.trail_lim.append(len(self.trail))
            self.assign(lit, None)

    def model(self) -> list[bool]:
        return [self.value[v] == 1 for v in range(self.n + 1)]
