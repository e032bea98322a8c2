"""Two-valued cycle-based simulation over the block graphs.

Each cycle runs four phases: drive inputs, settle the combinational
processes, clock edge (all clocked processes read pre-edge state, their
nonblocking updates commit together), settle again. Blocks executed in the
settle-edge-settle phases are recorded under the cycle.

The same interpreter can carry a symbolic shadow of every value. Inputs of
cycles at or after ``symbolic_from`` become solver variables named
``<input>__c<cycle>``; every branch evaluation is then logged together with
the term of its condition, which is what the concolic search negates.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from . import bv
from .cfg import CfgSet, build_cfg_set, stmt_defs, stmt_uses
from .errors import SimulationError
from .frontend import ast as A
from .frontend.elaborate import ElaboratedDesign
from .solver import terms as T
from .solver.core import var_name


@dataclass(frozen=True)
class TestVector:
    __test__ = False  # not a pytest class

    cycle: int
    assignments: dict


@dataclass(frozen=True)
class TestSet:
    __test__ = False

    vectors: tuple = ()

    def __post_init__(self):
        for i, v in enumerate(self.vectors):
            if v.cycle != i + 1:
                raise SimulationError(f"test vectors must cover cycles 1..m contiguously (got cycle {v.cycle} at position {i + 1})")

    def __len__(self):
        return len(self.vectors)

    def value(self, name: str, cycle: int) -> int:
        if cycle <= len(self.vectors):
            return self.vectors[cycle - 1].assignments.get(name, 0)
        return 0

    def padded(self, inputs: dict, n: int) -> "TestSet":
        vecs = list(self.vectors[:n])
        for c in range(len(vecs) + 1, n + 1):
            vecs.append(TestVector(c, {k: 0 for k in inputs}))
        return TestSet(tuple(vecs))

    def with_values(self, values: dict, cycles: range) -> "TestSet":
        """Copy with ``values[(input, cycle)]`` applied for the given cycles."""
        vecs = list(self.vectors)
        for c in cycles:
            a = dict(vecs[c - 1].assignments)
            for k in a:
                if (k, c) in values:
                    a[k] = values[(k, c)]
            vecs[c - 1] = TestVector(c, a)
        return TestSet(tuple(vecs))

    def slice(self, first: int, last: int) -> list:
        return list(self.vectors[first - 1: last])

    def to_json(self, inputs: Optional[dict] = None) -> list:
        out = []
        for v in self.vectors:
            names = inputs or v.assignments
            out.append({"cycle": v.cycle,
                        "inputs": {k: hex(v.assignments.get(k, 0)) for k in names}})
        return out

    @classmethod
    def from_json(cls, data, inputs: Optional[dict] = None) -> "TestSet":
        if not isinstance(data, list):
            raise SimulationError("test set must be a JSON list")
        vecs = []
        for i, item in enumerate(data):
            try:
                cycle = int(item["cycle"])
                raw = item["inputs"]
                values = {k: int(str(v), 0) for k, v in raw.items()}
            except (KeyError, TypeError, ValueError) as e:
                raise SimulationError(f"malformed test vector #{i + 1}: {e}") from e
            if inputs is not None:
                for k, v in values.items():
                    if k not in inputs:
                        raise SimulationError(f"cycle {cycle}: unknown input {k}")
                    if v >> inputs[k]:
                        raise SimulationError(f"cycle {cycle}: value {v:#x} too wide for {k}[{inputs[k]}]")
                for k in inputs:
                    values.setdefault(k, 0)
            vecs.append(TestVector(cycle, values))
        return cls(tuple(vecs))

    @classmethod
    def random(cls, inputs: dict, n: int, seed: int) -> "TestSet":
        rng = random.Random(seed)
        return cls(tuple(TestVector(c, {k: rng.getrandbits(w) for k, w in inputs.items()})
                         for c in range(1, n + 1)))

    @classmethod
    def zeros(cls, inputs: dict, n: int) -> "TestSet":
        return cls().padded(inputs, n)


def load_testset(path, inputs=None) -> TestSet:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as e:
        raise SimulationError(f"{path}: cannot parse test set: {e}") from e
    return TestSet.from_json(data, inputs)


@dataclass(frozen=True)
class BranchEvent:
    cycle: int
    phase: str  # "pre", "edge" or "post"
    process: int
    block: str  # block holding the branch
    taken: str
    other: str
    polarity: bool
    term: Optional[T.Term] = None


@dataclass(frozen=True)
class SimulationTrace:
    records: tuple  # (cycle, tuple of block labels)
    final_state: dict
    activated_markers: frozenset
    displays: tuple = ()
    events: tuple = field(default=(), repr=False)
    states: tuple = field(default=(), repr=False)  # per-cycle snapshot after the cycle
    final_terms: Optional[dict] = field(default=None, repr=False, compare=False)

    def blocks_at(self, cycle: int) -> tuple:
        return self.records[cycle - 1][1]

    def first_activation(self, label: str, start: int = 1) -> Optional[int]:
        for cycle, blocks in self.records[start - 1:]:
            if label in blocks:
                return cycle
        return None

    def marker_cycles(self, marker: str) -> list[int]:
        return sorted(c for m, c in self.activated_markers if m == marker)

    def log(self) -> str:
        lines = []
        for cycle, blocks in self.records:
            lines.append(f"C {cycle}")
            lines += [f"B {b}" for b in blocks]
            for m in sorted({m for m, c in self.activated_markers if c == cycle}):
                lines.append(f"M {m} {cycle}")
        return "\n".join(lines) + "\n"


def _comb_order(cs: CfgSet) -> tuple[list, bool]:
    """Topological order of combinational processes and whether it is acyclic."""
    comb = [c for c in cs.cfgs if c.kind == "comb"]
    defs = {c.process_id: {s for b in c.blocks.values() for s in b.defined} for c in comb}
    uses = {c.process_id: {s for b in c.blocks.values() for s in b.used} for c in comb}
    order, placed = [], set()
    acyclic = all(not (defs[p] & uses[p]) for p in defs)
    remaining = [c.process_id for c in comb]
    while remaining:
        for pid in remaining:
            deps = {q for q in remaining if q != pid and defs[q] & uses[pid]}
            if not deps:
                break
        else:
            acyclic = False
            pid = remaining[0]
        order.append(pid)
        placed.add(pid)
        remaining.remove(pid)
    return order, acyclic


class Simulator:
    def __init__(self, design, cs: Optional[CfgSet] = None):
        self.design = design
        self.elab: ElaboratedDesign = getattr(design, "design", design)
        self.cs = cs or getattr(design, "cfg", None) or build_cfg_set(self.elab)
        self.markers = dict(getattr(design, "marker_table", {}) or {})
        if not self.markers:
            for b in self.cs.blocks.values():
                texts = [s.text for s in b.stmts if isinstance(s, A.Display)]
                if texts:
                    self.markers[b.label] = texts[0]
        self.blocks = self.cs.blocks
        self.table = self.elab.signal_table
        self.inputs = self.elab.inputs()
        self.comb_order, self.acyclic = _comb_order(self.cs)
        self.clocked = [c for c in self.cs.cfgs if c.kind == "clocked"]
        self.bound = 2 * len(self.comb_order) + 2
        self.comb_defs = sorted({s for pid in self.comb_order
                                 for b in self.cs.cfg(pid).blocks.values() for s in b.defined})

    # -- concrete values -----------------------------------------------
    def value(self, e, val) -> int:
        if isinstance(e, A.Const):
            return e.value
        if isinstance(e, A.Ref):
            return val[e.name]
        if isinstance(e, A.MemRead):
            a = self.value(e.addr, val)
            words = val[e.mem]
            return words[a] if a < len(words) else 0
        if isinstance(e, A.Slice):
            return (self.value(e.base, val) >> e.lsb.value) & bv.mask(e.width)
        if isinstance(e, A.BitSel):
            i = self.value(e.index, val)
            return (self.value(e.base, val) >> i) & 1 if i < e.base.width else 0
        if isinstance(e, A.Unary):
            return bv.eval_unary(e.op, self.value(e.operand, val), e.operand.width)
        if isinstance(e, A.Binary):
            w = e.left.width if e.op in ("<<", ">>") else e.width
            return bv.eval_binary(e.op, self.value(e.left, val), self.value(e.right, val), w)
        if isinstance(e, A.Concat):
            v = 0
            for p in e.parts:
                v = (v << p.width) | self.value(p, val)
            return v
        if isinstance(e, A.Mux):
            return self.value(e.if_true if self.value(e.cond, val) else e.if_false, val)
        raise SimulationError(f"cannot evaluate {e!r}")

    # -- symbolic values -----------------------------------------------
    def term(self, e, env) -> T.Term:
        if isinstance(e, A.Const):
            return T.const(e.value, e.width)
        if isinstance(e, A.Ref):
            return env[e.name]
        if isinstance(e, A.MemRead):
            return T.select(env[e.mem], self.term(e.addr, env))
        if isinstance(e, A.Slice):
            return T.extract(self.term(e.base, env), e.msb.value, e.lsb.value)
        if isinstance(e, A.BitSel):
            return T.extract(T.lshr(self.term(e.base, env), self.term(e.index, env)), 0, 0)
        if isinstance(e, A.Unary):
            return {"~": T.bvnot, "-": T.neg, "!": T.lnot}[e.op](self.term(e.operand, env))
        if isinstance(e, A.Binary):
            a, b = self.term(e.left, env), self.term(e.right, env)
            op = e.op
            if op in ("<<", ">>"):
                return (T.shl if op == "<<" else T.lshr)(a, b)
            w = max(e.left.width, e.right.width)
            a, b = T.zext(a, w), T.zext(b, w)
            if op == "==":
                return T.eq(a, b)
            if op == "!=":
                return T.bvnot(T.eq(a, b))
            if op in ("<", ">"):
                return T.ult(a, b) if op == "<" else T.ult(b, a)
            if op in ("<=", ">="):
                return T.ule(a, b) if op == "<=" else T.ule(b, a)
            fn = {"&&": T.land, "||": T.lor, "&": T.bvand, "|": T.bvor, "^": T.bvxor,
                  "+": T.add, "-": T.sub}[op]
            return fn(a, b)
        if isinstance(e, A.Concat):
            return T.concat([self.term(p, env) for p in e.parts])
        if isinstance(e, A.Mux):
            return T.ite(self.term(e.cond, env), T.zext(self.term(e.if_true, env), e.width),
                         T.zext(self.term(e.if_false, env), e.width))
        raise SimulationError(f"cannot evaluate {e!r}")

    # -- processes -----------------------------------------------------
    def run_process(self, cfg, st, phase, blocks, nba=None, conds=None):
        """Follow the concrete path through one process."""
        label = cfg.entry
        while label is not None:
            b = cfg.blocks[label]
            blocks.append(label)
            for s in b.stmts:
                if isinstance(s, A.Assign):
                    self.assign(s, st, nba)
            if b.branch is not None:
                taken = self.value(b.branch, st.val) != 0
                nxt = cfg.succ(label, taken)
                if st.events is not None:
                    st.events.append(BranchEvent(
                        st.cycle, phase, cfg.process_id, label, nxt, cfg.succ(label, not taken),
                        taken, conds[label] if conds is not None else None))
                label = nxt
            else:
                label = cfg.succ(label, None)

    def assign(self, s: A.Assign, st, nba):
        name = s.target.name
        v = self.value(s.value, st.val) & bv.mask(self.table[name].width)
        addr = self.value(s.target.index, st.val) if s.target.index is not None else None
        if nba is not None:
            nba.append((name, addr, v))
        else:
            self.commit(name, addr, v, st.val)

    @staticmethod
    def commit(name, addr, v, val):
        if addr is None:
            val[name] = v
        elif addr < len(val[name]):
            words = list(val[name])
            words[addr] = v
            val[name] = words

    def shadow_process(self, cfg, env, pending=None) -> dict:
        """Symbolic transition of one process over all of its paths.

        Every block runs under the condition of reaching it, so each update
        becomes ``ite(reach, new, old)``. Writes of clocked processes go to
        ``pending`` and read the pre-edge ``env``. Returns the condition term
        of every branch, evaluated in the state at that branch.
        """
        reach = {cfg.entry: T.TRUE}
        conds = {}
        for label, b in cfg.blocks.items():  # creation order is topological
            g = reach.get(label, T.FALSE)
            if g is T.FALSE:
                continue
            for s in b.stmts:
                if isinstance(s, A.Assign):
                    self.shadow_assign(s, g, env, pending)
            if b.branch is not None:
                c = T.redor(self.term(b.branch, env))
                conds[label] = c
                for pol, cc in ((True, c), (False, T.bvnot(c))):
                    child = cfg.succ(label, pol)
                    reach[child] = T.lor(reach.get(child, T.FALSE), T.land(g, cc))
            else:
                child = cfg.succ(label, None)
                if child is not None:
                    reach[child] = T.lor(reach.get(child, T.FALSE), g)
        return conds

    def shadow_assign(self, s, g, env, pending):
        name = s.target.name
        info = self.table[name]
        data = T.zext(self.term(s.value, env), info.width)
        target = pending if pending is not None else env
        if s.target.index is None:
            old = target.get(name, env[name])
            target[name] = T.ite(g, data, old)
            return
        addr = self.term(s.target.index, env)
        mem = target.get(name, env[name])
        if g is not T.TRUE:
            data = T.ite(g, data, T.select(mem, addr))
        target[name] = T.store(mem, addr, data)

    def settle(self, st, phase, blocks):
        passes = 0
        snapshot = [st.val[s] for s in self.comb_defs]
        while True:
            passes += 1
            if passes > self.bound:
                raise SimulationError(
                    f"combinational loop: no fixpoint after {self.bound} passes in cycle {st.cycle}")
            pass_blocks = []
            mark = len(st.events) if st.events is not None else 0
            for pid in self.comb_order:
                cfg = self.cs.cfg(pid)
                conds = self.shadow_process(cfg, st.term) if st.sym else None
                self.run_process(cfg, st, phase, pass_blocks, conds=conds)
            now = [st.val[s] for s in self.comb_defs]
            if self.acyclic or now == snapshot:
                if passes > 1 and st.events is not None:
                    del st.events[mark:]  # confirming pass repeats the previous one
                blocks.extend(pass_blocks)
                return
            snapshot = now

    def edge(self, st, blocks):
        nba: list = []
        pending: dict = {}
        for cfg in self.clocked:
            conds = self.shadow_process(cfg, st.term, pending) if st.sym else None
            self.run_process(cfg, st, "edge", blocks, nba, conds)
        for name, addr, v in nba:
            self.commit(name, addr, v, st.val)
        st.term.update(pending)

    # -- top level -----------------------------------------------------
    def run(self, tests: TestSet, n: int, symbolic_from: Optional[int] = None,
            events: bool = False) -> SimulationTrace:
        if n < 1:
            raise SimulationError("cycle count must be >= 1")
        tests = tests.padded(self.inputs, n) if len(tests) < n else tests
        for vec in tests.vectors[:n]:
            for k, v in vec.assignments.items():
                if k in self.inputs and v >> self.inputs[k]:
                    raise SimulationError(f"cycle {vec.cycle}: width mismatch for {k}: {v:#x}")
        st = _State(symbolic_from is not None, [] if (events or symbolic_from is not None) else None)
        for name, info in self.table.items():
            if info.kind == "memory":
                st.val[name] = [0] * info.depth
                if st.sym:
                    st.term[name] = T.memzero(info.depth, info.width, info.addr_width)
            else:
                st.val[name] = 0
                if st.sym:
                    st.term[name] = T.const(0, info.width)
        records, markers, displays, states = [], set(), [], []
        for cycle in range(1, n + 1):
            st.cycle = cycle
            vec = tests.vectors[cycle - 1].assignments
            for k, w in self.inputs.items():
                st.val[k] = vec.get(k, 0)
                if st.sym:
                    if cycle >= symbolic_from:
                        st.term[k] = T.var(var_name(k, cycle), w)
                    else:
                        st.term[k] = T.const(st.val[k], w)
            blocks: list = []
            self.settle(st, "pre", blocks)
            self.edge(st, blocks)
            self.settle(st, "post", blocks)
            records.append((cycle, tuple(blocks)))
            for b in blocks:
                if b in self.markers:
                    markers.add((self.markers[b], cycle))
                for s in self.blocks[b].stmts:
                    if isinstance(s, A.Display):
                        displays.append((cycle, s.text))
            states.append(_snapshot(st.val))
        return SimulationTrace(tuple(records), _snapshot(st.val), frozenset(markers),
                               tuple(displays), tuple(st.events or ()), tuple(states),
                               dict(st.term) if st.sym else None)


def _snapshot(val):
    return {k: (list(v) if isinstance(v, list) else v) for k, v in val.items()}


class _State:
    __slots__ = ("val", "term", "sym", "events", "cycle")

    def __init__(self, sym, events):
        self.val = {}
        self.term = {}
        self.sym = sym
        self.events = events
        self.cycle = 0


def simulate(design, tests: TestSet, n: int) -> SimulationTrace:
    return Simulator(design).run(tests, n)


def replay_check(original: ElaboratedDesign, tests: TestSet, target, n: int) -> bool:
    """True iff the target block executes in some cycle <= n on ``original``."""
    label = getattr(target, "block", target)
    trace = Simulator(original).run(tests, n)
    return trace.first_activation(label) is not None
